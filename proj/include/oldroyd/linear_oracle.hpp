// Copyright 2026 The oldroyd-spectral Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "oldroyd/field.hpp"
#include "oldroyd/grid.hpp"
#include "oldroyd/model.hpp"

namespace oldroyd::linear {

/// Small dense complex matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n * n), complex{}) {}
  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int size() const { return n_; }
  complex& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * n_ + j)]; }
  complex operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }

  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    Matrix z(x.n_);
    for (int i = 0; i < x.n_; ++i)
      for (int l = 0; l < x.n_; ++l) {
        const complex v = x(i, l);
        if (v == complex{}) continue;
        for (int j = 0; j < x.n_; ++j) z(i, j) += v * y(l, j);
      }
    return z;
  }
  friend Matrix operator+(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] += y.a_[i];
    return x;
  }
  friend Matrix operator-(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] -= y.a_[i];
    return x;
  }
  friend Matrix operator*(complex s, Matrix x) {
    for (auto& v : x.a_) v *= s;
    return x;
  }
  std::vector<complex> apply(const std::vector<complex>& v) const {
    std::vector<complex> out(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) out[static_cast<std::size_t>(i)] += (*this)(i, j) * v[static_cast<std::size_t>(j)];
    return out;
  }
  /// Max absolute row sum.
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

 private:
  int n_ = 0;
  std::vector<complex> a_;
};

/// Solves A X = B by LU with partial pivoting (A, B square of equal size).
inline Matrix solve(Matrix a, Matrix b) {
  const int n = a.size();
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) == 0.0) throw std::runtime_error("linear::solve: singular matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(b(piv, j), b(col, j));
      }
    for (int r = col + 1; r < n; ++r) {
      const complex f = a(r, col) / a(col, col);
      if (f == complex{}) continue;
      for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      for (int j = 0; j < n; ++j) b(r, j) -= f * b(col, j);
    }
  }
  for (int col = n - 1; col >= 0; --col)
    for (int j = 0; j < n; ++j) {
      complex s = b(col, j);
      for (int l = col + 1; l < n; ++l) s -= a(col, l) * b(l, j);
      b(col, j) = s / a(col, col);
    }
  return b;
}

/// exp(A) by scaling and squaring with a diagonal [6/6] Padé approximant.
inline Matrix expm(const Matrix& a) {
  const int n = a.size();
  const double nrm = a.norm_inf();
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const Matrix x = complex(std::ldexp(1.0, -squarings), 0.0) * a;
  // Padé coefficients c_j = (2q−j)! q! / ((2q)! j! (q−j)!), q = 6
  constexpr int q = 6;
  double c[q + 1];
  c[0] = 1.0;
  for (int j = 1; j <= q; ++j) c[j] = c[j - 1] * double(q - j + 1) / double(j * (2 * q - j + 1));
  Matrix power = Matrix::identity(n);
  Matrix num = Matrix::identity(n), den = Matrix::identity(n);
  for (int j = 1; j <= q; ++j) {
    power = power * x;
    num = num + complex(c[j], 0.0) * power;
    den = den + complex((j % 2 ? -1.0 : 1.0) * c[j], 0.0) * power;
  }
  Matrix r = solve(den, num);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

/// Linearization of the model about (u, τ) = (0, 0) at one wavevector.
///
/// The stacked mode vector is (û_0..û_{d-1}, τ̂ packed as sym_tensor).
///   dû/dt = −ν|ξ|² û + ik P(ξ)(τ̂ ξ)
///   dτ̂/dt = −(η|ξ|² + μ) τ̂ + (iα/2)(ξ ⊗ û + û ⊗ ξ)
/// P(ξ) is built into the u rows, so û ⟂ ξ is preserved without a constraint.
struct ModeSystem {
  Wavevector xi{};
  ModelParams params;
  int dim = 2;
  Matrix matrix;
};

inline int mode_size(int dim) { return dim + dim * (dim + 1) / 2; }

inline ModeSystem mode_matrix(const Wavevector& xi, const ModelParams& p, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("mode_matrix: dim must be 2 or 3");
  const double k2 = norm_sq(xi);
  if (k2 == 0.0) throw std::invalid_argument("mode_matrix: xi = 0 is an invariant mean mode");
  const int n = mode_size(dim);
  ModeSystem sys{xi, p, dim, Matrix(n)};
  Matrix& m = sys.matrix;
  const complex I(0.0, 1.0);
  auto proj = [&](int i, int l) { return (i == l ? 1.0 : 0.0) - xi[i] * xi[l] / k2; };
  for (int i = 0; i < dim; ++i) {
    m(i, i) += -p.nu * k2;
    // (P τ̂ ξ)_i = Σ_l P_il Σ_j τ̂_lj ξ_j
    for (int l = 0; l < dim; ++l)
      for (int j = 0; j < dim; ++j) m(i, dim + sym_index(l, j, dim)) += I * p.k * proj(i, l) * double(xi[j]);
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      const int r = dim + sym_index(i, j, dim);
      m(r, r) += -(p.eta * k2 + p.mu);
      m(r, j) += 0.5 * I * p.alpha * double(xi[i]);
      m(r, i) += 0.5 * I * p.alpha * double(xi[j]);
    }
  return sys;
}

/// exp(t M) applied to a stacked mode vector.
inline std::vector<complex> evolve_exact(const ModeSystem& sys, const std::vector<complex>& state, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolve_exact: t must be >= 0");
  if (t == 0.0) return state;
  return expm(complex(t, 0.0) * sys.matrix).apply(state);
}

/// Roots of λ² + bλ + c = 0 (complex coefficients), cancellation-free.
inline std::pair<complex, complex> quadratic_roots(complex b, complex c) {
  const complex disc = std::sqrt(b * b - 4.0 * c);
  complex q = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0.0 ? disc : -disc));
  if (q == complex{}) return {complex{}, complex{}};
  return {q, c / q};
}

/// Eigenvalues of the physical (û ⟂ ξ) part of the mode system.
///
/// In the basis {ξ̂, transverse e_a} the system splits into d−1 identical 2×2
/// blocks coupling û·e_a with the (e_a, ξ̂) shear stress,
///   λ² + (ν|ξ|² + L)λ + ν|ξ|²L + (kα/2)|ξ|² = 0,   L = η|ξ|² + μ,
/// plus d(d+1)/2 − (d−1) stress directions decaying at −L.
inline std::vector<complex> eigenvalues_at(double k2, const ModelParams& p, int dim) {
  const double L = p.eta * k2 + p.mu;
  const double V = p.nu * k2;
  const auto [r1, r2] = quadratic_roots(V + L, V * L + 0.5 * p.k * p.alpha * k2);
  std::vector<complex> ev;
  for (int a = 0; a < dim - 1; ++a) {
    ev.push_back(r1);
    ev.push_back(r2);
  }
  const int rest = dim * (dim + 1) / 2 - (dim - 1);
  for (int a = 0; a < rest; ++a) ev.emplace_back(-L, 0.0);
  std::sort(ev.begin(), ev.end(), [](complex x, complex y) { return x.real() > y.real(); });
  return ev;
}

inline std::vector<complex> eigenvalues(const ModeSystem& sys) {
  return eigenvalues_at(norm_sq(sys.xi), sys.params, sys.dim);
}

/// Eigenvalue with the largest real part.
inline complex slowest_eigenvalue(const ModeSystem& sys) { return eigenvalues(sys).front(); }

/// Squared magnitudes |ξ|² of nonzero integer wavevectors with |ξ| <= xi_max.
inline std::vector<int> shell_radii_sq(int dim, double xi_max) {
  std::set<int> out;
  const int r = static_cast<int>(std::floor(xi_max));
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = (dim == 3 ? -r : 0); c <= (dim == 3 ? r : 0); ++c) {
        const int s = a * a + b * b + c * c;
        if (s > 0 && s <= xi_max * xi_max + 1e-9) out.insert(s);
      }
  return {out.begin(), out.end()};
}

/// −max over 1 <= |ξ| <= xi_max of the largest eigenvalue real part.
inline double slowest_decay_rate(const ModelParams& p, double xi_max, int dim = 2) {
  if (!(xi_max >= 1.0)) throw std::invalid_argument("slowest_decay_rate: xi_max must be >= 1");
  double worst = -std::numeric_limits<double>::infinity();
  for (int s : shell_radii_sq(dim, xi_max)) {
    worst = std::max(worst, eigenvalues_at(double(s), p, dim).front().real());
  }
  return -worst;
}

/// Exact linearized evolution of a whole state: every nonzero mode is
/// advanced by evolve_exact, the mean of τ decays as e^{−μt}, the mean of u
/// is invariant.
inline SimState evolve_linear(const SimState& s, const ModelParams& p, double t) {
  const Grid& g = s.grid();
  const int d = g.dim;
  SimState out = s;
  out.t = s.t + t;
  for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
    if (norm_sq(xi) == 0.0) {
      for (int c = 0; c < out.tau.components(); ++c) out.tau.component(c)[m] *= std::exp(-p.mu * t);
      return;
    }
    std::vector<complex> v(static_cast<std::size_t>(mode_size(d)));
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = s.u.component(i)[m];
    for (int c = 0; c < s.tau.components(); ++c) v[static_cast<std::size_t>(d + c)] = s.tau.component(c)[m];
    bool zero = true;
    for (const auto& x : v) zero = zero && x == complex{};
    if (zero) return;
    const auto w = evolve_exact(mode_matrix(xi, p, d), v, t);
    for (int i = 0; i < d; ++i) out.u.component(i)[m] = w[static_cast<std::size_t>(i)];
    for (int c = 0; c < s.tau.components(); ++c) out.tau.component(c)[m] = w[static_cast<std::size_t>(d + c)];
  });
  return out;
}

}  // namespace oldroyd::linear
