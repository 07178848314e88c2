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
#include <limits>
#include <sstream>
#include <stdexcept>

#include "oldroyd/fft.hpp"
#include "oldroyd/field.hpp"
#include "oldroyd/grid.hpp"

namespace oldroyd {

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

/// Unnormalized forward DFT of every component. Rejects NaN/Inf input.
inline SpectralField transform_forward(const PhysicalField& f) {
  const Grid& g = f.grid();
  validate(g);
  for (int c = 0; c < f.components(); ++c) {
    auto comp = f.component(c);
    auto bad = std::find_if(comp.begin(), comp.end(), [](double v) { return !std::isfinite(v); });
    if (bad != comp.end()) {
      std::ostringstream os;
      os << "transform_forward: non-finite value " << *bad << " in component " << c << " at point "
         << (bad - comp.begin());
      throw std::domain_error(os.str());
    }
  }
  SpectralField out(g, f.rank());
  for (int c = 0; c < f.components(); ++c) fft::forward(g, f.component(c), out.component(c));
  return out;
}

/// Inverse DFT (with the 1/n^dim factor) of every component.
inline PhysicalField transform_backward(const SpectralField& f) {
  const Grid& g = f.grid();
  validate(g);
  PhysicalField out(g, f.rank());
  for (int c = 0; c < f.components(); ++c) fft::backward(g, f.component(c), out.component(c));
  return out;
}

// ---------------------------------------------------------------------------
// Multipliers
// ---------------------------------------------------------------------------

/// Wavenumber used by odd-order derivatives: Nyquist components read as 0.
inline double odd_wavenumber(const Grid& g, int xi) { return g.is_nyquist(xi) ? 0.0 : double(xi); }

/// Applies the scalar multiplier m(xi) to every component.
template <class M>
SpectralField apply_multiplier(const SpectralField& f, M&& m) {
  SpectralField out = f;
  for (int c = 0; c < f.components(); ++c) {
    auto dst = out.component(c);
    for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& xi, double) { dst[i] *= m(xi); });
  }
  return out;
}

/// ∂f/∂x_axis, any rank.
inline SpectralField partial(const SpectralField& f, int axis) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](const Wavevector& xi) { return complex(0.0, odd_wavenumber(g, xi[axis])); });
}

/// Scalar → vector, component i = iξ_i f̂.
inline SpectralField gradient(const SpectralField& f) {
  if (f.rank() != Rank::scalar) throw std::invalid_argument("gradient: scalar field expected");
  const Grid& g = f.grid();
  SpectralField out(g, Rank::vector);
  for (int a = 0; a < g.dim; ++a) {
    auto dst = out.component(a);
    auto src = f.component(0);
    for_each_mode(g, [&](std::size_t i, const Wavevector& xi, double) {
      dst[i] = complex(0.0, odd_wavenumber(g, xi[a])) * src[i];
    });
  }
  return out;
}

/// Vector → full tensor G with G(i,j) = ∂_j u_i.
inline SpectralField velocity_gradient(const SpectralField& u) {
  if (u.rank() != Rank::vector) throw std::invalid_argument("velocity_gradient: vector field expected");
  const Grid& g = u.grid();
  SpectralField out(g, Rank::tensor);
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) {
      auto dst = out.entry(i, j);
      auto src = u.component(i);
      for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
        dst[m] = complex(0.0, odd_wavenumber(g, xi[j])) * src[m];
      });
    }
  return out;
}

/// Vector → scalar, Σ iξ_i v̂_i.
inline SpectralField divergence(const SpectralField& v) {
  if (v.rank() != Rank::vector) throw std::invalid_argument("divergence: vector field expected");
  const Grid& g = v.grid();
  SpectralField out(g, Rank::scalar);
  auto dst = out.component(0);
  for (int a = 0; a < g.dim; ++a) {
    auto src = v.component(a);
    for_each_mode(g, [&](std::size_t i, const Wavevector& xi, double) {
      dst[i] += complex(0.0, odd_wavenumber(g, xi[a])) * src[i];
    });
  }
  return out;
}

/// Row divergence of a symmetric tensor: (div τ)_i = Σ_j iξ_j τ̂_ij.
inline SpectralField divergence_tensor(const SpectralField& tau) {
  if (tau.rank() != Rank::sym_tensor) throw std::invalid_argument("divergence_tensor: sym_tensor expected");
  const Grid& g = tau.grid();
  SpectralField out(g, Rank::vector);
  for (int i = 0; i < g.dim; ++i) {
    auto dst = out.component(i);
    for (int j = 0; j < g.dim; ++j) {
      auto src = tau.entry(i, j);
      for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
        dst[m] += complex(0.0, odd_wavenumber(g, xi[j])) * src[m];
      });
    }
  }
  return out;
}

/// Curl of a vector field: scalar ∂₁v₂ − ∂₂v₁ in 2D, the usual vector in 3D.
inline SpectralField curl(const SpectralField& v) {
  if (v.rank() != Rank::vector) throw std::invalid_argument("curl: vector field expected");
  const Grid& g = v.grid();
  if (g.dim == 2) {
    SpectralField out(g, Rank::scalar);
    auto dst = out.component(0);
    const auto a = partial(v, 0);
    const auto b = partial(v, 1);
    auto d1v2 = a.component(1);
    auto d2v1 = b.component(0);
    for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = d1v2[m] - d2v1[m];
    return out;
  }
  SpectralField out(g, Rank::vector);
  const auto p0 = partial(v, 0), p1 = partial(v, 1), p2 = partial(v, 2);
  for (std::size_t m = 0; m < g.spectral_size(); ++m) {
    out.component(0)[m] = p1.component(2)[m] - p2.component(1)[m];
    out.component(1)[m] = p2.component(0)[m] - p0.component(2)[m];
    out.component(2)[m] = p0.component(1)[m] - p1.component(0)[m];
  }
  return out;
}

inline SpectralField laplacian(const SpectralField& f) {
  return apply_multiplier(f, [](const Wavevector& xi) { return complex(-norm_sq(xi), 0.0); });
}

/// Δ⁻¹ with the zero mode set to zero (mean-free convention).
inline SpectralField inverse_laplacian(const SpectralField& f) {
  return apply_multiplier(f, [](const Wavevector& xi) {
    const double k2 = norm_sq(xi);
    return complex(k2 == 0.0 ? 0.0 : -1.0 / k2, 0.0);
  });
}

/// Leray projection v̂ ← (I − ξξᵀ/|ξ|²) v̂, using the odd-derivative
/// wavevector so that divergence() of the result vanishes identically.
/// Modes whose effective wavevector is zero pass through.
inline SpectralField leray_project(const SpectralField& v) {
  if (v.rank() != Rank::vector) throw std::invalid_argument("leray_project: vector field expected");
  const Grid& g = v.grid();
  SpectralField out = v;
  const int d = g.dim;
  for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
    double k[3] = {odd_wavenumber(g, xi[0]), odd_wavenumber(g, xi[1]), odd_wavenumber(g, xi[2])};
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if (k2 == 0.0) return;
    complex dot = 0.0;
    for (int a = 0; a < d; ++a) dot += k[a] * v.component(a)[m];
    dot /= k2;
    for (int a = 0; a < d; ++a) out.component(a)[m] -= k[a] * dot;
  });
  return out;
}

/// R̃τ = −(−Δ)⁻¹ curl(div τ): multiplier −1/|ξ|² on curl(div τ), zero mode
/// dropped. Scalar in 2D, vector in 3D (vector curl of the vector div τ).
inline SpectralField riesz_tilde(const SpectralField& tau) {
  SpectralField cd = curl(divergence_tensor(tau));
  return apply_multiplier(cd, [](const Wavevector& xi) {
    const double k2 = norm_sq(xi);
    return complex(k2 == 0.0 ? 0.0 : -1.0 / k2, 0.0);
  });
}

inline bool in_dealiased_band(const Grid& g, const Wavevector& xi) {
  for (int a = 0; a < g.dim; ++a)
    if (3 * std::abs(xi[a]) > g.n) return false;
  return true;
}

/// 2/3 rule: zero every mode with some |ξ_i| > n/3.
inline SpectralField dealias(const SpectralField& f) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](const Wavevector& xi) { return complex(in_dealiased_band(g, xi) ? 1.0 : 0.0, 0.0); });
}

inline void dealias_in_place(SpectralField& f) {
  const Grid& g = f.grid();
  for (int c = 0; c < f.components(); ++c) {
    auto v = f.component(c);
    for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
      if (!in_dealiased_band(g, xi)) v[m] = 0.0;
    });
  }
}

// ---------------------------------------------------------------------------
// Norms and inner products (Parseval). Tensor products are Frobenius.
// ---------------------------------------------------------------------------

/// Σ over the full spectrum of w(ξ) Re(f̂ conj(ĝ)), Frobenius-weighted, times
/// the Parseval factor (2π)^d / n^{2d}. Reductions run in fixed mode order.
template <class W>
double weighted_inner(const SpectralField& f, const SpectralField& g, W&& w) {
  f.check_compatible(g);
  const Grid& gr = f.grid();
  const double n = static_cast<double>(gr.real_size());
  const double scale = gr.volume() / (n * n);
  double total = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const double cw = frobenius_weight(f.rank(), gr.dim, c);
    auto a = f.component(c);
    auto b = g.component(c);
    double acc = 0.0;
    for_each_mode(gr, [&](std::size_t m, const Wavevector& xi, double mult) {
      acc += mult * w(xi) * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
    });
    total += cw * acc;
  }
  return total * scale;
}

/// L² inner product ∫ f·g dx.
inline double inner(const SpectralField& f, const SpectralField& g) {
  return weighted_inner(f, g, [](const Wavevector&) { return 1.0; });
}

inline double l2_norm(const SpectralField& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

/// Homogeneous seminorm ‖|ξ|^s f̂‖ over nonzero modes (s may be negative).
inline double homogeneous_norm(const SpectralField& f, double s) {
  return std::sqrt(weighted_inner(f, f, [s](const Wavevector& xi) {
    const double k2 = norm_sq(xi);
    return k2 == 0.0 ? 0.0 : std::pow(k2, s);
  }));
}

/// Inhomogeneous H^s norm ‖(1+|ξ|²)^{s/2} f̂‖.
inline double sobolev_norm(const SpectralField& f, double s) {
  return std::sqrt(weighted_inner(f, f, [s](const Wavevector& xi) { return std::pow(1.0 + norm_sq(xi), s); }));
}

/// Pointwise magnitude (Euclidean over components, Frobenius for tensors).
inline double point_magnitude(const PhysicalField& f, std::size_t i) {
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const double v = f.component(c)[i];
    s += frobenius_weight(f.rank(), f.grid().dim, c) * v * v;
  }
  return std::sqrt(s);
}

/// Collocation L^p norm, p ∈ [1, ∞]; p = ∞ is the grid maximum.
inline double lp_norm(const PhysicalField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  const std::size_t np = f.grid().real_size();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < np; ++i) m = std::max(m, point_magnitude(f, i));
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < np; ++i) acc += std::pow(point_magnitude(f, i), p);
  return std::pow(acc * f.grid().cell_volume(), 1.0 / p);
}

inline double inner(const PhysicalField& f, const PhysicalField& g) {
  f.check_compatible(g);
  double total = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const double cw = frobenius_weight(f.rank(), f.grid().dim, c);
    auto a = f.component(c);
    auto b = g.component(c);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    total += cw * acc;
  }
  return total * f.grid().cell_volume();
}

inline double max_abs(const PhysicalField& f) { return lp_norm(f, std::numeric_limits<double>::infinity()); }

/// Relative divergence ‖div v‖ / (‖∇v‖ or 1).
inline double divergence_residual(const SpectralField& v) {
  const double scale = homogeneous_norm(v, 0.5);
  const double d = l2_norm(divergence(v));
  return scale > 0.0 ? d / scale : d;
}

}  // namespace oldroyd
