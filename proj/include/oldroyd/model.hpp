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

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oldroyd/field.hpp"
#include "oldroyd/spectral.hpp"

namespace oldroyd {

/// Coefficients of
///   ∂t u + (u·∇)u − νΔu + ∇p = k div τ
///   ∂t τ + (u·∇)τ − ηΔτ + μτ + Q(∇u, τ) = α D(u),   div u = 0.
struct ModelParams {
  double k = 0.0;
  double b = 0.0;
  double nu = 0.0;
  double eta = 1.0;
  double mu = 1.0;
  double alpha = 1.0;
};

/// Every violated range, one message each; empty when valid.
inline std::vector<std::string> check(const ModelParams& p) {
  std::vector<std::string> errs;
  auto bad = [&](const std::string& m) { errs.push_back(m); };
  if (!(p.k >= 0.0 && p.k <= 10.0)) bad("k = " + std::to_string(p.k) + " outside the coupling range [0, 10]");
  if (!(p.b >= -1.0 && p.b <= 1.0)) bad("b = " + std::to_string(p.b) + " outside [-1, 1]");
  if (!(p.nu >= 0.0)) bad("nu must be >= 0");
  if (!(p.eta > 0.0)) bad("eta must be > 0: the stress equation must stay parabolic (eta = 0 is unsupported)");
  if (!(p.mu >= 0.0)) bad("mu must be >= 0");
  if (!(p.alpha >= 0.0)) bad("alpha must be >= 0");
  return errs;
}

inline void validate(const ModelParams& p) {
  const auto errs = check(p);
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid model parameters:";
  for (const auto& e : errs) os << "\n  " << e;
  throw std::invalid_argument(os.str());
}

/// Spectral velocity and stress at time t.
struct SimState {
  double t = 0.0;
  SpectralField u;
  SpectralField tau;

  explicit SimState(const Grid& g) : u(g, Rank::vector), tau(g, Rank::sym_tensor) {}
  SimState(double time, SpectralField vel, SpectralField stress)
      : t(time), u(std::move(vel)), tau(std::move(stress)) {
    if (u.rank() != Rank::vector || tau.rank() != Rank::sym_tensor || !(u.grid() == tau.grid()))
      throw std::invalid_argument("SimState: expects a vector u and a sym_tensor tau on one grid");
  }
  const Grid& grid() const { return u.grid(); }
};

// ---------------------------------------------------------------------------
// Linear pieces
// ---------------------------------------------------------------------------

/// D(u) = ½(∇u + ∇uᵀ).
inline SpectralField deformation(const SpectralField& u) {
  const auto grad = velocity_gradient(u);
  const int d = u.grid().dim;
  SpectralField out(u.grid(), Rank::sym_tensor);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      auto dst = out.entry(i, j);
      auto a = grad.entry(i, j), b = grad.entry(j, i);
      for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = 0.5 * (a[m] + b[m]);
    }
  return out;
}

/// Ω(u) = ½(∇u − ∇uᵀ), full tensor with (∇u)_ij = ∂_j u_i.
inline SpectralField rotation(const SpectralField& u) {
  const auto grad = velocity_gradient(u);
  const int d = u.grid().dim;
  SpectralField out(u.grid(), Rank::tensor);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      auto dst = out.entry(i, j);
      auto a = grad.entry(i, j), b = grad.entry(j, i);
      for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = 0.5 * (a[m] - b[m]);
    }
  return out;
}

namespace detail {

using Mat3 = double[3][3];

/// Pointwise Q = τΩ − Ωτ + b(Dτ + τD) from the velocity gradient G (G_ij = ∂_j u_i).
inline void q_pointwise(int d, const Mat3& G, const Mat3& T, double b, Mat3& Q) {
  Mat3 D, W;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      D[i][j] = 0.5 * (G[i][j] + G[j][i]);
      W[i][j] = 0.5 * (G[i][j] - G[j][i]);
    }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int l = 0; l < d; ++l) s += T[i][l] * W[l][j] - W[i][l] * T[l][j] + b * (D[i][l] * T[l][j] + T[i][l] * D[l][j]);
      Q[i][j] = s;
    }
}

inline void load_sym(const PhysicalField& f, std::size_t p, Mat3& T) {
  const int d = f.grid().dim;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) T[i][j] = T[j][i] = f.entry(i, j)[p];
}

inline void load_full(const PhysicalField& f, std::size_t p, Mat3& G) {
  const int d = f.grid().dim;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G[i][j] = f.entry(i, j)[p];
}

/// Physical-space ∂_a f for every axis a.
inline std::vector<PhysicalField> physical_partials(const SpectralField& f) {
  std::vector<PhysicalField> out;
  for (int a = 0; a < f.grid().dim; ++a) out.push_back(transform_backward(partial(f, a)));
  return out;
}

/// Adds Σ_j u_j ∂_j f pointwise into acc (same rank as f).
inline void accumulate_advection(const PhysicalField& u, const std::vector<PhysicalField>& df, PhysicalField& acc) {
  const int d = u.grid().dim;
  for (int c = 0; c < acc.components(); ++c) {
    auto dst = acc.component(c);
    for (int j = 0; j < d; ++j) {
      auto uj = u.component(j);
      auto dj = df[static_cast<std::size_t>(j)].component(c);
      for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += uj[p] * dj[p];
    }
  }
}

inline SpectralField forward_dealiased(const PhysicalField& f) {
  SpectralField out = transform_forward(f);
  dealias_in_place(out);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quadratic terms (pseudospectral, 2/3-dealiased output)
// ---------------------------------------------------------------------------

/// Q(τ, ∇u) = τΩ(u) − Ω(u)τ + b(D(u)τ + τD(u)).
inline SpectralField q_bilinear(const SpectralField& u, const SpectralField& tau, double b) {
  const Grid& g = u.grid();
  const int d = g.dim;
  const auto G = transform_backward(velocity_gradient(u));
  const auto T = transform_backward(tau);
  PhysicalField q(g, Rank::sym_tensor);
  detail::Mat3 Gm{}, Tm{}, Qm{};
  for (std::size_t p = 0; p < g.real_size(); ++p) {
    detail::load_full(G, p, Gm);
    detail::load_sym(T, p, Tm);
    detail::q_pointwise(d, Gm, Tm, b, Qm);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) q.entry(i, j)[p] = Qm[i][j];
  }
  return detail::forward_dealiased(q);
}

/// (u·∇)f for f of any rank.
inline SpectralField advect(const SpectralField& u, const SpectralField& f) {
  if (u.rank() != Rank::vector) throw std::invalid_argument("advect: vector velocity expected");
  const auto up = transform_backward(u);
  PhysicalField acc(f.grid(), f.rank());
  detail::accumulate_advection(up, detail::physical_partials(f), acc);
  return detail::forward_dealiased(acc);
}

/// P[−(u·∇)u + k div τ + νΔu].
inline SpectralField momentum_rhs(const SimState& s, const ModelParams& p) {
  SpectralField r = advect(s.u, s.u);
  r *= -1.0;
  r.axpy(p.k, divergence_tensor(s.tau));
  if (p.nu != 0.0) r.axpy(p.nu, laplacian(s.u));
  return leray_project(r);
}

/// Non-stiff part of the stress equation: −(u·∇)τ − Q(∇u, τ) + αD(u).
/// The stiff −ηΔτ + μτ part is left to the integrator.
inline SpectralField stress_rhs_explicit(const SimState& s, const ModelParams& p) {
  SpectralField r = advect(s.u, s.tau);
  r += q_bilinear(s.u, s.tau, p.b);
  r *= -1.0;
  r.axpy(p.alpha, deformation(s.u));
  return r;
}

/// Γ = curl u − k R̃τ (scalar in 2D, vector in 3D).
inline SpectralField gamma_quantity(const SimState& s, const ModelParams& p) {
  SpectralField w = curl(s.u);
  w.axpy(-p.k, riesz_tilde(s.tau));
  return w;
}

/// Explicit right-hand side shared by the time steppers.
struct ExplicitRhs {
  SpectralField du;
  SpectralField dtau;
};

/// Fused evaluation of the explicit terms with one set of transforms:
///   du   = P[−(u·∇)u + k div τ]          (viscosity excluded)
///   dtau = −(u·∇)τ − Q(∇u, τ) + αD(u)
inline ExplicitRhs explicit_rhs(const SimState& s, const ModelParams& p) {
  const Grid& g = s.grid();
  const int d = g.dim;
  const auto up = transform_backward(s.u);
  const auto G = transform_backward(velocity_gradient(s.u));
  const auto T = transform_backward(s.tau);
  const auto dT = detail::physical_partials(s.tau);

  PhysicalField adv_u(g, Rank::vector);
  for (int i = 0; i < d; ++i) {
    auto dst = adv_u.component(i);
    for (int j = 0; j < d; ++j) {
      auto uj = up.component(j);
      auto gij = G.entry(i, j);
      for (std::size_t q = 0; q < dst.size(); ++q) dst[q] -= uj[q] * gij[q];
    }
  }

  PhysicalField tau_src(g, Rank::sym_tensor);
  detail::accumulate_advection(up, dT, tau_src);
  detail::Mat3 Gm{}, Tm{}, Qm{};
  for (std::size_t q = 0; q < g.real_size(); ++q) {
    detail::load_full(G, q, Gm);
    detail::load_sym(T, q, Tm);
    detail::q_pointwise(d, Gm, Tm, p.b, Qm);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        auto e = tau_src.entry(i, j);
        e[q] = -(e[q] + Qm[i][j]);
      }
  }

  SpectralField du = detail::forward_dealiased(adv_u);
  du.axpy(p.k, divergence_tensor(s.tau));
  SpectralField dtau = detail::forward_dealiased(tau_src);
  dtau.axpy(p.alpha, deformation(s.u));
  dealias_in_place(du);
  dealias_in_place(dtau);
  return {leray_project(du), std::move(dtau)};
}

}  // namespace oldroyd
