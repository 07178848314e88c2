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
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "oldroyd/littlewood_paley.hpp"
#include "oldroyd/model.hpp"
#include "oldroyd/spectral.hpp"

namespace oldroyd::init {

enum class Family { frequency_bump, axisymmetric_scaled, random_divfree, single_mode };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::frequency_bump: return "frequency_bump";
    case Family::axisymmetric_scaled: return "axisymmetric_scaled";
    case Family::random_divfree: return "random_divfree";
    case Family::single_mode: return "single_mode";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "frequency_bump") return Family::frequency_bump;
  if (s == "axisymmetric_scaled") return Family::axisymmetric_scaled;
  if (s == "random_divfree") return Family::random_divfree;
  if (s == "single_mode") return Family::single_mode;
  throw std::invalid_argument("unknown data family '" + s + "'");
}

/// Initial-data recipe. Only the fields of the chosen family are read.
struct DataSpec {
  Family family = Family::random_divfree;
  double amplitude = 1e-2;
  std::uint64_t seed = 1;
  // random_divfree
  double tau_amplitude = -1.0;  ///< negative: same as amplitude
  double slope = 2.0;           ///< coefficient envelope |ξ|^{-slope}
  int kmax = 0;                 ///< 0: whole dealiased band
  // frequency_bump
  int bump_n = 3;
  double bump_radius = 2.0;  ///< outer radius of the frequency bump
  // axisymmetric_scaled
  double scale_k = 0.1;
  double width0 = 0.5;  ///< profile radius before the 1/k⁴ dilation
  // single_mode
  Wavevector mode{1, 0, 0};
};

/// Generated fields plus what the generator measured or clamped.
struct InitialData {
  SimState state;
  std::map<std::string, double> info;
};

namespace detail {

/// Spectral field from physical samples, Hermitian by construction.
template <class F>
SpectralField sample(const Grid& g, Rank r, F&& f) {
  PhysicalField p(g, r);
  const int nc = p.components();
  for_each_point(g, [&](std::size_t i, const std::array<double, 3>& x) {
    for (int c = 0; c < nc; ++c) p.component(c)[i] = f(c, x);
  });
  return transform_forward(p);
}

/// Restores exact Hermitian symmetry through a physical-space round trip.
inline SpectralField hermitize(const SpectralField& f) { return transform_forward(transform_backward(f)); }

inline void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

}  // namespace detail

/// Seeded Gaussian coefficients shaped by |ξ|^{-slope} inside the band
/// 1 <= |ξ_i| <= kmax, projected (u) or symmetric by storage (τ), then scaled
/// so that ‖u₀‖_{L²} = amplitude and ‖τ₀‖_{L²} = tau_amplitude.
inline InitialData make_random_divfree(const Grid& g, double amplitude, std::uint64_t seed, double slope, int kmax = 0,
                                       double tau_amplitude = -1.0) {
  validate(g);
  detail::require_finite_positive(amplitude, "amplitude");
  if (tau_amplitude < 0.0) tau_amplitude = amplitude;
  const int cut = kmax > 0 ? std::min(kmax, g.dealias_cutoff()) : g.dealias_cutoff();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_field = [&](Rank r) {
    SpectralField f(g, r);
    for (int c = 0; c < f.components(); ++c) {
      auto v = f.component(c);
      for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
        const double re = normal(rng), im = normal(rng);
        const double k2 = norm_sq(xi);
        bool inside = k2 > 0.0;
        for (int a = 0; a < g.dim; ++a) inside = inside && std::abs(xi[a]) <= cut;
        if (inside) v[m] = std::pow(k2, -0.5 * slope) * complex(re, im);
      });
    }
    return detail::hermitize(f);
  };
  SpectralField u = leray_project(random_field(Rank::vector));
  SpectralField tau = random_field(Rank::sym_tensor);
  dealias_in_place(u);
  dealias_in_place(tau);
  const double nu = l2_norm(u), nt = l2_norm(tau);
  if (nu == 0.0) throw std::invalid_argument("make_random_divfree: empty band (kmax too small)");
  u *= amplitude / nu;
  if (nt > 0.0) tau *= tau_amplitude / nt;
  InitialData d{SimState(0.0, std::move(u), std::move(tau)), {}};
  d.info["kmax"] = cut;
  return d;
}

/// Stress concentrated in a frequency bump centred at 2^N e, e = (1,1[,0]),
/// all components equal, scaled by amplitude/N; velocity a fixed smooth
/// divergence-free profile scaled by amplitude/N.
inline InitialData make_frequency_bump(const Grid& g, int N, double amplitude, double radius = 2.0) {
  validate(g);
  detail::require_finite_positive(amplitude, "amplitude");
  if (N < 1) throw std::invalid_argument("make_frequency_bump: N must be >= 1");
  detail::require_finite_positive(radius, "bump radius");
  const int centre = 1 << N;
  const int reach = centre + static_cast<int>(std::ceil(radius));
  if (3 * reach > g.n)
    throw std::invalid_argument("make_frequency_bump: shell N=" + std::to_string(N) +
                                " does not fit inside the dealiased band of n=" + std::to_string(g.n));
  const double scale = amplitude / N;
  // coefficient of e^{iξ·x} in the Fourier series, times n^d for the unnormalized layout
  const double nd = static_cast<double>(g.real_size());
  auto bump = [&](const Wavevector& xi, int sign) {
    const double dx = xi[0] - sign * centre, dy = xi[1] - sign * centre, dz = xi[2];
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    return lp::smooth_step((r - 0.5 * radius) / (0.5 * radius));
  };
  SpectralField tau(g, Rank::sym_tensor);
  for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
    const double w = bump(xi, +1) + bump(xi, -1);
    if (w == 0.0) return;
    for (int c = 0; c < tau.components(); ++c) tau.component(c)[m] = scale * nd * w;
  });
  tau = detail::hermitize(tau);
  SpectralField u = detail::sample(g, Rank::vector, [&](int c, const std::array<double, 3>& x) {
    if (g.dim == 2) return c == 0 ? std::sin(x[0]) * std::cos(x[1]) : -std::cos(x[0]) * std::sin(x[1]);
    // ABC flow
    return c == 0 ? std::sin(x[2]) + std::cos(x[1]) : c == 1 ? std::sin(x[0]) + std::cos(x[2]) : std::sin(x[1]) + std::cos(x[0]);
  });
  u *= scale;
  u = leray_project(u);
  InitialData d{SimState(0.0, std::move(u), std::move(tau)), {}};
  d.info["bump_centre"] = centre;
  d.info["bump_radius"] = radius;
  return d;
}

/// Swirl-free axisymmetric velocity about the x_dim axis through the box
/// centre, τ₀ = 0, ‖u₀‖_{L²} = eps0.
///
/// 2D: u = ∇^⊥ g(r). 3D: u = curl(g(r)(−y, x, 0)), a toroidal vector
/// potential whose curl is a poloidal vortex ring. g is the compactly
/// supported bump exp(−1/(1 − (r/R)²)). The dilation x ↦ k⁴x widens R to
/// width0/k⁴, capped so the support stays inside the box (R <= 0.45 L) and
/// floored at 4Δx; info["dilation"] records width0/R.
inline InitialData make_axisymmetric_scaled(const Grid& g, double k, double eps0, double width0 = 0.5) {
  validate(g);
  detail::require_finite_positive(eps0, "eps0");
  detail::require_finite_positive(width0, "width0");
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("make_axisymmetric_scaled: k must lie in (0, 1]");
  const double cap = 0.45 * Grid::length;
  const double R = std::max(std::min(width0 / std::pow(k, 4), cap), 4.0 * g.dx());
  const double c0 = 0.5 * Grid::length;
  auto profile = [&](double r) {
    const double s = r / R;
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
  };
  auto radius = [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += (x[a] - c0) * (x[a] - c0);
    return std::sqrt(r2);
  };
  SpectralField u(g, Rank::vector);
  if (g.dim == 2) {
    const SpectralField psi = detail::sample(g, Rank::scalar, [&](int, const std::array<double, 3>& x) { return profile(radius(x)); });
    const SpectralField grad = gradient(psi);
    for (std::size_t m = 0; m < g.spectral_size(); ++m) {
      u.component(0)[m] = grad.component(1)[m];
      u.component(1)[m] = -grad.component(0)[m];
    }
  } else {
    const SpectralField a = detail::sample(g, Rank::vector, [&](int c, const std::array<double, 3>& x) {
      const double gr = profile(radius(x));
      return c == 0 ? -gr * (x[1] - c0) : c == 1 ? gr * (x[0] - c0) : 0.0;
    });
    u = curl(a);
  }
  dealias_in_place(u);
  u = leray_project(u);
  const double nrm = l2_norm(u);
  if (nrm == 0.0) throw std::invalid_argument("make_axisymmetric_scaled: profile vanished on the grid");
  u *= eps0 / nrm;
  InitialData d{SimState(0.0, std::move(u), SpectralField(g, Rank::sym_tensor)), {}};
  d.info["radius"] = R;
  d.info["dilation"] = width0 / R;
  d.info["requested_dilation"] = std::pow(k, 4);
  return d;
}

/// u = amplitude · e cos(ξ·x) with e a unit vector ⟂ ξ; τ₀ = 0.
inline InitialData make_single_mode(const Grid& g, const Wavevector& xi, double amplitude) {
  validate(g);
  detail::require_finite_positive(amplitude, "amplitude");
  if (norm_sq(xi) == 0.0) throw std::invalid_argument("make_single_mode: xi must be nonzero");
  // transverse direction: rotate ξ in the (0,1) plane, or use e_2 × ξ in 3D
  std::array<double, 3> e{-double(xi[1]), double(xi[0]), 0.0};
  if (e[0] == 0.0 && e[1] == 0.0) e = {1.0, 0.0, 0.0};
  const double en = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  SpectralField u = detail::sample(g, Rank::vector, [&](int c, const std::array<double, 3>& x) {
    const double ph = xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2];
    return amplitude * e[static_cast<std::size_t>(c)] / en * std::cos(ph);
  });
  dealias_in_place(u);
  u = leray_project(u);
  return {SimState(0.0, std::move(u), SpectralField(g, Rank::sym_tensor)), {}};
}

/// Dispatches on d.family.
inline InitialData generate(const Grid& g, const DataSpec& d) {
  switch (d.family) {
    case Family::random_divfree:
      return make_random_divfree(g, d.amplitude, d.seed, d.slope, d.kmax, d.tau_amplitude);
    case Family::frequency_bump: return make_frequency_bump(g, d.bump_n, d.amplitude, d.bump_radius);
    case Family::axisymmetric_scaled: return make_axisymmetric_scaled(g, d.scale_k, d.amplitude, d.width0);
    case Family::single_mode: return make_single_mode(g, d.mode, d.amplitude);
  }
  throw std::invalid_argument("generate: unknown family");
}

/// ‖∇u₀‖_{H^{s−1}} + ‖τ₀‖_{H^s}, the smallness quantity for generic data.
inline double smallness_norm(const SimState& s, double hs) {
  const double grad_u = std::sqrt(std::max(0.0, weighted_inner(s.u, s.u, [hs](const Wavevector& xi) {
    const double k2 = norm_sq(xi);
    return k2 * std::pow(1.0 + k2, hs - 1.0);
  })));
  return grad_u + sobolev_norm(s.tau, hs);
}

}  // namespace oldroyd::init
