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
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "oldroyd/model.hpp"
#include "oldroyd/spectral.hpp"

namespace oldroyd {

/// rk2_if / rk4_if: Lawson integrating-factor Runge-Kutta. etd_rk4: Cox-Matthews
/// exponential time differencing, which also treats the stiff stress decay
/// exactly but weights the explicit forcing with φ-functions; it stays stable
/// at large k·|ξ|²·dt where the Lawson schemes do not.
enum class Scheme { rk2_if, rk4_if, etd_rk4 };

inline int scheme_order(Scheme s) { return s == Scheme::rk2_if ? 2 : 4; }

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::rk2_if: return "rk2_if";
    case Scheme::rk4_if: return "rk4_if";
    case Scheme::etd_rk4: return "etd_rk4";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "rk2_if") return Scheme::rk2_if;
  if (s == "rk4_if") return Scheme::rk4_if;
  if (s == "etd_rk4") return Scheme::etd_rk4;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected rk2_if, rk4_if or etd_rk4)");
}

struct StepperConfig {
  double dt_init = 1e-2;
  double cfl_safety = 0.4;
  double t_end = 1.0;
  Scheme scheme = Scheme::rk4_if;
  double snapshot_every = 0.1;
  /// Upper bound on the adaptive step.
  double dt_max = std::numeric_limits<double>::infinity();
  /// Use dt_init for every step instead of the CFL estimate.
  bool fixed_dt = false;
};

inline std::vector<std::string> check(const StepperConfig& c) {
  std::vector<std::string> errs;
  if (!(c.dt_init > 0.0)) errs.push_back("dt_init must be > 0");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) errs.push_back("cfl_safety must lie in (0, 1]");
  if (!(c.t_end >= 0.0)) errs.push_back("t_end must be >= 0");
  if (!(c.snapshot_every > 0.0)) errs.push_back("snapshot_every must be > 0");
  if (!(c.dt_max > 0.0)) errs.push_back("dt_max must be > 0");
  return errs;
}

/// Raised when a stage produces NaN/Inf. Carries the last finite state.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, SimState last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const SimState& last_good() const { return last_good_; }

 private:
  SimState last_good_;
};

/// Rate at which E = ½‖u‖² + (k/2α)‖τ‖² is dissipated:
/// ν‖∇u‖² + (k/α)(η‖∇τ‖² + μ‖τ‖²). The τ part is dropped when α = 0.
inline double dissipation_rate(const SimState& s, const ModelParams& p) {
  double r = 0.0;
  if (p.nu != 0.0) r += p.nu * std::pow(homogeneous_norm(s.u, 1.0), 2);
  if (p.alpha > 0.0 && p.k != 0.0) {
    const double w = p.k / p.alpha;
    r += w * (p.eta * std::pow(homogeneous_norm(s.tau, 1.0), 2) + p.mu * std::pow(l2_norm(s.tau), 2));
  }
  return r;
}

inline double energy(const SimState& s, const ModelParams& p) {
  double e = 0.5 * std::pow(l2_norm(s.u), 2);
  if (p.alpha > 0.0) e += 0.5 * p.k / p.alpha * std::pow(l2_norm(s.tau), 2);
  return e;
}

namespace detail {

inline bool all_finite(const SpectralField& f) {
  for (const auto& v : f.values())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

/// φ_1, φ_2, φ_3 of z (series near 0, closed form elsewhere).
inline void phi_functions(double z, double& p1, double& p2, double& p3) {
  if (std::abs(z) < 1.0) {
    // φ_k(z) = Σ_m z^m / (m+k)!
    double term1 = 1.0, term2 = 0.5, term3 = 1.0 / 6.0;
    p1 = p2 = p3 = 0.0;
    for (int m = 0; m < 30; ++m) {
      p1 += term1;
      p2 += term2;
      p3 += term3;
      term1 *= z / (m + 2);
      term2 *= z / (m + 3);
      term3 *= z / (m + 4);
    }
    return;
  }
  const double e = std::exp(z);
  p1 = std::expm1(z) / z;
  p2 = (e - 1.0 - z) / (z * z);
  p3 = (e - 1.0 - z - 0.5 * z * z) / (z * z * z);
}

/// Per-mode linear rates: L_u = −ν|ξ|², L_τ = −(η|ξ|² + μ).
struct LinearRates {
  std::vector<double> u, tau;
  LinearRates(const Grid& g, const ModelParams& p) : u(g.spectral_size()), tau(g.spectral_size()) {
    for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
      const double k2 = norm_sq(xi);
      u[m] = -p.nu * k2;
      tau[m] = -(p.eta * k2 + p.mu);
    });
  }
};

/// Per-mode precomputed multipliers (one value per mode).
inline std::vector<double> tabulate(const std::vector<double>& rates, const std::function<double(double)>& f) {
  std::vector<double> out(rates.size());
  for (std::size_t m = 0; m < rates.size(); ++m) out[m] = f(rates[m]);
  return out;
}

inline void mul(SpectralField& x, const std::vector<double>& w) {
  for (int c = 0; c < x.components(); ++c) {
    auto v = x.component(c);
    for (std::size_t m = 0; m < v.size(); ++m) v[m] *= w[m];
  }
}

inline SpectralField times(const SpectralField& x, const std::vector<double>& w) {
  SpectralField y = x;
  mul(y, w);
  return y;
}

/// Stage state X = (u, τ) with u re-projected. Packed storage keeps τ symmetric.
inline SimState make_stage(double t, SpectralField u, SpectralField tau) {
  return SimState(t, leray_project(u), std::move(tau));
}

}  // namespace detail

/// Per-step byproducts.
struct StepInfo {
  /// Stage quadrature of dissipation_rate over the step.
  double dissipation = 0.0;
};

/// Advances one step of size dt. Throws IntegrationError on NaN/Inf.
inline SimState step(const SimState& s, const ModelParams& p, double dt, Scheme scheme = Scheme::rk4_if,
                     StepInfo* info = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  const Grid& g = s.grid();
  const detail::LinearRates L(g, p);
  auto rhs = [&](const SimState& x) {
    ExplicitRhs r = [&] {
      try {
        return explicit_rhs(x, p);
      } catch (const std::domain_error& e) {
        throw IntegrationError(std::string("step: ") + e.what(), s);
      }
    }();
    if (!detail::all_finite(r.du) || !detail::all_finite(r.dtau))
      throw IntegrationError("step: non-finite value in stage at t = " + std::to_string(x.t), s);
    return r;
  };
  auto expo = [&](const std::vector<double>& rates, double h) {
    return detail::tabulate(rates, [h](double l) { return std::exp(l * h); });
  };
  const double t1 = s.t + dt;

  if (scheme == Scheme::rk2_if) {
    const auto Eu = expo(L.u, dt), Et = expo(L.tau, dt);
    const ExplicitRhs k1 = rhs(s);
    SimState x2 = detail::make_stage(t1, detail::times(SpectralField(s.u).axpy(dt, k1.du), Eu),
                                     detail::times(SpectralField(s.tau).axpy(dt, k1.dtau), Et));
    const ExplicitRhs k2 = rhs(x2);
    SpectralField u = detail::times(s.u, Eu), tau = detail::times(s.tau, Et);
    u.axpy(0.5 * dt, detail::times(k1.du, Eu)).axpy(0.5 * dt, k2.du);
    tau.axpy(0.5 * dt, detail::times(k1.dtau, Et)).axpy(0.5 * dt, k2.dtau);
    if (info) info->dissipation = 0.5 * dt * (dissipation_rate(s, p) + dissipation_rate(x2, p));
    SimState out = detail::make_stage(t1, std::move(u), std::move(tau));
    if (!detail::all_finite(out.u) || !detail::all_finite(out.tau)) throw IntegrationError("step: non-finite result", s);
    return out;
  }

  const auto Eu = expo(L.u, dt), Et = expo(L.tau, dt);
  const auto Hu = expo(L.u, 0.5 * dt), Ht = expo(L.tau, 0.5 * dt);
  const double th = s.t + 0.5 * dt;

  if (scheme == Scheme::rk4_if) {
    const ExplicitRhs k1 = rhs(s);
    SimState x2 = detail::make_stage(th, detail::times(SpectralField(s.u).axpy(0.5 * dt, k1.du), Hu),
                                     detail::times(SpectralField(s.tau).axpy(0.5 * dt, k1.dtau), Ht));
    const ExplicitRhs k2 = rhs(x2);
    SimState x3 = detail::make_stage(th, detail::times(s.u, Hu).axpy(0.5 * dt, k2.du),
                                     detail::times(s.tau, Ht).axpy(0.5 * dt, k2.dtau));
    const ExplicitRhs k3 = rhs(x3);
    SimState x4 = detail::make_stage(t1, detail::times(s.u, Eu).axpy(dt, detail::times(k3.du, Hu)),
                                     detail::times(s.tau, Et).axpy(dt, detail::times(k3.dtau, Ht)));
    const ExplicitRhs k4 = rhs(x4);
    SpectralField u = detail::times(s.u, Eu), tau = detail::times(s.tau, Et);
    SpectralField su = k2.du, st = k2.dtau;
    su += k3.du;
    st += k3.dtau;
    u.axpy(dt / 6.0, detail::times(k1.du, Eu)).axpy(dt / 3.0, detail::times(su, Hu)).axpy(dt / 6.0, k4.du);
    tau.axpy(dt / 6.0, detail::times(k1.dtau, Et)).axpy(dt / 3.0, detail::times(st, Ht)).axpy(dt / 6.0, k4.dtau);
    if (info)
      info->dissipation = dt / 6.0 *
                          (dissipation_rate(s, p) + 2.0 * dissipation_rate(x2, p) + 2.0 * dissipation_rate(x3, p) +
                           dissipation_rate(x4, p));
    SimState out = detail::make_stage(t1, std::move(u), std::move(tau));
    if (!detail::all_finite(out.u) || !detail::all_finite(out.tau)) throw IntegrationError("step: non-finite result", s);
    return out;
  }

  // ETDRK4 (Cox & Matthews)
  struct Coef {
    std::vector<double> q, b1, b2, b4;
  };
  auto coefficients = [&](const std::vector<double>& rates) {
    Coef c{std::vector<double>(rates.size()), std::vector<double>(rates.size()), std::vector<double>(rates.size()),
           std::vector<double>(rates.size())};
    for (std::size_t m = 0; m < rates.size(); ++m) {
      double p1, p2, p3, h1, h2, h3;
      detail::phi_functions(rates[m] * dt, p1, p2, p3);
      detail::phi_functions(0.5 * rates[m] * dt, h1, h2, h3);
      c.q[m] = 0.5 * dt * h1;
      c.b1[m] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
      c.b2[m] = dt * (2.0 * p2 - 4.0 * p3);
      c.b4[m] = dt * (4.0 * p3 - p2);
    }
    return c;
  };
  const Coef cu = coefficients(L.u), ct = coefficients(L.tau);
  const ExplicitRhs n0 = rhs(s);
  SimState a = detail::make_stage(th, detail::times(s.u, Hu).axpy(1.0, detail::times(n0.du, cu.q)),
                                  detail::times(s.tau, Ht).axpy(1.0, detail::times(n0.dtau, ct.q)));
  const ExplicitRhs na = rhs(a);
  SimState b = detail::make_stage(th, detail::times(s.u, Hu).axpy(1.0, detail::times(na.du, cu.q)),
                                  detail::times(s.tau, Ht).axpy(1.0, detail::times(na.dtau, ct.q)));
  const ExplicitRhs nb = rhs(b);
  SpectralField fu = nb.du, ft = nb.dtau;
  fu *= 2.0;
  ft *= 2.0;
  fu -= n0.du;
  ft -= n0.dtau;
  SimState c = detail::make_stage(t1, detail::times(a.u, Hu).axpy(1.0, detail::times(fu, cu.q)),
                                  detail::times(a.tau, Ht).axpy(1.0, detail::times(ft, ct.q)));
  const ExplicitRhs nc = rhs(c);
  SpectralField u = detail::times(s.u, Eu), tau = detail::times(s.tau, Et);
  SpectralField su = na.du, st = na.dtau;
  su += nb.du;
  st += nb.dtau;
  u += detail::times(n0.du, cu.b1);
  u += detail::times(su, cu.b2);
  u += detail::times(nc.du, cu.b4);
  tau += detail::times(n0.dtau, ct.b1);
  tau += detail::times(st, ct.b2);
  tau += detail::times(nc.dtau, ct.b4);
  if (info)
    info->dissipation = dt / 6.0 *
                        (dissipation_rate(s, p) + 2.0 * dissipation_rate(a, p) + 2.0 * dissipation_rate(b, p) +
                         dissipation_rate(c, p));
  SimState out = detail::make_stage(t1, std::move(u), std::move(tau));
  if (!detail::all_finite(out.u) || !detail::all_finite(out.tau)) throw IntegrationError("step: non-finite result", s);
  return out;
}

/// safety · min(Δx/‖u‖∞, 1/(k‖∇τ‖∞^{1/2} + 1)), capped by dt_max.
/// A state with u = 0 and τ = 0 gets dt_init.
inline double cfl_dt(const SimState& s, const ModelParams& p, const StepperConfig& cfg) {
  const double umax = max_abs(transform_backward(s.u));
  double grad_tau = 0.0;
  {
    const Grid& g = s.grid();
    std::vector<PhysicalField> parts;
    for (int a = 0; a < g.dim; ++a) parts.push_back(transform_backward(partial(s.tau, a)));
    for (std::size_t q = 0; q < g.real_size(); ++q) {
      double acc = 0.0;
      for (const auto& f : parts) {
        const double m = point_magnitude(f, q);
        acc += m * m;
      }
      grad_tau = std::max(grad_tau, std::sqrt(acc));
    }
  }
  if (umax == 0.0 && grad_tau == 0.0 && l2_norm(s.tau) == 0.0) return std::min(cfg.dt_init, cfg.dt_max);
  const double adv = umax > 0.0 ? s.grid().dx() / umax : std::numeric_limits<double>::infinity();
  const double coupling = 1.0 / (p.k * std::sqrt(grad_tau) + 1.0);
  return std::min(cfg.dt_max, cfg.cfl_safety * std::min(adv, coupling));
}

/// Progress handed to snapshot sinks with each state.
struct RunInfo {
  /// ∫ dissipation_rate dt from the start of the run to this snapshot.
  double dissipation = 0.0;
  long steps = 0;
  double last_dt = 0.0;
};

using SnapshotSink = std::function<void(const SimState&, const RunInfo&)>;

/// Advances to cfg.t_end, calling sink at t0, every snapshot_every, and at
/// t_end. Adaptive steps are clipped to land on snapshot times; with
/// fixed_dt the step count is fixed up front and snapshots fall on the
/// nearest step, so the dt sequence does not depend on the cadence.
inline SimState run_until(SimState state, const ModelParams& p, const StepperConfig& cfg, const SnapshotSink& sink) {
  validate(p);
  {
    const auto errs = check(cfg);
    if (!errs.empty()) throw std::invalid_argument("stepper config: " + errs.front());
  }
  RunInfo info;
  const double t0 = state.t;
  if (sink) sink(state, info);
  if (cfg.t_end <= t0) return state;
  double last_snap = t0;

  if (cfg.fixed_dt) {
    const double dt = cfg.dt_init;
    const long nsteps = std::max(1L, std::lround((cfg.t_end - t0) / dt));
    const long every = std::max(1L, std::lround(cfg.snapshot_every / dt));
    for (long i = 1; i <= nsteps; ++i) {
      StepInfo si;
      state = step(state, p, dt, cfg.scheme, &si);
      state.t = t0 + static_cast<double>(i) * dt;
      info.dissipation += si.dissipation;
      info.steps = i;
      info.last_dt = dt;
      if (sink && (i % every == 0 || i == nsteps)) sink(state, info);
    }
    return state;
  }

  double next_snap = t0 + cfg.snapshot_every;
  const double eps = 1e-12 * std::max(1.0, std::abs(cfg.t_end));
  while (state.t < cfg.t_end - eps) {
    double dt = cfl_dt(state, p, cfg);
    const double target = std::min(next_snap, cfg.t_end);
    bool hit = false;
    if (state.t + dt >= target - eps) {
      dt = target - state.t;
      hit = true;
    }
    StepInfo si;
    state = step(state, p, dt, cfg.scheme, &si);
    if (hit) state.t = target;
    info.dissipation += si.dissipation;
    ++info.steps;
    info.last_dt = dt;
    if (hit) {
      if (sink) sink(state, info);
      last_snap = state.t;
      if (target >= next_snap - eps) next_snap += cfg.snapshot_every;
    }
  }
  if (sink && last_snap < state.t) sink(state, info);
  return state;
}

}  // namespace oldroyd
