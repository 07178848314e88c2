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
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oldroyd/integrator.hpp"
#include "oldroyd/littlewood_paley.hpp"
#include "oldroyd/model.hpp"

namespace oldroyd::diag {

/// One row of a run's time series. Field order is the CSV column order.
struct TimeSeriesRecord {
  double t = 0.0;
  double l2_u = 0.0;
  double h1_u = 0.0;   ///< ‖∇u‖, equal to ‖curl u‖ for divergence-free u
  double hm1_u = 0.0;  ///< Ḣ⁻¹ over nonzero modes
  double l2_tau = 0.0;
  double h1_tau = 0.0;  ///< ‖∇τ‖
  double hs_tau = 0.0;  ///< inhomogeneous H^s, s from DiagnosticsConfig
  double l2_gamma = 0.0;
  double besov_u = 0.0;  ///< B^s_{p,1}, s and p from DiagnosticsConfig
  double energy = 0.0;   ///< ½‖u‖² + (k/2α)‖τ‖²
  double budget_residual = 0.0;  ///< E(t) − E(t₀) + ∫ dissipation, cumulative
};

inline const std::array<const char*, 11>& column_names() {
  static const std::array<const char*, 11> names = {"t",      "l2_u",   "h1_u",     "hm1_u",   "l2_tau",         "h1_tau",
                                                    "hs_tau", "l2_gamma", "besov_u", "energy", "budget_residual"};
  return names;
}

inline std::array<double, 11> as_array(const TimeSeriesRecord& r) {
  return {r.t, r.l2_u, r.h1_u, r.hm1_u, r.l2_tau, r.h1_tau, r.hs_tau, r.l2_gamma, r.besov_u, r.energy, r.budget_residual};
}

inline TimeSeriesRecord from_array(const std::array<double, 11>& a) {
  return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9], a[10]};
}

struct DiagnosticsConfig {
  double hs_s = 2.0;
  double besov_s = 1.0;
  double besov_p = 2.0;
};

/// Norms of one state. budget_residual is left at 0 (see budget_residual()).
inline TimeSeriesRecord snapshot(const SimState& s, const ModelParams& p, const DiagnosticsConfig& cfg,
                                 const lp::DyadicPartition& part) {
  TimeSeriesRecord r;
  r.t = s.t;
  r.l2_u = l2_norm(s.u);
  r.h1_u = homogeneous_norm(s.u, 1.0);
  r.hm1_u = homogeneous_norm(s.u, -1.0);
  r.l2_tau = l2_norm(s.tau);
  r.h1_tau = homogeneous_norm(s.tau, 1.0);
  r.hs_tau = sobolev_norm(s.tau, cfg.hs_s);
  r.l2_gamma = l2_norm(gamma_quantity(s, p));
  r.besov_u = lp::besov_norm(part, s.u, {cfg.besov_s, cfg.besov_p, 1.0, false});
  r.energy = energy(s, p);
  return r;
}

inline TimeSeriesRecord snapshot(const SimState& s, const ModelParams& p, const DiagnosticsConfig& cfg = {}) {
  return snapshot(s, p, cfg, lp::build_partition(s.grid()));
}

/// ν‖∇u‖² + (k/α)(η‖∇τ‖² + μ‖τ‖²) from a record's norms.
inline double dissipation_rate(const TimeSeriesRecord& r, const ModelParams& p) {
  double d = p.nu * r.h1_u * r.h1_u;
  if (p.alpha > 0.0) d += p.k / p.alpha * (p.eta * r.h1_tau * r.h1_tau + p.mu * r.l2_tau * r.l2_tau);
  return d;
}

/// ΔE + ∫ dissipation over [prev.t, next.t]. The integral is taken from
/// `dissipation_integral` when given, else by the trapezoid rule on the two
/// records. Exact conservation gives 0 for b = 0.
inline double budget_residual(const TimeSeriesRecord& prev, const TimeSeriesRecord& next, const ModelParams& p,
                              std::optional<double> dissipation_integral = std::nullopt) {
  if (!(next.t >= prev.t)) throw std::invalid_argument("budget_residual: records out of order");
  const double integral = dissipation_integral.value_or(0.5 * (next.t - prev.t) *
                                                        (dissipation_rate(prev, p) + dissipation_rate(next, p)));
  return next.energy - prev.energy + integral;
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

struct FitResult {
  double rate = 0.0;  ///< −slope (exponential) or the decay exponent (polynomial)
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;
};

/// Ordinary least squares y = a + b x with centered sums.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                                            double& r_squared) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: abscissae are all equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (intercept + slope * x[i]);
    ss_res += e * e;
  }
  r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return {intercept, slope};
}

/// Default window: the last 60% of the sampled time span.
inline std::pair<double, double> late_window(const std::vector<double>& t, double fraction = 0.6) {
  if (t.empty()) throw std::invalid_argument("late_window: empty series");
  const double t0 = t.front(), t1 = t.back();
  return {t1 - fraction * (t1 - t0), t1};
}

namespace detail {

template <class X>
FitResult log_fit(const std::vector<double>& t, const std::vector<double>& y, std::pair<double, double> window,
                  X&& abscissa) {
  if (t.size() != y.size()) throw std::invalid_argument("fit: t and value series differ in length");
  std::vector<double> xs, ls;
  const double eps = 1e-12 * std::max(1.0, std::abs(window.second));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.first - eps || t[i] > window.second + eps) continue;
    if (!(y[i] > 0.0)) throw std::invalid_argument("fit: non-positive value at t = " + std::to_string(t[i]));
    xs.push_back(abscissa(t[i]));
    ls.push_back(std::log(y[i]));
  }
  if (xs.size() < 8)
    throw std::invalid_argument("fit: window holds " + std::to_string(xs.size()) + " samples, need at least 8");
  FitResult f;
  const auto [a, slope] = linear_fit(xs, ls, f.r_squared);
  (void)a;
  f.rate = -slope;
  f.t_lo = window.first;
  f.t_hi = window.second;
  f.samples = static_cast<int>(xs.size());
  return f;
}

}  // namespace detail

/// Least-squares slope of log y against t; rate = −slope.
inline FitResult fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& y,
                                      std::pair<double, double> window) {
  return detail::log_fit(t, y, window, [](double s) { return s; });
}

/// Least-squares slope of log y against log(1+t); exponent = −slope.
inline FitResult fit_polynomial_rate(const std::vector<double>& t, const std::vector<double>& y,
                                     std::pair<double, double> window) {
  return detail::log_fit(t, y, window, [](double s) { return std::log1p(s); });
}

// ---------------------------------------------------------------------------
// State-difference diagnostics
// ---------------------------------------------------------------------------

/// State at time t, linearly interpolated between the bracketing stored
/// states (sorted by t). Throws when t lies outside the stored range.
inline SimState interpolate_state(const std::vector<SimState>& series, double t) {
  if (series.empty()) throw std::invalid_argument("interpolate_state: no stored states");
  const double eps = 1e-12 * std::max(1.0, std::abs(t));
  if (t < series.front().t - eps || t > series.back().t + eps)
    throw std::invalid_argument("interpolate_state: no stored state brackets t = " + std::to_string(t));
  auto it = std::lower_bound(series.begin(), series.end(), t - eps,
                             [](const SimState& s, double v) { return s.t < v; });
  if (it == series.end()) --it;
  if (std::abs(it->t - t) <= eps || it == series.begin()) return *it;
  const SimState& hi = *it;
  const SimState& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  SimState out = lo;
  out.t = t;
  out.u *= 1.0 - w;
  out.u.axpy(w, hi.u);
  out.tau *= 1.0 - w;
  out.tau.axpy(w, hi.tau);
  return out;
}

/// ‖u_a(t) − u_b(t)‖_{L²} from stored states.
inline double l2_gap(const std::vector<SimState>& a, const std::vector<SimState>& b, double t) {
  const SimState sa = interpolate_state(a, t);
  const SimState sb = interpolate_state(b, t);
  return l2_norm(sa.u - sb.u);
}

}  // namespace oldroyd::diag
