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
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "oldroyd/diagnostics.hpp"
#include "oldroyd/initial_data.hpp"
#include "oldroyd/integrator.hpp"
#include "oldroyd/io.hpp"
#include "oldroyd/linear_oracle.hpp"

namespace oldroyd::experiments {

using nlohmann::json;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"small_k_decay", "moderate_k_decay", "k_continuity", "k_to_zero_jump",
                                              "k_sweep"};
  return names;
}

struct Thresholds {
  double rate_fraction = 0.125;  ///< fitted rate must reach this multiple of k
  double r2_min = 0.98;
  double ratio_lo = 1.6;  ///< bounds on G(δ)/G(δ/2)
  double ratio_hi = 2.4;
  double drift_tol = 1e-6;       ///< relative ‖u‖ drift allowed for k = 0
  double gap_tolerance = 0.05;   ///< relative slack on the ½‖u₀‖ gap
  double zero_rate_tol = 1e-4;   ///< |fitted u-rate| allowed for k = 0
  double top_shell_limit = 0.01; ///< energy fraction in the top shell that flags under-resolution
};

struct Scenario {
  std::string name = "small_k_decay";
  Grid grid{2, 128};
  ModelParams params;
  std::vector<double> k_values;  ///< empty: per-scenario default
  std::vector<double> deltas;    ///< k_continuity only
  init::DataSpec data;
  StepperConfig stepper;
  diag::DiagnosticsConfig diagnostics;
  Thresholds thresholds;
  double window_fraction = 0.6;
  double horizon_factor = 8.0;  ///< t_end = horizon_factor / k where the scenario scales with k
  double t_cap = 400.0;
  double t_min = 0.0;
  int min_samples = 40;          ///< snapshot cadence is refined to give at least this many
  double threshold_ratio = 1.0;  ///< k_to_zero_jump: threshold as a fraction of ‖u₀‖
  int confirm_3d_n = 0;          ///< k_to_zero_jump: extra 3D run at this n; 0 skips it
  std::string output;            ///< root for run directories; empty writes nothing
  std::string config_echo;       ///< copied into every run directory
};

/// Presets matching the desk-scale defaults of each scenario.
inline Scenario default_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.stepper.scheme = Scheme::etd_rk4;
  s.stepper.dt_max = 0.5;
  s.stepper.snapshot_every = 0.5;
  s.data.family = init::Family::random_divfree;
  s.data.amplitude = 1e-3;
  s.data.kmax = 8;
  s.data.seed = 7;
  if (name == "small_k_decay") {
    s.k_values = {0.02, 0.05, 0.1};
  } else if (name == "moderate_k_decay") {
    s.grid = {2, 64};
    s.k_values = {1.0, 2.0, 5.0};
    s.data.amplitude = 1e-2;
    s.t_min = 40.0;
    s.t_cap = 40.0;
    s.stepper.dt_max = 0.1;
  } else if (name == "k_continuity") {
    s.grid = {2, 64};
    s.params.k = 0.5;
    s.deltas = {0.2, 0.1, 0.05, 0.025};
    s.data.amplitude = 5e-2;
    s.stepper.fixed_dt = true;
    s.stepper.dt_init = 0.05;
    s.stepper.t_end = 20.0;
  } else if (name == "k_to_zero_jump") {
    s.k_values = {0.1, 0.05, 0.025};
    s.data.family = init::Family::axisymmetric_scaled;
    s.data.amplitude = 1e-2;
    s.confirm_3d_n = 32;
  } else if (name == "k_sweep") {
    s.grid = {2, 32};
    s.k_values = {0.0};
    for (int i = 0; i < 12; ++i) s.k_values.push_back(0.01 * std::pow(1000.0, i / 11.0));
    s.t_min = 20.0;
    s.t_cap = 200.0;
    s.stepper.dt_max = 0.1;
  } else {
    throw std::invalid_argument("unknown scenario '" + name + "'");
  }
  return s;
}

/// Every violated constraint, one message each.
inline std::vector<std::string> check(const Scenario& s) {
  std::vector<std::string> errs;
  if (std::find(scenario_names().begin(), scenario_names().end(), s.name) == scenario_names().end())
    errs.push_back("unknown scenario '" + s.name + "'");
  for (double k : s.k_values)
    if (!(k >= 0.0 && k <= 10.0)) errs.push_back("k value " + io::format_double(k) + " outside the coupling range [0,10]");
  for (double d : s.deltas) {
    if (!(d > 0.0)) errs.push_back("delta values must be > 0");
    if (!(s.params.k + d <= 10.0)) errs.push_back("k + delta exceeds the coupling range [0,10]");
  }
  if (!(s.window_fraction > 0.0 && s.window_fraction <= 1.0)) errs.push_back("window_fraction must lie in (0,1]");
  if (!(s.horizon_factor > 0.0)) errs.push_back("horizon_factor must be > 0");
  if (!(s.t_cap > 0.0) || s.t_min > s.t_cap) errs.push_back("need 0 < t_cap and t_min <= t_cap");
  if (!(s.threshold_ratio > 0.0 && s.threshold_ratio < 2.0)) errs.push_back("threshold_ratio must lie in (0,2)");
  if (s.min_samples < 8) errs.push_back("min_samples must be >= 8");
  for (auto& e : oldroyd::check(s.params)) errs.push_back(e);
  for (auto& e : oldroyd::check(s.stepper)) errs.push_back(e);
  return errs;
}

// --- results --------------------------------------------------------------

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string scenario;
  std::vector<Check> checks;
  json table = json::array();
  json notes = json::object();

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  json to_json() const {
    json j;
    j["scenario"] = scenario;
    j["passed"] = passed();
    j["criteria"] = json::array();
    for (const auto& c : checks) j["criteria"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["table"] = table;
    j["notes"] = notes;
    return j;
  }
};

/// One integrated trajectory.
struct Trajectory {
  std::string label;
  ModelParams params;
  std::vector<diag::TimeSeriesRecord> series;
  std::vector<SimState> kept;  ///< every snapshot state when requested
  std::optional<SimState> final_state;
  double top_shell_fraction = 0.0;  ///< max over snapshots, velocity energy in block j_max
  std::string error;                ///< non-empty when the run stopped early
  std::filesystem::path dir;

  bool ok() const { return error.empty(); }

  std::vector<double> column(double diag::TimeSeriesRecord::*m) const {
    std::vector<double> v;
    for (const auto& r : series) v.push_back(r.*m);
    return v;
  }
  std::vector<double> times() const { return column(&diag::TimeSeriesRecord::t); }
};

/// Worker count: $OLDROYD_THREADS when set to a positive integer, else the
/// hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("OLDROYD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs jobs[i]() for every i on a pool of thread_count() workers.
/// Exceptions are rethrown after all workers finish (the first one wins).
template <class Job>
void run_pool(std::vector<Job>& jobs) {
  const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs.size());
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

inline double top_shell_fraction(const lp::DyadicPartition& part, const SpectralField& u) {
  const double total = inner(u, u);
  if (total == 0.0) return 0.0;
  const SpectralField top = lp::block_project(part, u, part.j_max());
  return inner(top, top) / total;
}

inline json fit_json(const diag::FitResult& f) {
  return {{"rate", f.rate}, {"r_squared", f.r_squared}, {"window", {f.t_lo, f.t_hi}}, {"samples", f.samples}};
}

}  // namespace detail

/// Integrates one trajectory, recording a TimeSeriesRecord per snapshot with
/// budget_residual = E(t) − E(0) + ∫ dissipation. With a non-empty output
/// root the run gets its own directory holding config.ini, series.csv and
/// final.ckpt.
inline Trajectory simulate(const std::string& label, const SimState& initial, const ModelParams& p,
                           const StepperConfig& cfg, const diag::DiagnosticsConfig& dcfg, bool keep_states,
                           const Scenario* outputs = nullptr) {
  Trajectory tr;
  tr.label = label;
  tr.params = p;
  const auto part = lp::build_partition(initial.grid());
  const double e0 = energy(initial, p);
  try {
    SimState last = run_until(initial, p, cfg, [&](const SimState& s, const RunInfo& info) {
      auto rec = diag::snapshot(s, p, dcfg, part);
      rec.budget_residual = rec.energy - e0 + info.dissipation;
      tr.series.push_back(rec);
      tr.top_shell_fraction = std::max(tr.top_shell_fraction, detail::top_shell_fraction(part, s.u));
      if (keep_states) tr.kept.push_back(s);
    });
    tr.final_state = std::move(last);
  } catch (const IntegrationError& e) {
    tr.error = e.what();
    tr.final_state = e.last_good();
  }
  if (outputs && !outputs->output.empty()) {
    tr.dir = io::create_run_dir(outputs->output, label);
    io::write_text(tr.dir / "config.ini", outputs->config_echo);
    io::emit_series(tr.series, tr.dir / "series.csv");
    if (tr.final_state) io::write_checkpoint(*tr.final_state, p, tr.dir / "final.ckpt");
  }
  return tr;
}

inline StepperConfig with_horizon(StepperConfig c, double t_end, int min_samples) {
  c.t_end = t_end;
  c.snapshot_every = std::min(c.snapshot_every, t_end / min_samples);
  if (c.fixed_dt) c.snapshot_every = std::max(c.snapshot_every, c.dt_init);
  return c;
}

inline std::string label_for(const std::string& prefix, double k) { return prefix + "_k" + io::format_short(k); }

inline void write_fit(const Trajectory& tr, const json& fit) {
  if (!tr.dir.empty()) io::write_text(tr.dir / "fit.json", fit.dump(2) + "\n");
}

// --- scenarios ------------------------------------------------------------

/// Small-k exponential decay of q = ‖∇u‖ + k‖τ‖ for common small data.
inline Report run_small_k_decay(const Scenario& sc) {
  Report rep;
  rep.scenario = sc.name;
  const auto data = init::generate(sc.grid, sc.data);
  rep.notes["smallness_norm_hs"] = init::smallness_norm(data.state, sc.diagnostics.hs_s);
  rep.notes["l2_u0"] = l2_norm(data.state.u);
  std::vector<double> ks = sc.k_values;
  std::sort(ks.begin(), ks.end());
  std::vector<Trajectory> runs(ks.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < ks.size(); ++i)
    jobs.push_back([&, i] {
      ModelParams p = sc.params;
      p.k = ks[i];
      const double horizon = ks[i] > 0.0 ? std::min(sc.t_cap, std::max(sc.t_min, sc.horizon_factor / ks[i])) : sc.t_cap;
      runs[i] = simulate(label_for(sc.name, ks[i]), data.state, p, with_horizon(sc.stepper, horizon, sc.min_samples),
                         sc.diagnostics, false, &sc);
    });
  run_pool(jobs);

  const double xi_max = std::sqrt(static_cast<double>(sc.grid.dim)) * sc.grid.dealias_cutoff();
  std::vector<double> rates;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const Trajectory& tr = runs[i];
    const double k = ks[i];
    const std::string tag = "k=" + io::format_short(k);
    if (!tr.ok()) {
      rep.checks.push_back({"decay " + tag, false, "integration failed: " + tr.error});
      rates.push_back(std::nan(""));
      continue;
    }
    const auto t = tr.times();
    std::vector<double> q;
    for (const auto& r : tr.series) q.push_back(r.h1_u + k * r.l2_tau);
    const auto window = diag::late_window(t, sc.window_fraction);
    const auto fit = diag::fit_exponential_rate(t, q, window);
    ModelParams p = sc.params;
    p.k = k;
    const double oracle = k > 0.0 ? linear::slowest_decay_rate(p, xi_max, sc.grid.dim) : 0.0;
    rates.push_back(fit.rate);
    bool monotone = true;
    for (std::size_t s = 1; s < t.size(); ++s)
      if (t[s - 1] >= window.first && q[s] >= q[s - 1]) monotone = false;
    const bool rate_ok = fit.rate >= sc.thresholds.rate_fraction * k && fit.r_squared >= sc.thresholds.r2_min;
    rep.checks.push_back({"decay rate " + tag, rate_ok,
                          "rate " + io::format_double(fit.rate) + " vs floor " +
                              io::format_double(sc.thresholds.rate_fraction * k) + ", r2 " +
                              io::format_double(fit.r_squared)});
    rep.checks.push_back({"late-window monotone " + tag, monotone, monotone ? "q decreasing" : "q increased"});
    json row = {{"k", k},           {"rate", fit.rate},  {"r_squared", fit.r_squared}, {"k_over_4", k / 4},
                {"k_over_2", k / 2}, {"oracle_rate", oracle}, {"t_end", t.back()}};
    rep.table.push_back(row);
    write_fit(tr, {{"quantity", "h1_u + k*l2_tau"}, {"exponential", detail::fit_json(fit)}, {"oracle_rate", oracle}});
  }
  bool increasing = true;
  for (std::size_t i = 1; i < rates.size(); ++i)
    if (!(rates[i] > rates[i - 1])) increasing = false;
  rep.checks.push_back({"rate increasing in k", increasing, ""});
  return rep;
}

/// Moderate-k runs: exponential and polynomial fits side by side. Report only;
/// the single gated property is that every run finishes.
inline Report run_moderate_k_decay(const Scenario& sc) {
  Report rep;
  rep.scenario = sc.name;
  const auto data = init::generate(sc.grid, sc.data);
  std::vector<Trajectory> runs(sc.k_values.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < sc.k_values.size(); ++i)
    jobs.push_back([&, i] {
      ModelParams p = sc.params;
      p.k = sc.k_values[i];
      const double horizon = std::min(sc.t_cap, std::max(sc.t_min, sc.horizon_factor / std::max(p.k, 1e-300)));
      runs[i] = simulate(label_for(sc.name, p.k), data.state, p, with_horizon(sc.stepper, horizon, sc.min_samples),
                         sc.diagnostics, false, &sc);
    });
  run_pool(jobs);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& tr = runs[i];
    const double k = sc.k_values[i];
    rep.checks.push_back({"finished k=" + io::format_short(k), tr.ok(), tr.error});
    if (!tr.ok()) continue;
    const auto t = tr.times();
    std::vector<double> q;
    for (const auto& r : tr.series) q.push_back(r.hs_tau + r.h1_u);
    const auto window = diag::late_window(t, sc.window_fraction);
    json row = {{"k", k}};
    try {
      const auto fe = diag::fit_exponential_rate(t, q, window);
      const auto fp = diag::fit_polynomial_rate(t, q, window);
      row["exponential"] = detail::fit_json(fe);
      row["polynomial"] = detail::fit_json(fp);
      row["better_fit"] = fe.r_squared >= fp.r_squared ? "exponential" : "polynomial";
    } catch (const std::exception& e) {
      row["fit_error"] = e.what();
    }
    write_fit(tr, row);
    rep.table.push_back(row);
  }
  return rep;
}

/// G(δ) = sup_t ‖u^k − u^{k+δ}‖ + ‖τ^k − τ^{k+δ}‖ with a shared dt sequence.
inline Report run_k_continuity(const Scenario& sc) {
  Report rep;
  rep.scenario = sc.name;
  const auto data = init::generate(sc.grid, sc.data);
  StepperConfig cfg = sc.stepper;
  cfg.fixed_dt = true;
  cfg = with_horizon(cfg, cfg.t_end, sc.min_samples);
  std::vector<double> deltas = sc.deltas;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  std::vector<Trajectory> runs(deltas.size() + 1);
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i <= deltas.size(); ++i)
    jobs.push_back([&, i] {
      ModelParams p = sc.params;
      if (i > 0) p.k += deltas[i - 1];
      runs[i] = simulate(label_for(sc.name, p.k), data.state, p, cfg, sc.diagnostics, true, &sc);
    });
  run_pool(jobs);
  for (const auto& tr : runs)
    if (!tr.ok()) {
      rep.checks.push_back({"finished " + tr.label, false, tr.error});
      return rep;
    }
  std::vector<double> G;
  const auto& base = runs[0].kept;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const auto& other = runs[i].kept;
    if (other.size() != base.size()) throw std::logic_error("k_continuity: snapshot counts differ");
    double g = 0.0;
    for (std::size_t s = 0; s < base.size(); ++s)
      g = std::max(g, l2_norm(base[s].u - other[s].u) + l2_norm(base[s].tau - other[s].tau));
    G.push_back(g);
    rep.table.push_back({{"delta", deltas[i - 1]}, {"G", g}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < G.size(); ++i)
    if (!(G[i] < G[i - 1])) decreasing = false;
  rep.checks.push_back({"G strictly decreasing in delta", decreasing, ""});
  for (std::size_t i = 1; i < G.size(); ++i) {
    const double ratio = G[i - 1] / G[i];
    rep.table[i]["ratio_to_previous"] = ratio;
    const bool ok = ratio >= sc.thresholds.ratio_lo && ratio <= sc.thresholds.ratio_hi;
    rep.checks.push_back({"G(" + io::format_short(deltas[i - 1]) + ")/G(" + io::format_short(deltas[i]) + ")", ok,
                          io::format_double(ratio)});
  }
  return rep;
}

namespace detail {

struct JumpOutcome {
  json row;
  std::vector<Check> checks;
};

inline JumpOutcome jump_pair(const Scenario& sc, const Grid& grid, double k, const std::string& prefix) {
  const auto data = init::make_axisymmetric_scaled(grid, k, sc.data.amplitude, sc.data.width0);
  const double u0 = l2_norm(data.state.u);
  const double threshold = sc.threshold_ratio * u0;
  const double t_star = sc.horizon_factor / k * std::log(2.0 * u0 / threshold);
  const StepperConfig cfg = with_horizon(sc.stepper, t_star, sc.min_samples);
  ModelParams pk = sc.params, p0 = sc.params;
  pk.k = k;
  p0.k = 0.0;
  Trajectory a, b;
  std::vector<std::function<void()>> jobs{
      [&] { b = simulate(label_for(prefix + "_euler_for", k), data.state, p0, cfg, sc.diagnostics, false, &sc); },
      [&] { a = simulate(label_for(prefix, k), data.state, pk, cfg, sc.diagnostics, false, &sc); }};
  run_pool(jobs);

  JumpOutcome out;
  const std::string tag = " k=" + io::format_short(k) + (grid.dim == 3 ? " (3D)" : "");
  if (!a.ok() || !b.ok()) {
    out.checks.push_back({"finished" + tag, false, a.ok() ? b.error : a.error});
    return out;
  }
  double drift = 0.0;
  for (const auto& r : b.series) drift = std::max(drift, std::abs(r.l2_u / u0 - 1.0));
  const double uk = a.series.back().l2_u;
  const double gap = diag::l2_gap({*a.final_state}, {*b.final_state}, a.final_state->t);
  const double need = 0.5 * u0 * (1.0 - sc.thresholds.gap_tolerance);
  out.checks.push_back({"euler drift" + tag, drift <= sc.thresholds.drift_tol, io::format_double(drift)});
  out.checks.push_back({"decayed below half" + tag, uk <= 0.5 * u0,
                        io::format_double(uk / u0) + " of the initial norm"});
  out.checks.push_back({"gap" + tag, gap >= need, io::format_double(gap) + " vs " + io::format_double(need)});
  const bool resolved = b.top_shell_fraction <= sc.thresholds.top_shell_limit;
  out.checks.push_back({"euler resolved" + tag, resolved, "top-shell fraction " + io::format_double(b.top_shell_fraction)});
  out.row = {{"k", k},           {"dim", grid.dim},  {"n", grid.n},          {"t_star", t_star},
             {"l2_u0", u0},      {"l2_uk", uk},      {"gap", gap},           {"half_u0", 0.5 * u0},
             {"euler_drift", drift}, {"dilation", data.info.at("dilation")}, {"radius", data.info.at("radius")}};
  return out;
}

}  // namespace detail

/// Paired k > 0 and k = 0 runs from the axisymmetric family, compared at
/// t*(k) = (horizon_factor/k)·ln(2‖u₀‖/threshold).
inline Report run_k_to_zero_jump(const Scenario& sc) {
  Report rep;
  rep.scenario = sc.name;
  for (double k : sc.k_values) {
    if (!(k > 0.0)) throw std::invalid_argument("k_to_zero_jump needs k > 0");
    auto o = detail::jump_pair(sc, sc.grid, k, sc.name);
    rep.checks.insert(rep.checks.end(), o.checks.begin(), o.checks.end());
    rep.table.push_back(o.row);
  }
  if (sc.confirm_3d_n > 0 && !sc.k_values.empty()) {
    const double k = *std::max_element(sc.k_values.begin(), sc.k_values.end());
    auto o = detail::jump_pair(sc, Grid{3, sc.confirm_3d_n}, k, sc.name + "_3d");
    rep.checks.insert(rep.checks.end(), o.checks.begin(), o.checks.end());
    rep.table.push_back(o.row);
  }
  return rep;
}

/// Rates across a k grid including k = 0. Gated: the k = 0 velocity norm does
/// not decay and every k > 0 decays.
inline Report run_k_sweep(const Scenario& sc) {
  Report rep;
  rep.scenario = sc.name;
  const auto data = init::generate(sc.grid, sc.data);
  std::vector<double> ks = sc.k_values;
  std::sort(ks.begin(), ks.end());
  std::vector<Trajectory> runs(ks.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < ks.size(); ++i)
    jobs.push_back([&, i] {
      ModelParams p = sc.params;
      p.k = ks[i];
      const double horizon = p.k > 0.0 ? std::min(sc.t_cap, std::max(sc.t_min, sc.horizon_factor / p.k)) : sc.t_cap;
      runs[i] = simulate(label_for(sc.name, p.k), data.state, p, with_horizon(sc.stepper, horizon, sc.min_samples),
                         sc.diagnostics, false, &sc);
    });
  run_pool(jobs);
  double rate_at_zero = std::nan(""), smallest_positive_rate = std::nan("");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto& tr = runs[i];
    const double k = ks[i];
    const std::string tag = "k=" + io::format_short(k);
    if (!tr.ok()) {
      rep.checks.push_back({"finished " + tag, false, tr.error});
      continue;
    }
    const auto t = tr.times();
    const auto window = diag::late_window(t, sc.window_fraction);
    const auto fu = diag::fit_exponential_rate(t, tr.column(&diag::TimeSeriesRecord::l2_u), window);
    const auto fp = diag::fit_polynomial_rate(t, tr.column(&diag::TimeSeriesRecord::l2_u), window);
    json row = {{"k", k},
                {"exp_rate", fu.rate},
                {"exp_r_squared", fu.r_squared},
                {"poly_exponent", fp.rate},
                {"poly_r_squared", fp.r_squared},
                {"better_fit", fu.r_squared >= fp.r_squared ? "exponential" : "polynomial"},
                {"final_energy", tr.series.back().energy},
                {"t_end", t.back()}};
    rep.table.push_back(row);
    write_fit(tr, row);
    if (k == 0.0) {
      rate_at_zero = fu.rate;
      rep.checks.push_back({"no decay at k=0", std::abs(fu.rate) <= sc.thresholds.zero_rate_tol, io::format_double(fu.rate)});
    } else {
      if (std::isnan(smallest_positive_rate)) smallest_positive_rate = fu.rate;
      rep.checks.push_back({"decay at " + tag, fu.rate > 0.0, io::format_double(fu.rate)});
    }
  }
  rep.notes["rate_at_zero"] = rate_at_zero;
  rep.notes["rate_at_smallest_positive_k"] = smallest_positive_rate;
  return rep;
}

/// Dispatches on sc.name after validating the scenario.
inline Report run(const Scenario& sc) {
  const auto errs = check(sc);
  if (!errs.empty()) throw std::invalid_argument("scenario: " + errs.front());
  if (sc.name == "small_k_decay") return run_small_k_decay(sc);
  if (sc.name == "moderate_k_decay") return run_moderate_k_decay(sc);
  if (sc.name == "k_continuity") return run_k_continuity(sc);
  if (sc.name == "k_to_zero_jump") return run_k_to_zero_jump(sc);
  return run_k_sweep(sc);
}

}  // namespace oldroyd::experiments
