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


// oldroyd: command-line front end for single runs, scenario campaigns and
// post-processing of their outputs.
//
// Exit codes: 0 all criteria passed (or the command succeeded),
//             1 criteria failed, 2 execution error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oldroyd/config.hpp"
#include "oldroyd/diagnostics.hpp"
#include "oldroyd/experiments.hpp"
#include "oldroyd/initial_data.hpp"
#include "oldroyd/integrator.hpp"
#include "oldroyd/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oldroyd;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_error = 2;

int cmd_run(const std::string& config_path, const std::string& output_override, const std::string& resume) {
  auto cfg = config::load_config(config_path);
  auto& s = cfg.settings;
  if (!output_override.empty()) s.output = output_override;
  if (s.output.empty()) s.output = "runs";

  SimState state(s.grid);
  std::map<std::string, double> info;
  if (!resume.empty()) {
    auto ck = io::read_checkpoint(resume, &s.grid);
    state = std::move(ck.state);
  } else {
    auto data = init::generate(s.grid, s.data);
    state = std::move(data.state);
    info = std::move(data.info);
  }

  const fs::path dir = io::create_run_dir(s.output, "run");
  io::write_text(dir / "config.ini", config::echo(cfg));
  const auto part = lp::build_partition(s.grid);
  const double e0 = energy(state, s.params);
  std::vector<diag::TimeSeriesRecord> series;
  int code = exit_ok;
  try {
    SimState last = run_until(state, s.params, s.stepper, [&](const SimState& st, const RunInfo& ri) {
      auto rec = diag::snapshot(st, s.params, s.diagnostics, part);
      rec.budget_residual = rec.energy - e0 + ri.dissipation;
      series.push_back(rec);
      io::write_checkpoint(st, s.params, dir / "latest.ckpt");
    });
    io::write_checkpoint(last, s.params, dir / "final.ckpt");
  } catch (const IntegrationError& e) {
    io::write_checkpoint(e.last_good(), s.params, dir / "last_good.ckpt");
    std::cerr << "integration failed: " << e.what() << "\n";
    code = exit_error;
  }
  io::emit_series(series, dir / "series.csv");
  json meta = {{"initial_data", info}, {"steps", series.size()}};
  io::write_text(dir / "run.json", meta.dump(2) + "\n");
  std::cout << dir.string() << "\n";
  return code;
}

int cmd_experiment(const std::string& name, const std::string& config_path, const std::string& output_override) {
  auto cfg = config_path.empty() ? config::RunConfig{name, experiments::default_scenario(name)}
                                 : config::load_config(config_path, name);
  if (cfg.scenario != name)
    throw std::invalid_argument("config names scenario '" + cfg.scenario + "' but '" + name + "' was requested");
  auto& s = cfg.settings;
  if (!output_override.empty()) s.output = output_override;
  if (s.output.empty()) s.output = "runs";
  const fs::path dir = io::create_run_dir(s.output, name);
  const std::string echo = config::echo(cfg);
  io::write_text(dir / "config.ini", echo);
  s.output = dir.string();
  s.config_echo = echo;

  const auto report = experiments::run(s);
  const json j = report.to_json();
  io::write_text(dir / "report.json", j.dump(2) + "\n");
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
  std::cout << "report: " << (dir / "report.json").string() << "\n";
  return report.passed() ? exit_ok : exit_failed;
}

int cmd_analyze(const std::string& csv, const std::string& quantity, double fraction, double t_lo, double t_hi) {
  const auto series = io::read_series(csv);
  const auto& names = diag::column_names();
  const auto it = std::find(names.begin(), names.end(), quantity);
  if (it == names.end()) throw std::invalid_argument("unknown column '" + quantity + "'");
  const auto col = static_cast<std::size_t>(it - names.begin());
  std::vector<double> t, y;
  for (const auto& r : series) {
    const auto a = diag::as_array(r);
    t.push_back(a[0]);
    y.push_back(a[col]);
  }
  if (t.empty()) throw std::invalid_argument(csv + ": empty series");
  auto window = diag::late_window(t, fraction);
  if (t_lo >= 0.0) window.first = t_lo;
  if (t_hi >= 0.0) window.second = t_hi;
  json out = {{"series", csv}, {"quantity", quantity}, {"window", {window.first, window.second}}};
  for (const char* kind : {"exponential", "polynomial"}) {
    try {
      const auto f = std::string(kind) == "exponential" ? diag::fit_exponential_rate(t, y, window)
                                                        : diag::fit_polynomial_rate(t, y, window);
      out[kind] = {{"rate", f.rate}, {"r_squared", f.r_squared}, {"samples", f.samples}};
    } catch (const std::exception& e) {
      out[kind] = {{"error", e.what()}};
    }
  }
  std::cout << out.dump(2) << "\n";
  return exit_ok;
}

int cmd_spectrum(const std::string& path, const std::string& field) {
  const auto ck = io::read_checkpoint(path);
  const SpectralField& f = field == "tau" ? ck.state.tau : ck.state.u;
  if (field != "u" && field != "tau") throw std::invalid_argument("--field must be u or tau");
  const Grid& g = ck.state.grid();
  // shell energy ½Σ|f̂|² over round(|ξ|) = m, in physical normalization
  const double scale = std::pow(Grid::length, g.dim) / std::pow(static_cast<double>(g.real_size()), 2);
  std::vector<double> shells(static_cast<std::size_t>(std::ceil(std::sqrt(g.dim) * g.n / 2)) + 2, 0.0);
  for (int c = 0; c < f.components(); ++c) {
    const auto v = f.component(c);
    const double w = frobenius_weight(f.rank(), g.dim, c);
    for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double mult) {
      const auto shell = static_cast<std::size_t>(std::lround(std::sqrt(norm_sq(xi))));
      shells[shell] += 0.5 * scale * mult * w * std::norm(v[m]);
    });
  }
  while (shells.size() > 1 && shells.back() == 0.0) shells.pop_back();
  std::cout << "shell,energy\n";
  for (std::size_t i = 0; i < shells.size(); ++i) std::cout << i << "," << io::format_double(shells[i]) << "\n";
  const auto part = lp::build_partition(g);
  std::cout << "\nblock,energy\n";
  for (int j = -1; j <= part.j_max(); ++j) {
    const SpectralField b = lp::block_project(part, f, j);
    std::cout << j << "," << io::format_double(0.5 * inner(b, b)) << "\n";
  }
  return exit_ok;
}

int cmd_report(const std::vector<std::string>& roots) {
  std::vector<fs::path> reports;
  for (const auto& r : roots) {
    if (fs::is_regular_file(r)) {
      reports.emplace_back(r);
      continue;
    }
    if (!fs::is_directory(r)) throw std::invalid_argument(r + ": no such file or directory");
    for (const auto& e : fs::recursive_directory_iterator(r))
      if (e.is_regular_file() && e.path().filename() == "report.json") reports.push_back(e.path());
  }
  if (reports.empty()) throw std::invalid_argument("no report.json found");
  std::sort(reports.begin(), reports.end());
  bool all = true;
  for (const auto& p : reports) {
    const json j = json::parse(io::read_text(p));
    std::cout << j.at("scenario").get<std::string>() << "  " << p.parent_path().string() << "\n";
    for (const auto& c : j.at("criteria")) {
      const bool ok = c.at("passed").get<bool>();
      all = all && ok;
      std::cout << "  " << (ok ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << "\n";
    }
  }
  std::cout << (all ? "all criteria passed" : "some criteria failed") << "\n";
  return all ? exit_ok : exit_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral Oldroyd-B solver and experiment harness.\n"
               "Worker threads for run families: OLDROYD_THREADS (default: hardware concurrency)."};
  app.require_subcommand(1);

  std::string config_path, output, resume;
  auto* run = app.add_subcommand("run", "integrate one configuration");
  run->add_option("--config,-c", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--output,-o", output, "output root (overrides [run] output)");
  run->add_option("--resume", resume, "continue from a checkpoint")->check(CLI::ExistingFile);

  auto* experiment = app.add_subcommand("experiment", "scenario campaigns");
  experiment->require_subcommand(1);
  std::string name;
  auto* exp_run = experiment->add_subcommand("run", "run a named scenario");
  exp_run->add_option("name", name, "scenario name")->required()->check(CLI::IsMember(experiments::scenario_names()));
  exp_run->add_option("--config,-c", config_path, "configuration file")->check(CLI::ExistingFile);
  exp_run->add_option("--output,-o", output, "output root");

  std::string csv, quantity = "l2_u";
  double fraction = 0.6, t_lo = -1.0, t_hi = -1.0;
  auto* analyze = app.add_subcommand("analyze", "fit decay rates to a series.csv");
  analyze->add_option("series", csv, "series.csv")->required()->check(CLI::ExistingFile);
  analyze->add_option("--quantity,-q", quantity, "column to fit");
  analyze->add_option("--window-fraction", fraction, "late fraction of the run to fit")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--t-lo", t_lo, "window start (overrides the fraction)");
  analyze->add_option("--t-hi", t_hi, "window end");

  std::string ckpt, field = "u";
  auto* spectrum = app.add_subcommand("spectrum", "shell and dyadic-block energies of a checkpoint");
  spectrum->add_option("checkpoint", ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--field", field, "u or tau");

  std::vector<std::string> roots;
  auto* report = app.add_subcommand("report", "summarize report.json files");
  report->add_option("paths", roots, "experiment directories or report files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_error;
  }

  try {
    if (*run) return cmd_run(config_path, output, resume);
    if (*exp_run) return cmd_experiment(name, config_path, output);
    if (*analyze) return cmd_analyze(csv, quantity, fraction, t_lo, t_hi);
    if (*spectrum) return cmd_spectrum(ckpt, field);
    if (*report) return cmd_report(roots);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_error;
}
