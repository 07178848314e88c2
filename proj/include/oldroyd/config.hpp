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

// Run configuration files.
//
// Grammar, one statement per line:
//   # comment            (also allowed after a value)
//   [section]
//   key = value
// Lists are comma separated. Booleans are true/false. Numbers accept inf.
// [grid] and [model] are required; every other section is optional. When
// [run] names a scenario, that scenario's presets are the defaults.

#include <algorithm>
#include <climits>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oldroyd/experiments.hpp"

namespace oldroyd::config {

struct RunConfig {
  std::string scenario;  ///< empty for a single run
  experiments::Scenario settings;
};

struct ConfigError {
  int line = 0;  ///< 0 when the problem has no single source line
  std::string message;
};

class ConfigErrors : public std::invalid_argument {
 public:
  explicit ConfigErrors(std::vector<ConfigError> errors)
      : std::invalid_argument(render(errors)), errors_(std::move(errors)) {}
  const std::vector<ConfigError>& errors() const { return errors_; }

 private:
  static std::string render(const std::vector<ConfigError>& errors) {
    std::string s = "invalid configuration:";
    for (const auto& e : errors)
      s += "\n  " + (e.line > 0 ? "line " + std::to_string(e.line) + ": " : std::string()) + e.message;
    return s;
  }
  std::vector<ConfigError> errors_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& v) {
  std::size_t used = 0;
  double d;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
  return d;
}

inline long to_long(const std::string& v) {
  std::size_t used = 0;
  long n;
  try {
    n = std::stol(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return n;
}

inline bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

inline std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + io::format_double(x);
  return s;
}

using Setter = std::function<void(experiments::Scenario&, const std::string&)>;
using Getter = std::function<std::string(const experiments::Scenario&)>;

struct Key {
  Setter set;
  Getter get;
};

// Section -> key -> accessors, in echo order.
using Table = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Key>>>>;

#define OLDROYD_NUM(field) \
  Key { [](experiments::Scenario& s, const std::string& v) { s.field = to_double(v); }, \
        [](const experiments::Scenario& s) { return io::format_double(s.field); } }
#define OLDROYD_INT(field) \
  Key { [](experiments::Scenario& s, const std::string& v) { s.field = static_cast<decltype(s.field)>(to_long(v)); }, \
        [](const experiments::Scenario& s) { return std::to_string(s.field); } }
#define OLDROYD_LIST(field) \
  Key { [](experiments::Scenario& s, const std::string& v) { s.field = to_list(v); }, \
        [](const experiments::Scenario& s) { return join(s.field); } }

inline const Table& table() {
  static const Table t = {
      {"run",
       {{"scenario", Key{[](experiments::Scenario& s, const std::string& v) { s.name = v; },
                         [](const experiments::Scenario& s) { return s.name; }}},
        {"output", Key{[](experiments::Scenario& s, const std::string& v) { s.output = v; },
                       [](const experiments::Scenario& s) { return s.output; }}}}},
      {"grid", {{"dim", OLDROYD_INT(grid.dim)}, {"n", OLDROYD_INT(grid.n)}}},
      {"model",
       {{"k", OLDROYD_NUM(params.k)},
        {"b", OLDROYD_NUM(params.b)},
        {"nu", OLDROYD_NUM(params.nu)},
        {"eta", OLDROYD_NUM(params.eta)},
        {"mu", OLDROYD_NUM(params.mu)},
        {"alpha", OLDROYD_NUM(params.alpha)}}},
      {"stepper",
       {{"scheme", Key{[](experiments::Scenario& s, const std::string& v) { s.stepper.scheme = parse_scheme(v); },
                       [](const experiments::Scenario& s) { return to_string(s.stepper.scheme); }}},
        {"dt_init", OLDROYD_NUM(stepper.dt_init)},
        {"cfl_safety", OLDROYD_NUM(stepper.cfl_safety)},
        {"t_end", OLDROYD_NUM(stepper.t_end)},
        {"snapshot_every", OLDROYD_NUM(stepper.snapshot_every)},
        {"dt_max", OLDROYD_NUM(stepper.dt_max)},
        {"fixed_dt", Key{[](experiments::Scenario& s, const std::string& v) { s.stepper.fixed_dt = to_bool(v); },
                         [](const experiments::Scenario& s) { return std::string(s.stepper.fixed_dt ? "true" : "false"); }}}}},
      {"data",
       {{"family", Key{[](experiments::Scenario& s, const std::string& v) { s.data.family = init::parse_family(v); },
                       [](const experiments::Scenario& s) { return init::to_string(s.data.family); }}},
        {"amplitude", OLDROYD_NUM(data.amplitude)},
        {"tau_amplitude", OLDROYD_NUM(data.tau_amplitude)},
        {"seed", Key{[](experiments::Scenario& s, const std::string& v) {
                       const long n = to_long(v);
                       if (n < 0) throw std::invalid_argument("seed must be >= 0");
                       s.data.seed = static_cast<std::uint64_t>(n);
                     },
                     [](const experiments::Scenario& s) { return std::to_string(s.data.seed); }}},
        {"slope", OLDROYD_NUM(data.slope)},
        {"kmax", OLDROYD_INT(data.kmax)},
        {"bump_n", OLDROYD_INT(data.bump_n)},
        {"bump_radius", OLDROYD_NUM(data.bump_radius)},
        {"scale_k", OLDROYD_NUM(data.scale_k)},
        {"width0", OLDROYD_NUM(data.width0)},
        {"mode", Key{[](experiments::Scenario& s, const std::string& v) {
                       const auto l = to_list(v);
                       if (l.empty() || l.size() > 3) throw std::invalid_argument("mode takes 1 to 3 integers");
                       Wavevector xi{0, 0, 0};
                       for (std::size_t i = 0; i < l.size(); ++i) {
                         if (l[i] != std::floor(l[i])) throw std::invalid_argument("mode entries must be integers");
                         xi[i] = static_cast<int>(l[i]);
                       }
                       s.data.mode = xi;
                     },
                     [](const experiments::Scenario& s) {
                       return std::to_string(s.data.mode[0]) + ", " + std::to_string(s.data.mode[1]) + ", " +
                              std::to_string(s.data.mode[2]);
                     }}}}},
      {"diagnostics",
       {{"hs_s", OLDROYD_NUM(diagnostics.hs_s)},
        {"besov_s", OLDROYD_NUM(diagnostics.besov_s)},
        {"besov_p", OLDROYD_NUM(diagnostics.besov_p)}}},
      {"experiment",
       {{"k_values", OLDROYD_LIST(k_values)},
        {"deltas", OLDROYD_LIST(deltas)},
        {"window_fraction", OLDROYD_NUM(window_fraction)},
        {"horizon_factor", OLDROYD_NUM(horizon_factor)},
        {"t_cap", OLDROYD_NUM(t_cap)},
        {"t_min", OLDROYD_NUM(t_min)},
        {"min_samples", OLDROYD_INT(min_samples)},
        {"threshold_ratio", OLDROYD_NUM(threshold_ratio)},
        {"confirm_3d_n", OLDROYD_INT(confirm_3d_n)}}},
      {"criteria",
       {{"rate_fraction", OLDROYD_NUM(thresholds.rate_fraction)},
        {"r2_min", OLDROYD_NUM(thresholds.r2_min)},
        {"ratio_lo", OLDROYD_NUM(thresholds.ratio_lo)},
        {"ratio_hi", OLDROYD_NUM(thresholds.ratio_hi)},
        {"drift_tol", OLDROYD_NUM(thresholds.drift_tol)},
        {"gap_tolerance", OLDROYD_NUM(thresholds.gap_tolerance)},
        {"zero_rate_tol", OLDROYD_NUM(thresholds.zero_rate_tol)},
        {"top_shell_limit", OLDROYD_NUM(thresholds.top_shell_limit)}}},
  };
  return t;
}

#undef OLDROYD_NUM
#undef OLDROYD_INT
#undef OLDROYD_LIST

inline const Key* find_key(const std::string& section, const std::string& key) {
  for (const auto& [sec, keys] : table())
    if (sec == section)
      for (const auto& [name, k] : keys)
        if (name == key) return &k;
  return nullptr;
}

inline bool known_section(const std::string& section) {
  for (const auto& [sec, keys] : table())
    if (sec == section) return true;
  return false;
}

struct Statement {
  int line;
  std::string section, key, value;
};

}  // namespace detail

/// Parses and fully validates a configuration. Throws ConfigErrors listing
/// every problem found, each with its line number where one applies.
/// default_scenario applies when the text names none.
inline RunConfig parse_config(const std::string& text, const std::string& default_scenario = "") {
  std::vector<ConfigError> errors;
  std::vector<detail::Statement> statements;
  std::map<std::string, int> section_line;
  {
    std::stringstream ss(text);
    std::string raw, section;
    for (int lineno = 1; std::getline(ss, raw); ++lineno) {
      const auto hash = raw.find('#');
      const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          errors.push_back({lineno, "malformed section header '" + line + "'"});
          continue;
        }
        section = detail::trim(line.substr(1, line.size() - 2));
        if (!detail::known_section(section)) errors.push_back({lineno, "unknown section [" + section + "]"});
        if (section_line.count(section)) errors.push_back({lineno, "section [" + section + "] repeated"});
        section_line.emplace(section, lineno);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        errors.push_back({lineno, "expected 'key = value', got '" + line + "'"});
        continue;
      }
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (section.empty()) {
        errors.push_back({lineno, "key '" + key + "' appears before any section"});
        continue;
      }
      if (!detail::known_section(section)) continue;  // already reported
      if (!detail::find_key(section, key)) {
        errors.push_back({lineno, "unknown key '" + key + "' in [" + section + "]"});
        continue;
      }
      statements.push_back({lineno, section, key, value});
    }
  }
  for (const char* required : {"grid", "model"})
    if (!section_line.count(required)) errors.push_back({0, std::string("missing required section [") + required + "]"});

  RunConfig cfg;
  cfg.scenario = default_scenario;
  for (const auto& st : statements)
    if (st.section == "run" && st.key == "scenario") cfg.scenario = st.value;
  if (!cfg.scenario.empty()) {
    try {
      cfg.settings = experiments::default_scenario(cfg.scenario);
    } catch (const std::exception& e) {
      int line = 0;
      for (const auto& st : statements)
        if (st.section == "run" && st.key == "scenario") line = st.line;
      errors.push_back({line, e.what()});
    }
  } else {
    cfg.settings.name.clear();
  }

  std::map<std::string, int> key_line;
  for (const auto& st : statements) {
    if (key_line.count(st.section + "." + st.key)) {
      errors.push_back({st.line, "key '" + st.key + "' repeated in [" + st.section + "]"});
      continue;
    }
    key_line[st.section + "." + st.key] = st.line;
    try {
      detail::find_key(st.section, st.key)->set(cfg.settings, st.value);
    } catch (const std::exception& e) {
      errors.push_back({st.line, st.key + ": " + e.what()});
    }
  }

  // Range checks, reported against the line that set the value.
  const auto line_of = [&](const std::string& k) {
    const auto it = key_line.find(k);
    return it == key_line.end() ? 0 : it->second;
  };
  const auto& s = cfg.settings;
  try {
    validate(s.grid);
  } catch (const std::exception& e) {
    errors.push_back({line_of(s.grid.dim != 2 && s.grid.dim != 3 ? "grid.dim" : "grid.n"), e.what()});
  }
  for (const auto& msg : oldroyd::check(s.params)) {
    const std::string field = msg.substr(0, msg.find_first_of(" ="));
    errors.push_back({line_of("model." + field), msg});
  }
  for (const auto& msg : oldroyd::check(s.stepper)) {
    const std::string field = msg.substr(0, msg.find(' '));
    errors.push_back({line_of("stepper." + field), msg});
  }
  if (!(s.data.amplitude > 0.0)) errors.push_back({line_of("data.amplitude"), "amplitude must be > 0"});
  if (!(s.diagnostics.besov_p >= 1.0)) errors.push_back({line_of("diagnostics.besov_p"), "besov_p must be >= 1"});
  if (!cfg.scenario.empty()) {
    for (const auto& msg : experiments::check(s)) {
      // parameter and stepper problems were already reported above
      bool dup = false;
      for (const auto& m : oldroyd::check(s.params)) dup = dup || m == msg;
      for (const auto& m : oldroyd::check(s.stepper)) dup = dup || m == msg;
      if (dup || msg.rfind("unknown scenario", 0) == 0) continue;
      int line = 0;
      if (msg.rfind("k value", 0) == 0) line = line_of("experiment.k_values");
      if (msg.find("delta") != std::string::npos) line = line_of("experiment.deltas");
      errors.push_back({line, msg});
    }
  }
  if (!errors.empty()) {
    std::stable_sort(errors.begin(), errors.end(), [](const ConfigError& a, const ConfigError& b) {
      return (a.line == 0 ? INT_MAX : a.line) < (b.line == 0 ? INT_MAX : b.line);
    });
    throw ConfigErrors(std::move(errors));
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, const std::string& default_scenario = "") {
  return parse_config(io::read_text(path), default_scenario);
}

/// The effective configuration as text; parse_config(echo(c)) reproduces c.
inline std::string echo(const RunConfig& cfg) {
  std::string out;
  for (const auto& [section, keys] : detail::table()) {
    out += "[" + section + "]\n";
    for (const auto& [name, key] : keys) {
      if (section == "run" && name == "scenario" && cfg.scenario.empty()) continue;
      out += name + " = " + key.get(cfg.settings) + "\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace oldroyd::config
