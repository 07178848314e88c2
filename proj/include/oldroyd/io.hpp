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
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oldroyd/diagnostics.hpp"
#include "oldroyd/model.hpp"

namespace oldroyd::io {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Compact text for labels and messages.
inline std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// --- checkpoints ----------------------------------------------------------
//
// Layout, all little-endian:
//   char[8]  magic "OLDRYDCK"
//   u32      format version
//   u32      byte-order probe 0x01020304
//   i32      dim, n
//   f64      t, k, b, nu, eta, mu, alpha
//   f64[2]   u coefficients (re, im), component-major, then τ likewise

inline constexpr char checkpoint_magic[8] = {'O', 'L', 'D', 'R', 'Y', 'D', 'C', 'K'};
inline constexpr std::uint32_t checkpoint_version = 1;
inline constexpr std::uint32_t byte_order_probe = 0x01020304;

struct Checkpoint {
  SimState state;
  ModelParams params;
};

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError(path + ": truncated checkpoint header");
  return to_little(v);
}

inline std::size_t payload_doubles(const Grid& g) {
  return 2 * g.spectral_size() * static_cast<std::size_t>(component_count(Rank::vector, g.dim) +
                                                          component_count(Rank::sym_tensor, g.dim));
}

}  // namespace detail

inline void write_checkpoint(const SimState& s, const ModelParams& p, const fs::path& path) {
  const Grid& g = s.grid();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(checkpoint_magic, sizeof checkpoint_magic);
  detail::put(os, checkpoint_version);
  detail::put(os, byte_order_probe);
  detail::put<std::int32_t>(os, g.dim);
  detail::put<std::int32_t>(os, g.n);
  for (double v : {s.t, p.k, p.b, p.nu, p.eta, p.mu, p.alpha}) detail::put(os, v);
  for (const SpectralField* f : {&s.u, &s.tau})
    for (const complex& z : f->values()) {
      detail::put(os, z.real());
      detail::put(os, z.imag());
    }
  if (!os) throw IoError("write failed for " + path.string());
}

/// Reads a checkpoint written by write_checkpoint. A non-null expected grid
/// is enforced, so a resume cannot silently switch resolution.
inline Checkpoint read_checkpoint(const fs::path& path, const Grid* expected = nullptr) {
  const std::string name = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + name);
  char magic[8];
  if (!is.read(magic, sizeof magic)) throw IoError(name + ": truncated checkpoint header");
  if (std::memcmp(magic, checkpoint_magic, sizeof magic) != 0) throw IoError(name + ": not a checkpoint (bad magic)");
  const auto version = detail::get<std::uint32_t>(is, name);
  if (version != checkpoint_version)
    throw IoError(name + ": unsupported checkpoint version " + std::to_string(version));
  if (detail::get<std::uint32_t>(is, name) != byte_order_probe) throw IoError(name + ": byte-order probe mismatch");
  Grid g;
  g.dim = detail::get<std::int32_t>(is, name);
  g.n = detail::get<std::int32_t>(is, name);
  try {
    validate(g);
  } catch (const std::exception& e) {
    throw IoError(name + ": corrupt grid in header: " + e.what());
  }
  if (expected && !(*expected == g))
    throw IoError(name + ": grid mismatch (file has dim=" + std::to_string(g.dim) + " n=" + std::to_string(g.n) +
                  ", run expects dim=" + std::to_string(expected->dim) + " n=" + std::to_string(expected->n) + ")");
  double h[7];
  for (double& v : h) v = detail::get<double>(is, name);
  ModelParams p{h[1], h[2], h[3], h[4], h[5], h[6]};

  const auto header_end = is.tellg();
  is.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::size_t>(is.tellg() - header_end);
  if (remaining != detail::payload_doubles(g) * sizeof(double))
    throw IoError(name + ": payload has " + std::to_string(remaining) + " bytes, expected " +
                  std::to_string(detail::payload_doubles(g) * sizeof(double)) + " (truncated or corrupt)");
  is.seekg(header_end);

  SpectralField u(g, Rank::vector), tau(g, Rank::sym_tensor);
  for (SpectralField* f : {&u, &tau})
    for (complex& z : f->values()) {
      const double re = detail::get<double>(is, name);
      const double im = detail::get<double>(is, name);
      z = complex(re, im);
    }
  return {SimState(h[0], std::move(u), std::move(tau)), p};
}

// --- time series ----------------------------------------------------------

inline std::string series_header() {
  std::string s;
  for (const char* c : diag::column_names()) {
    if (!s.empty()) s += ',';
    s += c;
  }
  return s;
}

inline void emit_series(const std::vector<diag::TimeSeriesRecord>& records, const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << series_header() << '\n';
  for (const auto& r : records) {
    const auto a = diag::as_array(r);
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << format_double(a[i]);
    os << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

inline std::vector<diag::TimeSeriesRecord> read_series(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != series_header())
    throw IoError(path.string() + ": missing or unexpected CSV header");
  std::vector<diag::TimeSeriesRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 11> a{};
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    for (; std::getline(ss, cell, ','); ++i) {
      if (i >= a.size()) throw IoError(path.string() + ":" + std::to_string(lineno) + ": too many columns");
      try {
        std::size_t used = 0;
        a[i] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (i != a.size()) throw IoError(path.string() + ":" + std::to_string(lineno) + ": too few columns");
    out.push_back(diag::from_array(a));
  }
  return out;
}

// --- run directories ------------------------------------------------------

/// Creates root/name, or root/name-YYYYmmddTHHMMSS[-i] when taken. Existing
/// directories are never reused.
inline fs::path create_run_dir(const fs::path& root, const std::string& name) {
  fs::create_directories(root);
  fs::path dir = root / name;
  if (fs::create_directory(dir)) return dir;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);
  const std::string base = name + "-" + stamp;
  dir = root / base;
  for (int i = 2; !fs::create_directory(dir); ++i) dir = root / (base + "-" + std::to_string(i));
  return dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os || !(os << text)) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace oldroyd::io
