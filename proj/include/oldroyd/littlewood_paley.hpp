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
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "oldroyd/spectral.hpp"

namespace oldroyd::lp {

/// C^∞ step: 1 for t <= 0, 0 for t >= 1, glued with exp(−1/x).
inline double smooth_step(double t) {
  auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = g(1.0 - t);
  return a / (a + g(t));
}

/// Radial low-pass profile: 1 on |ξ| <= 3/4, 0 on |ξ| >= 4/3.
inline double chi_profile(double r) { return smooth_step((r - 0.75) / (4.0 / 3.0 - 0.75)); }

/// Annular profile χ(r/2) − χ(r), supported in 3/4 <= r <= 8/3.
inline double phi_profile(double r) { return chi_profile(0.5 * r) - chi_profile(r); }

/// Dyadic partition sampled on the grid's spectral modes.
///
/// Block j = -1 is the low-pass χ, blocks 0..j_max-1 are φ(2^{-j}·), and the
/// top block j_max is the high-pass 1 − χ(2^{-j_max}·), so the sum is exactly
/// one on every grid frequency even though shells past the dealiased band are
/// not resolved individually.
class DyadicPartition {
 public:
  explicit DyadicPartition(const Grid& g) : grid_(g) {
    j_max_ = static_cast<int>(std::floor(std::log2(g.n / 3.0)));
    if (j_max_ < 1)
      throw std::invalid_argument("build_partition: grid n=" + std::to_string(g.n) +
                                  " cannot host two dyadic shells");
    const std::size_t m = g.spectral_size();
    weights_.assign(static_cast<std::size_t>(j_max_ + 2), std::vector<double>(m, 0.0));
    std::vector<double> total(m, 0.0);
    for_each_mode(g, [&](std::size_t i, const Wavevector& xi, double) {
      const double r = std::sqrt(norm_sq(xi));
      weights_[0][i] = chi_profile(r);
      for (int j = 0; j < j_max_; ++j) weights_[j + 1][i] = phi_profile(std::ldexp(r, -j));
      weights_[j_max_ + 1][i] = 1.0 - chi_profile(std::ldexp(r, -j_max_));
      for (int b = 0; b < j_max_ + 2; ++b) total[i] += weights_[b][i];
    });
    // renormalize so the discrete sum is one to rounding
    for (auto& w : weights_)
      for (std::size_t i = 0; i < m; ++i) w[i] /= total[i];
  }

  const Grid& grid() const { return grid_; }
  int j_max() const { return j_max_; }

  /// Multiplier of block j at stored mode i; zero for j > j_max.
  double weight(int j, std::size_t i) const {
    if (j < -1 || j > j_max_) return 0.0;
    return weights_[static_cast<std::size_t>(j + 1)][i];
  }

 private:
  Grid grid_;
  int j_max_ = 0;
  std::vector<std::vector<double>> weights_;
};

inline DyadicPartition build_partition(const Grid& g) { return DyadicPartition(g); }

/// Δ_j f. Returns a zero field for j > j_max.
inline SpectralField block_project(const DyadicPartition& part, const SpectralField& f, int j) {
  if (!(f.grid() == part.grid())) throw std::invalid_argument("block_project: partition built for another grid");
  if (j < -1) throw std::invalid_argument("block_project: j must be >= -1");
  SpectralField out = f;
  for (int c = 0; c < f.components(); ++c) {
    auto v = out.component(c);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= part.weight(j, i);
  }
  return out;
}

/// B^s_{p,r} parameters; p, r ∈ [1, ∞].
struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double r = 1.0;
  /// Drop the j = -1 block (torus surrogate of the homogeneous norm).
  bool homogeneous = false;
};

inline void validate(const BesovParams& bp) {
  if (!(bp.p >= 1.0) || !(bp.r >= 1.0)) throw std::invalid_argument("besov: p and r must be >= 1");
}

/// ‖f‖_{L^p}: Parseval for p = 2, collocation quadrature otherwise.
inline double field_lp_norm(const SpectralField& f, double p) {
  if (p == 2.0) return l2_norm(f);
  return lp_norm(transform_backward(f), p);
}

/// 2^{js}‖Δ_j f‖_{L^p} for j = -1..j_max (index j+1).
inline std::vector<double> besov_terms(const DyadicPartition& part, const SpectralField& f, const BesovParams& bp) {
  validate(bp);
  std::vector<double> terms;
  for (int j = -1; j <= part.j_max(); ++j) {
    if (bp.homogeneous && j == -1) {
      terms.push_back(0.0);
      continue;
    }
    terms.push_back(std::pow(2.0, j * bp.s) * field_lp_norm(block_project(part, f, j), bp.p));
  }
  return terms;
}

/// Finite-grid Besov norm ‖(2^{js}‖Δ_j f‖_{L^p})_j‖_{ℓ^r}.
inline double besov_norm(const DyadicPartition& part, const SpectralField& f, const BesovParams& bp) {
  const auto terms = besov_terms(part, f, bp);
  if (std::isinf(bp.r)) {
    double m = 0.0;
    for (double t : terms) m = std::max(m, t);
    return m;
  }
  double acc = 0.0;
  for (double t : terms) acc += std::pow(t, bp.r);
  return std::pow(acc, 1.0 / bp.r);
}

/// Fraction of ‖f‖² carried by modes outside the annulus 2^j·[3/4, 8/3].
inline double shell_leakage(const SpectralField& f, int j) {
  const double lo = 0.75 * std::ldexp(1.0, j), hi = 8.0 / 3.0 * std::ldexp(1.0, j);
  const double outside = weighted_inner(f, f, [&](const Wavevector& xi) {
    const double r = std::sqrt(norm_sq(xi));
    return (r < lo || r > hi) ? 1.0 : 0.0;
  });
  const double total = inner(f, f);
  return total > 0.0 ? outside / total : 0.0;
}

/// ‖∇f‖_{L^p} / ‖f‖_{L^p} for a scalar field localized in shell j.
/// Throws std::invalid_argument if more than 1e-24 of the energy (1e-12 in
/// norm) lies outside the shell.
inline double bernstein_ratio(const SpectralField& f, int j, double p = 2.0) {
  if (f.rank() != Rank::scalar) throw std::invalid_argument("bernstein_ratio: scalar field expected");
  if (j < 0) throw std::invalid_argument("bernstein_ratio: shell index must be >= 0");
  if (shell_leakage(f, j) > 1e-24)
    throw std::invalid_argument("bernstein_ratio: field is not localized in shell " + std::to_string(j));
  const double base = field_lp_norm(f, p);
  if (base == 0.0) throw std::invalid_argument("bernstein_ratio: zero field");
  return field_lp_norm(gradient(f), p) / base;
}

}  // namespace oldroyd::lp
