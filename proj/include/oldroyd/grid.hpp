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

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace oldroyd {

/// Integer wavevector; unused trailing components are zero in 2D.
using Wavevector = std::array<int, 3>;

/// Uniform periodic grid on [0, 2π)^dim.
///
/// Spectral arrays use the real-to-complex half layout: every axis but the
/// last holds wavenumbers in [-n/2, n/2) in FFT order, the last axis holds
/// 0..n/2. Forward transforms are unnormalized, backward transforms carry
/// the 1/n^dim factor.
struct Grid {
  int dim = 2;
  int n = 32;

  static constexpr double length = 2.0 * std::numbers::pi;

  std::size_t real_size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  std::size_t spectral_size() const { return real_size() / static_cast<std::size_t>(n) * static_cast<std::size_t>(half()); }
  int half() const { return n / 2 + 1; }
  double dx() const { return length / n; }
  double cell_volume() const { return std::pow(dx(), dim); }
  double volume() const { return std::pow(length, dim); }

  /// Signed wavenumber of FFT index i on a full axis.
  int wavenumber(int i) const { return i < n / 2 ? i : i - n; }

  /// Largest retained |ξ_i| under the 2/3 rule.
  int dealias_cutoff() const { return n / 3; }

  bool is_nyquist(int xi) const { return xi == n / 2 || xi == -n / 2; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

/// Throws std::invalid_argument unless dim ∈ {2,3} and n is a power of two ≥ 8.
inline void validate(const Grid& g) {
  if (g.dim != 2 && g.dim != 3)
    throw std::invalid_argument("grid: dim must be 2 or 3, got " + std::to_string(g.dim));
  if (!is_power_of_two(g.n) || g.n < 8)
    throw std::invalid_argument("grid: n must be a power of two >= 8, got " + std::to_string(g.n));
}

inline double norm_sq(const Wavevector& xi) {
  return double(xi[0]) * xi[0] + double(xi[1]) * xi[1] + double(xi[2]) * xi[2];
}

/// Calls f(index, xi, weight) for every stored mode. `weight` is the
/// multiplicity of the mode in the full spectrum: 2 for interior modes of the
/// half axis (the conjugate partner is implicit), 1 on its 0 and n/2 planes.
template <class F>
void for_each_mode(const Grid& g, F&& f) {
  const int h = g.half();
  std::size_t idx = 0;
  Wavevector xi{0, 0, 0};
  auto weight = [&](int last) { return (last == 0 || last == g.n / 2) ? 1.0 : 2.0; };
  if (g.dim == 2) {
    for (int i0 = 0; i0 < g.n; ++i0) {
      xi[0] = g.wavenumber(i0);
      for (int i1 = 0; i1 < h; ++i1, ++idx) {
        xi[1] = i1;
        f(idx, xi, weight(i1));
      }
    }
  } else {
    for (int i0 = 0; i0 < g.n; ++i0) {
      xi[0] = g.wavenumber(i0);
      for (int i1 = 0; i1 < g.n; ++i1) {
        xi[1] = g.wavenumber(i1);
        for (int i2 = 0; i2 < h; ++i2, ++idx) {
          xi[2] = i2;
          f(idx, xi, weight(i2));
        }
      }
    }
  }
}

/// Calls f(index, x) for every collocation point, x the physical position.
template <class F>
void for_each_point(const Grid& g, F&& f) {
  const double h = g.dx();
  std::array<double, 3> x{0.0, 0.0, 0.0};
  std::size_t idx = 0;
  if (g.dim == 2) {
    for (int i0 = 0; i0 < g.n; ++i0)
      for (int i1 = 0; i1 < g.n; ++i1, ++idx) {
        x[0] = i0 * h;
        x[1] = i1 * h;
        f(idx, x);
      }
  } else {
    for (int i0 = 0; i0 < g.n; ++i0)
      for (int i1 = 0; i1 < g.n; ++i1)
        for (int i2 = 0; i2 < g.n; ++i2, ++idx) {
          x[0] = i0 * h;
          x[1] = i1 * h;
          x[2] = i2 * h;
          f(idx, x);
        }
  }
}

}  // namespace oldroyd
