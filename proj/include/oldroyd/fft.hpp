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

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "oldroyd/grid.hpp"

namespace oldroyd::fft {

/// FFTW plan pair for one grid shape. Plans are built once with
/// FFTW_ESTIMATE (deterministic algorithm choice) and FFTW_UNALIGNED so they
/// can be executed on any std::vector storage, from any thread.
class Plan {
 public:
  explicit Plan(const Grid& g) {
    std::vector<double> r(g.real_size());
    std::vector<std::complex<double>> c(g.spectral_size());
    int dims[3] = {g.n, g.n, g.n};
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    r2c_ = fftw_plan_dft_r2c(g.dim, dims, r.data(), reinterpret_cast<fftw_complex*>(c.data()), flags);
    c2r_ = fftw_plan_dft_c2r(g.dim, dims, reinterpret_cast<fftw_complex*>(c.data()), r.data(), flags);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }

  void r2c(const double* in, std::complex<double>* out) const {
    // out-of-place r2c leaves the input untouched
    fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // c2r overwrites its input
  void c2r(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  fftw_plan r2c_;
  fftw_plan c2r_;
};

/// Process-wide plan cache; the FFTW planner is not thread-safe.
inline const Plan& plan_for(const Grid& g) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{g.dim, g.n}];
  if (!slot) slot = std::make_unique<Plan>(g);
  return *slot;
}

/// Unnormalized forward transform of one real component.
inline void forward(const Grid& g, std::span<const double> in, std::span<std::complex<double>> out) {
  plan_for(g).r2c(in.data(), out.data());
}

/// Backward transform of one component, scaled by 1/n^dim.
inline void backward(const Grid& g, std::span<const std::complex<double>> in, std::span<double> out) {
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  plan_for(g).c2r(scratch.data(), out.data());
  const double scale = 1.0 / static_cast<double>(g.real_size());
  for (auto& v : out) v *= scale;
}

}  // namespace oldroyd::fft
