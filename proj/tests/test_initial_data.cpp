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

#include <gtest/gtest.h>

#include <cmath>

#include "oldroyd/initial_data.hpp"
#include "oldroyd/littlewood_paley.hpp"

using namespace oldroyd;

TEST(RandomDivfree, NormalizedDivergenceFreeAndBanded) {
  for (int dim : {2, 3}) {
    const Grid g{dim, 16};
    const auto d = init::make_random_divfree(g, 0.3, 5, 1.0, 3, 0.7);
    EXPECT_NEAR(l2_norm(d.state.u), 0.3, 1e-13);
    EXPECT_NEAR(l2_norm(d.state.tau), 0.7, 1e-13);
    EXPECT_LT(divergence_residual(d.state.u), 1e-13);
    for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
      bool outside = false;
      for (int a = 0; a < dim; ++a) outside = outside || std::abs(xi[a]) > 3;
      if (outside || norm_sq(xi) == 0.0) {
        for (int c = 0; c < d.state.u.components(); ++c) EXPECT_LT(std::abs(d.state.u.component(c)[m]), 1e-12);
      }
    });
  }
}

TEST(RandomDivfree, SeededDeterminism) {
  const Grid g{2, 16};
  const auto a = init::make_random_divfree(g, 1.0, 9, 2.0);
  const auto b = init::make_random_divfree(g, 1.0, 9, 2.0);
  const auto c = init::make_random_divfree(g, 1.0, 10, 2.0);
  EXPECT_EQ(l2_norm(a.state.u - b.state.u), 0.0);
  EXPECT_EQ(l2_norm(a.state.tau - b.state.tau), 0.0);
  EXPECT_GT(l2_norm(a.state.u - c.state.u), 0.1);
  // physical fields are real: a round trip through real space changes nothing
  EXPECT_LT(l2_norm(transform_forward(transform_backward(a.state.u)) - a.state.u), 1e-13);
}

TEST(RandomDivfree, RejectsBadArguments) {
  const Grid g{2, 16};
  EXPECT_THROW(init::make_random_divfree(g, 0.0, 1, 1.0), std::invalid_argument);
  EXPECT_THROW(init::make_random_divfree(g, std::nan(""), 1, 1.0), std::invalid_argument);
  EXPECT_THROW(init::make_random_divfree(Grid{2, 15}, 1.0, 1, 1.0), std::invalid_argument);
}

TEST(FrequencyBump, StressSitsInBlockN) {
  const Grid g{2, 128};
  const auto part = lp::build_partition(g);
  for (int N : {3, 4, 5}) {
    const auto d = init::make_frequency_bump(g, N, 1.0);
    const double total = l2_norm(d.state.tau);
    const double in_block = l2_norm(lp::block_project(part, d.state.tau, N));
    EXPECT_GT(in_block, 0.99 * total) << "N=" << N;
    EXPECT_LT(divergence_residual(d.state.u), 1e-13);
    // both parts scale like amplitude/N
    const auto d2 = init::make_frequency_bump(g, N, 2.0);
    EXPECT_NEAR(l2_norm(d2.state.tau), 2.0 * total, 1e-12 * total);
    EXPECT_EQ(d.info.at("bump_centre"), double(1 << N));
  }
  const double u3 = l2_norm(init::make_frequency_bump(g, 3, 1.0).state.u);
  const double u5 = l2_norm(init::make_frequency_bump(g, 5, 1.0).state.u);
  EXPECT_NEAR(u3 / u5, 5.0 / 3.0, 1e-12);
}

TEST(FrequencyBump, ComponentsEqualAndReal) {
  const Grid g{3, 32};
  const auto d = init::make_frequency_bump(g, 2, 1.0);
  const auto tp = transform_backward(d.state.tau);
  for (int c = 1; c < d.state.tau.components(); ++c)
    for (std::size_t p = 0; p < g.real_size(); ++p) ASSERT_EQ(tp.component(c)[p], tp.component(0)[p]);
  EXPECT_GT(max_abs(tp), 0.0);
}

TEST(FrequencyBump, RejectsShellOutsideBand) {
  EXPECT_THROW(init::make_frequency_bump(Grid{2, 128}, 6, 1.0), std::invalid_argument);
  EXPECT_THROW(init::make_frequency_bump(Grid{2, 32}, 0, 1.0), std::invalid_argument);
  // shell 8 with radius 2 just fits n = 32 (3·10 <= 32); a wider bump does not
  EXPECT_NO_THROW(init::make_frequency_bump(Grid{2, 32}, 3, 1.0, 2.0));
  EXPECT_THROW(init::make_frequency_bump(Grid{2, 32}, 3, 1.0, 3.0), std::invalid_argument);
}

TEST(Axisymmetric, NormalizedSymmetricAndRecordsDilation) {
  for (int dim : {2, 3}) {
    const Grid g{dim, dim == 2 ? 64 : 32};
    const double width = dim == 2 ? 0.5 : 1.0;
    const auto d = init::make_axisymmetric_scaled(g, 1.0, 0.01, width);
    EXPECT_NEAR(l2_norm(d.state.u), 0.01, 1e-15);
    EXPECT_EQ(l2_norm(d.state.tau), 0.0);
    EXPECT_LT(divergence_residual(d.state.u), 1e-15);
    EXPECT_DOUBLE_EQ(d.info.at("radius"), width);
    EXPECT_DOUBLE_EQ(d.info.at("dilation"), 1.0);
    // 2D: rotating the grid by a quarter turn about the centre maps u to its rotation
    if (dim == 2) {
      const auto up = transform_backward(d.state.u);
      double err = 0.0;
      const int n = g.n;
      for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
          // x ↦ (−y, x) about index n/2: (i, j) ↦ (n − j, i)
          const std::size_t p = std::size_t(i) * n + j, q = std::size_t(n - j) * n + i;
          err = std::max(err, std::abs(up.component(0)[q] + up.component(1)[p]));
          err = std::max(err, std::abs(up.component(1)[q] - up.component(0)[p]));
        }
      EXPECT_LT(err, 1e-12 * max_abs(up));
    }
  }
}

TEST(Axisymmetric, WidthCappedForSmallK) {
  const Grid g{2, 64};
  const auto a = init::make_axisymmetric_scaled(g, 0.1, 0.01);
  const auto b = init::make_axisymmetric_scaled(g, 0.05, 0.01);
  EXPECT_NEAR(a.info.at("radius"), 0.45 * Grid::length, 1e-12);
  EXPECT_NEAR(a.info.at("requested_dilation"), 1e-4, 1e-16);
  EXPECT_EQ(l2_norm(a.state.u - b.state.u), 0.0);
  // the 4Δx floor keeps a resolvable core
  const Grid coarse{3, 32};
  EXPECT_NEAR(init::make_axisymmetric_scaled(coarse, 1.0, 0.01).info.at("radius"), 4.0 * coarse.dx(), 1e-15);
  EXPECT_THROW(init::make_axisymmetric_scaled(g, 0.0, 0.01), std::invalid_argument);
  EXPECT_THROW(init::make_axisymmetric_scaled(g, 2.0, 0.01), std::invalid_argument);
}

TEST(SingleMode, TransverseCosine) {
  const Grid g{2, 16};
  const auto d = init::make_single_mode(g, {1, 2, 0}, 0.5);
  const auto up = transform_backward(d.state.u);
  double err = 0.0;
  for_each_point(g, [&](std::size_t p, const std::array<double, 3>& x) {
    const double c = 0.5 * std::cos(x[0] + 2 * x[1]) / std::sqrt(5.0);
    err = std::max({err, std::abs(up.component(0)[p] + 2 * c), std::abs(up.component(1)[p] - c)});
  });
  EXPECT_LT(err, 1e-14);
  EXPECT_THROW(init::make_single_mode(g, {0, 0, 0}, 1.0), std::invalid_argument);
}

TEST(Generate, DispatchesAndParsesFamilies) {
  const Grid g{2, 32};
  init::DataSpec s;
  s.seed = 4;
  s.amplitude = 0.2;
  const auto a = init::generate(g, s);
  EXPECT_EQ(l2_norm(a.state.u - init::make_random_divfree(g, 0.2, 4, s.slope).state.u), 0.0);
  for (auto f : {init::Family::frequency_bump, init::Family::axisymmetric_scaled, init::Family::random_divfree,
                 init::Family::single_mode}) {
    EXPECT_EQ(init::parse_family(init::to_string(f)), f);
    s.family = f;
    s.bump_n = 2;
    EXPECT_GT(l2_norm(init::generate(g, s).state.u), 0.0);
  }
  EXPECT_THROW(init::parse_family("gaussian"), std::invalid_argument);
}

TEST(Smallness, MatchesDirectSum) {
  const Grid g{2, 16};
  const auto d = init::make_single_mode(g, {3, 0, 0}, 1.0);
  // ‖∇u‖_{H^{s−1}} = |ξ| (1 + |ξ|²)^{(s−1)/2} ‖u‖ for a single shell
  const double s = 2.0;
  EXPECT_NEAR(init::smallness_norm(d.state, s), 3.0 * std::sqrt(10.0) * l2_norm(d.state.u), 1e-12);
}
