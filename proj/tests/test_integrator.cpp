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

#include "oldroyd/integrator.hpp"
#include "test_support.hpp"

using namespace oldroyd;
using oldroyd::testing::max_abs_diff;
using oldroyd::testing::max_abs_value;
using oldroyd::testing::random_divfree;
using oldroyd::testing::random_spectral;

namespace {

SimState smooth_state(const Grid& g, double amp, unsigned seed) {
  SpectralField u = random_divfree(g, seed, 2);
  SpectralField tau = random_spectral(g, Rank::sym_tensor, seed + 100, 2);
  u *= amp / l2_norm(u);
  tau *= amp / l2_norm(tau);
  return SimState(0.0, std::move(u), std::move(tau));
}

double state_distance(const SimState& a, const SimState& b) {
  return std::hypot(l2_norm(a.u - b.u), l2_norm(a.tau - b.tau));
}

SimState integrate(SimState s, const ModelParams& p, double dt, double t_end, Scheme scheme) {
  StepperConfig c;
  c.fixed_dt = true;
  c.dt_init = dt;
  c.t_end = t_end;
  c.scheme = scheme;
  c.snapshot_every = t_end;
  return run_until(std::move(s), p, c, nullptr);
}

}  // namespace

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : {Scheme::rk2_if, Scheme::rk4_if, Scheme::etd_rk4}) EXPECT_EQ(parse_scheme(to_string(s)), s);
  EXPECT_THROW(parse_scheme("euler"), std::invalid_argument);
  EXPECT_EQ(scheme_order(Scheme::rk2_if), 2);
  EXPECT_EQ(scheme_order(Scheme::rk4_if), 4);
}

TEST(PhiFunctions, MatchClosedFormsAcrossTheSwitch) {
  for (double z : {-50.0, -3.0, -1.0001, -0.9999, -0.3, -1e-6, 0.0, 1e-6, 0.5, 0.9999, 1.0001, 2.0}) {
    double p1, p2, p3;
    detail::phi_functions(z, p1, p2, p3);
    if (std::abs(z) < 1e-3) {
      EXPECT_NEAR(p1, 1.0 + z / 2, 1e-6);
      EXPECT_NEAR(p2, 0.5 + z / 6, 1e-6);
      EXPECT_NEAR(p3, 1.0 / 6 + z / 24, 1e-6);
      continue;
    }
    // long-double reference
    const long double Z = z, e = std::exp(Z);
    EXPECT_NEAR(p1, static_cast<double>((e - 1) / Z), 1e-13);
    EXPECT_NEAR(p2, static_cast<double>((e - 1 - Z) / (Z * Z)), 1e-12);
    EXPECT_NEAR(p3, static_cast<double>((e - 1 - Z - Z * Z / 2) / (Z * Z * Z)), 1e-11);
  }
}

TEST(Step, PureStressDecayIsExactPerMode) {
  // u = 0 and k = 0 make the stress equation linear: τ̂(t) = e^{−(η|ξ|²+μ)t} τ̂₀
  const Grid g{2, 16};
  ModelParams p;
  p.eta = 0.7;
  p.mu = 1.3;
  SpectralField tau = dealias(random_spectral(g, Rank::sym_tensor, 3, 5));
  const SimState s(0.0, SpectralField(g, Rank::vector), tau);
  for (Scheme sc : {Scheme::rk2_if, Scheme::rk4_if, Scheme::etd_rk4}) {
    const SimState out = integrate(s, p, 0.1, 1.0, sc);
    SpectralField ref = tau;
    for (int c = 0; c < ref.components(); ++c) {
      auto v = ref.component(c);
      for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) { v[m] *= std::exp(-(0.7 * norm_sq(xi) + 1.3)); });
    }
    EXPECT_LT(max_abs_diff(out.tau, ref), 1e-12 * max_abs_value(tau)) << to_string(sc);
    EXPECT_EQ(l2_norm(out.u), 0.0);
  }
}

TEST(Step, HeatSemigroupForViscousLinearVelocity) {
  // τ = 0, α = 0 and a single Fourier mode: (u·∇)u vanishes for a shear wave
  const Grid g{2, 16};
  ModelParams p;
  p.nu = 0.2;
  p.alpha = 0.0;
  PhysicalField up(g, Rank::vector);
  for_each_point(g, [&](std::size_t q, const std::array<double, 3>& x) { up.component(0)[q] = std::sin(3.0 * x[1]); });
  const SimState s(0.0, transform_forward(up), SpectralField(g, Rank::sym_tensor));
  for (Scheme sc : {Scheme::rk4_if, Scheme::etd_rk4}) {
    const SimState half = integrate(s, p, 0.05, 0.5, sc);
    const SimState full = integrate(half, p, 0.05, 1.0, sc);
    SpectralField ref = s.u;
    ref *= std::exp(-0.2 * 9.0);
    EXPECT_LT(max_abs_diff(full.u, ref), 1e-12 * max_abs_value(s.u)) << to_string(sc);
  }
}

TEST(Step, ConvergenceOrders) {
  const Grid g{2, 16};
  ModelParams p;
  p.k = 1.0;
  p.b = 0.5;
  const SimState s = smooth_state(g, 0.5, 7);
  for (Scheme sc : {Scheme::rk2_if, Scheme::rk4_if, Scheme::etd_rk4}) {
    const SimState a = integrate(s, p, 0.04, 0.4, sc);
    const SimState b = integrate(s, p, 0.02, 0.4, sc);
    const SimState c = integrate(s, p, 0.01, 0.4, sc);
    const double order = std::log2(state_distance(a, b) / state_distance(b, c));
    EXPECT_NEAR(order, scheme_order(sc), 0.35) << to_string(sc);
  }
}

TEST(Step, IsDeterministic) {
  const Grid g{2, 16};
  ModelParams p;
  p.k = 0.5;
  const SimState s = smooth_state(g, 0.3, 8);
  const SimState a = integrate(s, p, 0.05, 0.5, Scheme::etd_rk4);
  const SimState b = integrate(s, p, 0.05, 0.5, Scheme::etd_rk4);
  EXPECT_TRUE(a.u == b.u);
  EXPECT_TRUE(a.tau == b.tau);
}

TEST(Step, KeepsVelocityDivergenceFree) {
  const Grid g{3, 16};
  ModelParams p;
  p.k = 1.0;
  p.b = -0.4;
  const SimState out = integrate(smooth_state(g, 0.5, 9), p, 0.05, 0.2, Scheme::rk4_if);
  EXPECT_LT(divergence_residual(out.u), 1e-13 * l2_norm(out.u));
}

TEST(Step, CorotationalEnergyIsNonIncreasing) {
  const Grid g{2, 32};
  ModelParams p;
  p.k = 2.0;
  p.b = 0.0;
  p.nu = 0.01;
  SimState s = smooth_state(g, 1.0, 10);
  double prev = energy(s, p);
  for (int i = 0; i < 20; ++i) {
    s = step(s, p, 0.02, Scheme::rk4_if);
    const double e = energy(s, p);
    EXPECT_LE(e, prev * (1.0 + 1e-12));
    prev = e;
  }
}

TEST(Step, NonFiniteStateRaisesWithLastGoodState) {
  const Grid g{2, 16};
  ModelParams p;
  p.k = 1.0;
  SimState s = smooth_state(g, 1.0, 11);
  s.u.component(0)[5] = complex(std::numeric_limits<double>::infinity(), 0.0);
  try {
    step(s, p, 0.01);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.last_good().t, s.t);
  }
  EXPECT_THROW(step(smooth_state(g, 1.0, 12), p, 0.0), std::invalid_argument);
}

TEST(Cfl, RespectsBoundsAndZeroState) {
  const Grid g{2, 32};
  ModelParams p;
  p.k = 1.0;
  StepperConfig c;
  c.dt_init = 0.123;
  EXPECT_EQ(cfl_dt(SimState(g), p, c), 0.123);
  const SimState s = smooth_state(g, 5.0, 13);
  const double dt = cfl_dt(s, p, c);
  EXPECT_GT(dt, 0.0);
  EXPECT_LE(dt, c.cfl_safety * g.dx() / max_abs(transform_backward(s.u)) * (1 + 1e-12));
  c.dt_max = 1e-4;
  EXPECT_EQ(cfl_dt(s, p, c), 1e-4);
}

TEST(RunUntil, SnapshotsLandOnCadenceAndEnd) {
  const Grid g{2, 16};
  ModelParams p;
  p.k = 0.3;
  StepperConfig c;
  c.t_end = 1.05;
  c.snapshot_every = 0.25;
  c.scheme = Scheme::etd_rk4;
  std::vector<double> times;
  const SimState out = run_until(smooth_state(g, 0.2, 14), p, c, [&](const SimState& s, const RunInfo&) { times.push_back(s.t); });
  const std::vector<double> expected{0.0, 0.25, 0.5, 0.75, 1.0, 1.05};
  ASSERT_EQ(times.size(), expected.size());
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_NEAR(times[i], expected[i], 1e-12);
  EXPECT_NEAR(out.t, 1.05, 1e-12);
}

TEST(RunUntil, FixedStepSequenceIsIndependentOfCadence) {
  const Grid g{2, 16};
  ModelParams p;
  p.k = 0.3;
  StepperConfig c;
  c.fixed_dt = true;
  c.dt_init = 0.05;
  c.t_end = 1.0;
  c.snapshot_every = 0.1;
  const SimState s = smooth_state(g, 0.2, 15);
  const SimState a = run_until(s, p, c, nullptr);
  c.snapshot_every = 0.35;
  long steps = 0;
  const SimState b = run_until(s, p, c, [&](const SimState&, const RunInfo& r) { steps = r.steps; });
  EXPECT_TRUE(a.u == b.u);
  EXPECT_EQ(steps, 20);
}

TEST(RunUntil, RejectsInvalidConfig) {
  StepperConfig c;
  c.snapshot_every = 0.0;
  EXPECT_THROW(run_until(SimState(Grid{2, 8}), ModelParams{}, c, nullptr), std::invalid_argument);
  ModelParams p;
  p.eta = 0.0;
  EXPECT_THROW(run_until(SimState(Grid{2, 8}), p, StepperConfig{}, nullptr), std::invalid_argument);
}

TEST(Energy, GeneralizedWeightAndDissipation) {
  const Grid g{2, 16};
  ModelParams p;
  p.k = 3.0;
  p.alpha = 2.0;
  p.nu = 0.1;
  const SimState s = smooth_state(g, 1.0, 16);
  EXPECT_NEAR(energy(s, p), 0.5 + 0.5 * 1.5, 1e-12);
  const double expected = 0.1 * std::pow(homogeneous_norm(s.u, 1), 2) +
                          1.5 * (std::pow(homogeneous_norm(s.tau, 1), 2) + std::pow(l2_norm(s.tau), 2));
  EXPECT_NEAR(dissipation_rate(s, p), expected, 1e-12 * expected);
}
