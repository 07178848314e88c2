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

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <random>

#include "oldroyd/linear_oracle.hpp"
#include "test_support.hpp"

using namespace oldroyd;
using oldroyd::testing::max_abs_diff;
using oldroyd::testing::max_abs_value;
using oldroyd::testing::random_divfree;
using oldroyd::testing::random_spectral;

namespace {

using EMat = Eigen::MatrixXcd;

EMat to_eigen(const linear::Matrix& m) {
  EMat e(m.size(), m.size());
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) e(i, j) = m(i, j);
  return e;
}

linear::Matrix random_matrix(int n, double scale, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  linear::Matrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * complex(g(rng), g(rng));
  return m;
}

double max_diff(const linear::Matrix& a, const EMat& b) {
  double d = 0.0;
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

// Greedy nearest matching of two eigenvalue lists; returns the worst distance.
double match_spectra(std::vector<complex> a, std::vector<complex> b) {
  EXPECT_EQ(a.size(), b.size());
  double worst = 0.0;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](complex p, complex q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

std::vector<complex> eigen_eigenvalues(const linear::Matrix& m) {
  Eigen::ComplexEigenSolver<EMat> es(to_eigen(m));
  std::vector<complex> out;
  for (int i = 0; i < m.size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

}  // namespace

TEST(Expm, MatchesEigenMatrixExponential) {
  for (double scale : {1e-3, 0.3, 2.0, 15.0}) {
    const auto m = random_matrix(5, scale, static_cast<unsigned>(scale * 1000));
    const EMat ref = to_eigen(m).exp();
    EXPECT_LT(max_diff(linear::expm(m), ref), 1e-11 * ref.cwiseAbs().maxCoeff()) << scale;
  }
}

TEST(Expm, SemigroupAndIdentity) {
  const auto m = random_matrix(4, 0.8, 3);
  const auto e1 = linear::expm(m);
  const auto e2 = linear::expm(complex(2.0, 0.0) * m);
  EXPECT_LT(max_diff(e1 * e1, to_eigen(e2)), 1e-12 * e2.norm_inf());
  EXPECT_LT(max_diff(linear::expm(linear::Matrix(3)), EMat::Identity(3, 3)), 1e-15);
}

TEST(Solve, InvertsAndRejectsSingular) {
  const auto a = random_matrix(5, 1.0, 4);
  const auto x = linear::solve(a, linear::Matrix::identity(5));
  EXPECT_LT(max_diff(a * x, EMat::Identity(5, 5)), 1e-12);
  EXPECT_THROW(linear::solve(linear::Matrix(3), linear::Matrix::identity(3)), std::runtime_error);
}

TEST(QuadraticRoots, MatchCompanionMatrix) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const complex b(g(rng), g(rng)), c(g(rng), g(rng));
    EMat comp(2, 2);
    comp << -b, -c, 1.0, 0.0;
    Eigen::ComplexEigenSolver<EMat> es(comp);
    const auto [r1, r2] = linear::quadratic_roots(b, c);
    EXPECT_LT(match_spectra({r1, r2}, {es.eigenvalues()(0), es.eigenvalues()(1)}), 1e-10 * (1 + std::abs(b) + std::abs(c)));
  }
  // cancellation-prone case: tiny c
  const auto [big, small] = linear::quadratic_roots(2.0, 1e-20);
  EXPECT_NEAR(small.real(), -5e-21, 1e-33);
  EXPECT_NEAR(big.real(), -2.0, 1e-15);
}

TEST(ModeMatrix, EigenvaluesMatchAnalyticBlocks) {
  for (int dim : {2, 3}) {
    for (double k : {0.0, 0.05, 1.0, 10.0}) {
      for (double nu : {0.0, 0.3}) {
        ModelParams p;
        p.k = k;
        p.nu = nu;
        p.eta = 0.8;
        p.mu = 1.2;
        p.alpha = 1.5;
        const Wavevector xi = dim == 2 ? Wavevector{2, -1, 0} : Wavevector{1, 2, -2};
        const auto sys = linear::mode_matrix(xi, p, dim);
        auto expected = linear::eigenvalues(sys);
        expected.emplace_back(-nu * norm_sq(xi), 0.0);  // longitudinal û·ξ, outside the physical subspace
        const double err = match_spectra(eigen_eigenvalues(sys.matrix), expected);
        EXPECT_LT(err, 1e-7) << "dim=" << dim << " k=" << k << " nu=" << nu;
      }
    }
  }
}

TEST(ModeMatrix, DecoupledLimitHasNeutralTransverseModes) {
  ModelParams p;
  for (int dim : {2, 3}) {
    const auto ev = linear::eigenvalues_at(1.0, p, dim);
    int zeros = 0;
    for (const auto& e : ev) zeros += std::abs(e) < 1e-14;
    EXPECT_EQ(zeros, dim - 1);
    EXPECT_EQ(static_cast<int>(ev.size()), linear::mode_size(dim) - 1);
  }
}

TEST(ModeMatrix, SmallCouplingRateApproachesQuarterK) {
  ModelParams p;
  for (double k : {1e-4, 1e-3}) {
    p.k = k;
    const double rate = linear::slowest_decay_rate(p, 10.0, 2);
    EXPECT_NEAR(rate / k, 0.25, 2 * k);
    // rate at a single shell |ξ|² = s: (k/2) s / (s + 1) to first order
    const double r2 = -linear::eigenvalues_at(4.0, p, 2).front().real();
    EXPECT_NEAR(r2 / k, 0.5 * 4.0 / 5.0, 2 * k);
  }
  EXPECT_THROW(linear::slowest_decay_rate(p, 0.5), std::invalid_argument);
}

TEST(ModeMatrix, MatchesComposedSpectralOperators) {
  // M applied to a single mode equals the linear part of the model built
  // from the field operators: P(k div τ) + νΔu and αD(u) − (−ηΔ + μ)τ.
  for (int dim : {2, 3}) {
    const Grid g{dim, 8};
    ModelParams p;
    p.k = 0.7;
    p.nu = 0.2;
    p.eta = 0.9;
    p.mu = 1.1;
    p.alpha = 1.3;
    const SpectralField u = random_spectral(g, Rank::vector, 6, 3);
    const SpectralField tau = random_spectral(g, Rank::sym_tensor, 7, 3);
    SpectralField du = leray_project(p.k * divergence_tensor(tau));
    du.axpy(p.nu, laplacian(u));
    SpectralField dtau = p.alpha * deformation(u);
    dtau.axpy(p.eta, laplacian(tau));
    dtau.axpy(-p.mu, tau);
    double worst = 0.0;
    for_each_mode(g, [&](std::size_t m, const Wavevector& xi, double) {
      if (norm_sq(xi) == 0.0) return;
      for (int a = 0; a < dim; ++a)
        if (g.is_nyquist(xi[a])) return;
      std::vector<complex> v;
      for (int i = 0; i < dim; ++i) v.push_back(u.component(i)[m]);
      for (int c = 0; c < tau.components(); ++c) v.push_back(tau.component(c)[m]);
      const auto sys = linear::mode_matrix(xi, p, dim);
      const auto w = sys.matrix.apply(v);
      for (int i = 0; i < dim; ++i) worst = std::max(worst, std::abs(w[static_cast<std::size_t>(i)] - du.component(i)[m]));
      for (int c = 0; c < tau.components(); ++c)
        worst = std::max(worst, std::abs(w[static_cast<std::size_t>(dim + c)] - dtau.component(c)[m]));
    });
    EXPECT_LT(worst, 1e-10 * (max_abs_value(u) + max_abs_value(tau)) * 10) << dim;
  }
}

TEST(EvolveLinear, SemigroupAndZeroTime) {
  const Grid g{2, 16};
  ModelParams p;
  p.k = 0.5;
  SimState s(0.0, random_divfree(g, 8, 4), random_spectral(g, Rank::sym_tensor, 9, 4));
  const SimState a = linear::evolve_linear(linear::evolve_linear(s, p, 0.3), p, 0.4);
  const SimState b = linear::evolve_linear(s, p, 0.7);
  EXPECT_LT(max_abs_diff(a.u, b.u), 1e-11 * max_abs_value(s.u));
  EXPECT_LT(max_abs_diff(a.tau, b.tau), 1e-11 * max_abs_value(s.tau));
  EXPECT_NEAR(b.t, 0.7, 1e-15);
  const SimState z = linear::evolve_linear(s, p, 0.0);
  EXPECT_TRUE(z.u == s.u);
  EXPECT_LT(divergence_residual(b.u), 1e-12 * l2_norm(b.u));
}

TEST(EvolveLinear, ErrorsOnBadInputs) {
  ModelParams p;
  EXPECT_THROW(linear::mode_matrix({0, 0, 0}, p, 2), std::invalid_argument);
  EXPECT_THROW(linear::mode_matrix({1, 0, 0}, p, 4), std::invalid_argument);
  const auto sys = linear::mode_matrix({1, 0, 0}, p, 2);
  EXPECT_THROW(linear::evolve_exact(sys, std::vector<complex>(5), -1.0), std::invalid_argument);
}
