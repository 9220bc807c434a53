// Copyright 2026 The gmusic Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "gmusic/contour.hpp"
#include "gmusic/empirical_spectrum.hpp"
#include "gmusic/errors.hpp"

namespace gmusic {
namespace {

EmpiricalSpectrum toy() {
  return EmpiricalSpectrum::from_eigenpairs(SignalModel::build_canonical(2, 4, 1.0, {}), {2.0, 1.0},
                                            CMatrix::Identity(2, 2));
}

TEST(Secular, TwoByTwo) {
  const auto s = toy();
  ASSERT_EQ(s.omega_hat().size(), 2u);
  // eigenvalues of diag(2, 1) + 0.25 * ones
  EXPECT_NEAR(s.omega_hat()[0], 1.75 + std::sqrt(0.3125), 1e-13);
  EXPECT_NEAR(s.omega_hat()[1], 1.75 - std::sqrt(0.3125), 1e-13);
  EXPECT_NEAR(s.omega_hat()[0], 2.3090170, 1e-7);
  EXPECT_NEAR(s.omega_hat()[1], 1.1909830, 1e-7);
  for (double w : s.omega_hat()) EXPECT_NEAR(s.secular(w), 0.0, 1e-12);
}

TEST(Secular, MatchesDenseEigenvalues) {
  std::mt19937_64 gen(17);
  std::exponential_distribution<double> ex(0.7);
  for (int t = 0; t < 40; ++t) {
    const int M = 3 + t % 17;
    std::vector<double> lam(static_cast<std::size_t>(M));
    for (auto& l : lam) l = ex(gen);
    if (t % 5 == 0) lam.back() = 0.0;
    std::sort(lam.rbegin(), lam.rend());
    const double beta = 0.3 + 0.1 * (t % 4);
    const auto roots = secular_roots(lam, beta);
    Eigen::MatrixXd A = Eigen::MatrixXd::Constant(M, M, beta / M);
    for (int i = 0; i < M; ++i) A(i, i) += lam[static_cast<std::size_t>(i)];
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues();
    for (int i = 0; i < M; ++i) EXPECT_NEAR(roots[static_cast<std::size_t>(i)], ev(M - 1 - i), 1e-11);
  }
}

TEST(EmpiricalStieltjes, Values) {
  const auto s = toy();
  const auto e = empirical_stieltjes(s, 4.0);
  EXPECT_NEAR(e.m_hat.real(), -0.4166666666666667, 1e-14);
  EXPECT_NEAR(e.w_hat.real(), 2.111111111111111, 1e-12);
  EXPECT_THROW(empirical_stieltjes(s, 2.0), DomainError);
  const auto lit = empirical_stieltjes(s, 4.0, WHatForm::Literal);
  EXPECT_NE(lit.w_hat, e.w_hat);
}

TEST(EmpiricalStieltjes, DerivativeByFiniteDifference) {
  const auto s = toy();
  const Complex z(3.1, 0.4), h(1e-6, 0.0);
  const auto a = empirical_stieltjes(s, z + h), b = empirical_stieltjes(s, z - h);
  const auto e = empirical_stieltjes(s, z);
  EXPECT_LT(std::abs((a.w_hat - b.w_hat) / (2.0 * h) - e.w_hat_prime), 1e-7);
  EXPECT_LT(std::abs((a.m_hat - b.m_hat) / (2.0 * h) - e.m_hat_prime), 1e-7);
}

TEST(Decompose, Invariants) {
  const auto model = SignalModel::build_canonical(10, 20, 1.0, {10, 10, 10, 5, 5});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = sample_realization(model, seed);
    const auto s = EmpiricalSpectrum::decompose(model, r);
    const auto& l = s.lambda_hat();
    const auto& o = s.omega_hat();
    EXPECT_TRUE(std::is_sorted(l.rbegin(), l.rend()));
    EXPECT_GE(l.back(), 0.0);
    const CMatrix& U = s.u_hat();
    EXPECT_LT((U.adjoint() * U - CMatrix::Identity(10, 10)).norm(), 1e-12);
    const double tr = std::accumulate(l.begin(), l.end(), 0.0);
    EXPECT_NEAR(tr, r.sigma_matrix.squaredNorm(), 1e-10 * tr);
    EXPECT_NEAR(std::accumulate(o.begin(), o.end(), 0.0), tr + 0.5, 1e-10 * tr);
    EXPECT_GT(o[0], l[0]);
    for (std::size_t k = 1; k < l.size(); ++k) {
      EXPECT_GT(o[k], l[k]);
      EXPECT_LT(o[k], l[k - 1]);
    }
    for (double w : o) EXPECT_NEAR(s.secular(w), 0.0, 1e-9);
  }
}

TEST(Confinement, ThreeClusterTypicalDraw) {
  const auto model = SignalModel::build_canonical(10, 20, 1.0, {10, 10, 10, 5, 5});
  const AsymptoticSpectrum a(model);
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(model, sample_realization(model, seed));
    ok += confinement_check(s, a.support()).all();
  }
  EXPECT_GE(ok, 40);
}

TEST(Confinement, SubThresholdSpikeIsNotSeparated) {
  const auto model = SignalModel::build_canonical(10, 20, 1.0, {0.3});
  const AsymptoticSpectrum a(model);
  EXPECT_FALSE(a.support().separated());
  const auto s = EmpiricalSpectrum::decompose(model, sample_realization(model, 1));
  EXPECT_FALSE(confinement_check(s, a.support()).signal_eigenvalues);
}

TEST(Confinement, PureNoiseHasNoSignalPart) {
  const auto model = SignalModel::build_canonical(10, 20, 1.0, {});
  const AsymptoticSpectrum a(model);
  const auto s = EmpiricalSpectrum::decompose(model, sample_realization(model, 3));
  const auto v = confinement_check(s, a.support());
  EXPECT_TRUE(v.signal_eigenvalues);
  EXPECT_TRUE(v.signal_omegas);
}

TEST(Confinement, PureNoiseSmallDimension) {
  const auto model = SignalModel::build_canonical(10, 20, 1.0, {});
  const AsymptoticSpectrum a(model);
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(model, sample_realization(model, seed));
    ok += confinement_check(s, a.support()).all();
  }
  EXPECT_GE(ok, 990);
}

TEST(Decompose, SpikedEigenvaluesNearTheirLimits) {
  const auto model = SignalModel::build_canonical(160, 320, 1.0, {6, 5});
  const auto sp = spiked_pack(model);
  EXPECT_NEAR(sp.limits[0], 91.0 / 12.0, 1e-12);
  EXPECT_NEAR(sp.limits[1], 6.6, 1e-12);
  int ok = 0, first = 0, second = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(model, sample_realization(model, seed));
    const bool a = std::abs(s.lambda_hat()[0] / sp.limits[0] - 1) < 0.05;
    const bool b = std::abs(s.lambda_hat()[1] / sp.limits[1] - 1) < 0.05;
    first += a;
    second += b;
    ok += a && b;
  }
  EXPECT_GE(ok, 190) << "top " << first << ", second " << second;
}

double median_sup_error(int M) {
  const auto model = SignalModel::build_canonical(M, 2 * M, 1.0, {6, 5});
  const AsymptoticSpectrum a(model);
  const auto nodes = contour_build(a.support(), 16).nodes();
  std::vector<double> errs;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(model, sample_realization(model, seed));
    double e = 0.0;
    for (const auto& n : nodes)
      e = std::max(e, std::abs(empirical_stieltjes(s, n.z).w_hat - a.solve(n.z).w));
    errs.push_back(e);
  }
  std::nth_element(errs.begin(), errs.begin() + 20, errs.end());
  return errs[20];
}

TEST(EmpiricalStieltjes, ConvergesToTheLimit) {
  EXPECT_LT(median_sup_error(160), 0.5 * median_sup_error(20));
}

}  // namespace
}  // namespace gmusic
