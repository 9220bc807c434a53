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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gmusic/errors.hpp"
#include "gmusic/fluctuations.hpp"

namespace gmusic {
namespace {

struct TwoSpike {
  SignalModel model = SignalModel::build_canonical(20, 40, 1.0, {6, 5});
  AsymptoticSpectrum spectrum{model};
  RectContour contour = contour_build(spectrum.support(), 128);
};

const VarianceTable& two_spike_table() {
  static const VarianceTable t = [] {
    TwoSpike f;
    return variance_table(f.spectrum, f.contour, VarianceMethod::Numeric);
  }();
  return t;
}

TEST(Kernel, PureNoiseDeterminant) {
  const auto model = SignalModel::build_canonical(100, 200, 1.0, {});
  const AsymptoticSpectrum a(model);
  const auto p = a.solve(3.0);
  const auto k = kernel_pack(model, p, p);
  EXPECT_NEAR(k.delta.real(), 0.5, 1e-10);
  EXPECT_NEAR(k.delta_quotient.real(), 0.5, 1e-10);
  const auto q = a.solve(Complex(3.5, 0.2));
  const auto k2 = kernel_pack(model, p, q);
  // 1 - sigma^4 c / (w1 w2)
  EXPECT_LT(std::abs(k2.delta - (1.0 - 0.5 / (p.w * q.w))), 1e-10);
}

TEST(Kernel, IdentitiesOnContourPairs) {
  TwoSpike f;
  const auto nodes = f.contour.nodes(16);
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  for (int t = 0; t < 100; ++t) {
    const auto p1 = f.spectrum.solve(nodes[pick(gen)].z);
    const auto p2 = f.spectrum.solve(nodes[pick(gen)].z);
    const auto a = kernel_pack(f.model, p1, p2);
    const auto b = kernel_pack(f.model, p2, p1);
    EXPECT_EQ(a.violation(), "");
    EXPECT_LT(std::abs(a.s + a.r - p1.z * p2.z * a.vtilde), 1e-9 * std::abs(a.s + a.r));
    EXPECT_LT(std::abs(a.u), 1.0);
    for (auto [x, y] : {std::pair{a.u, b.u}, {a.v, b.v}, {a.vtilde, b.vtilde}, {a.delta, b.delta},
                        {a.theta1, b.theta1}, {a.theta2, b.theta2}, {a.theta3, b.theta3}})
      EXPECT_LT(std::abs(x - y), 1e-12 * std::max(1.0, std::abs(x)));
  }
}

TEST(SpikedVariance, ClosedForms) {
  EXPECT_NEAR(vartheta_spiked_value(1.0, 0.5, 5, 5), 0.5 * 36 * 25.5 / (2 * std::pow(24.5, 3)), 1e-15);
  EXPECT_NEAR(vartheta_spiked_value(1.0, 0.5, 5, 5), 0.0156057, 1e-7);
  EXPECT_NEAR(vartheta_spiked_value(1.0, 0.5, 5, 0), 6.0 / 49.0, 1e-15);
  EXPECT_EQ(vartheta_spiked_value(1.0, 0.5, 0, 0), 0.0);
  const auto m = SignalModel::build_canonical(20, 40, 1.0, {6, 5});
  EXPECT_EQ(vartheta_spiked(m, 20, 19), 0.0);
  EXPECT_EQ(vartheta_spiked(m, 1, 2), vartheta_spiked(m, 2, 1));
  EXPECT_THROW(vartheta_spiked_value(1.0, 0.5, 0.5, 5), SeparationError);
}

TEST(TraditionalVariance, ClosedForms) {
  EXPECT_NEAR(vartheta_trad_closed_value(1.0, 0.5, 5, 0), 6 * 24.5 / (2 * 25 * 30.25), 1e-15);
  EXPECT_NEAR(vartheta_trad_closed_value(1.0, 0.5, 5, 0), 0.0971901, 1e-7);
  EXPECT_EQ(vartheta_trad_closed_value(1.0, 0.5, 0, 0), 0.0);
  EXPECT_NEAR(vartheta_trad_closed_value(1.0, 0.5, 5, 10), vartheta_trad_closed_value(1.0, 0.5, 10, 5),
              1e-15);
}

TEST(NumericVariance, TwoSpikeTableProperties) {
  const auto& t = two_spike_table();
  ASSERT_EQ(t.levels(), 3);
  EXPECT_LE(t.max_imag, 1e-8);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      EXPECT_EQ(t.at_level(a, b), t.at_level(b, a));
      EXPECT_GE(t.at_level(a, b), -1e-10);
    }
  EXPECT_NEAR(t.at_level(0, 0), 0.0090598, 1e-6);
  EXPECT_NEAR(t.at_level(1, 1), 0.0140835, 1e-6);
  EXPECT_NEAR(t.at_level(1, 2), 0.1229427, 1e-6);
  EXPECT_NEAR(t.at_level(2, 2), 0.00125804, 1e-7);
}

TEST(NumericVariance, LowerBounds) {
  const auto& t = two_spike_table();
  const double M = 20, N = 40, K = 2;
  const double l[] = {6.0, 5.0};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) EXPECT_GE(t.at_level(a, b), (M - K) / N / (2 * l[a] * l[b]) - 1e-9);
    EXPECT_GE(t.at_level(a, 2), 1.0 / (2 * l[a]) - 1e-9);
  }
  EXPECT_GE(t.at_level(2, 2), (1 / (2 * N)) * (1 / 36.0 + 1 / 25.0) - 1e-9);
}

TEST(NumericVariance, EqualEigenvaluesShareValues) {
  const auto model = SignalModel::build_canonical(12, 24, 1.0, {7, 7, 4});
  const AsymptoticSpectrum a(model);
  const auto t = variance_table(a, contour_build(a.support(), 64), VarianceMethod::Numeric);
  EXPECT_EQ(t.at(model, 1, 3), t.at(model, 2, 3));
  EXPECT_EQ(t.at(model, 5, 1), t.at(model, 12, 2));
}

TEST(NumericVariance, KernelCheckMode) {
  TwoSpike f;
  VarianceOptions opt;
  opt.nodes_per_side = 32;
  opt.check_kernels = true;
  EXPECT_NO_THROW(variance_table(f.spectrum, f.contour, VarianceMethod::Numeric, opt));
}

TEST(NumericVariance, ThreadCountDoesNotChangeValues) {
  TwoSpike f;
  VarianceOptions one, three;
  three.threads = 3;
  const auto a = variance_table(f.spectrum, f.contour, VarianceMethod::TradNumeric, one);
  const auto b = variance_table(f.spectrum, f.contour, VarianceMethod::TradNumeric, three);
  EXPECT_TRUE(a.values == b.values);
}

TEST(Gamma, SignalEigenvector) {
  const auto model = SignalModel::build_canonical(20, 40, 1.0, {6, 5});
  const auto q = SubspaceQuery::canonical(20, 1, 1);
  const auto g = gamma_assemble(model, q, two_spike_table());
  ASSERT_EQ(g.per_pair.size(), 1u);
  const Eigen::Matrix2d& p = g.per_pair.begin()->second;
  EXPECT_NEAR(p(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(p.cwiseAbs().sum(), 2.0, 1e-15);
}

TEST(Gamma, NoiseDirections) {
  const auto model = SignalModel::build_canonical(20, 40, 1.0, {6, 5});
  const auto& t = two_spike_table();
  const double v = t.at(model, 20, 20);
  const auto g = gamma_assemble(model, SubspaceQuery::canonical(20, 20, 20), t);
  EXPECT_NEAR(g.gamma(0, 0), 2 * v, 1e-15);
  EXPECT_NEAR(g.gamma(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(g.gamma(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(quadratic_form_variance(model, SubspaceQuery::canonical(20, 20, 20).d1(), t), 2 * v, 1e-15);

  const auto b = gamma_assemble(model, SubspaceQuery::canonical(20, 20, 19), t);
  EXPECT_NEAR(b.gamma(0, 0), v, 1e-15);
  EXPECT_NEAR(b.gamma(1, 1), v, 1e-15);
  EXPECT_NEAR(b.gamma(0, 1), 0.0, 1e-15);
}

TEST(Gamma, PerPairNonNegativeDefinite) {
  const auto model = SignalModel::build_canonical(20, 40, 1.0, {6, 5});
  std::mt19937_64 gen(2);
  std::normal_distribution<double> gd;
  for (int t = 0; t < 20; ++t) {
    CVector d1(20), d2(20);
    for (int i = 0; i < 20; ++i) {
      d1(i) = Complex(gd(gen), gd(gen));
      d2(i) = Complex(gd(gen), gd(gen));
    }
    const auto g = gamma_assemble(model, SubspaceQuery(d1, d2), two_spike_table());
    EXPECT_NEAR(g.gamma(0, 1), g.gamma(1, 0), 1e-14);
    for (const auto& [key, m] : g.per_pair) {
      const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues();
      EXPECT_GE(ev.minCoeff(), -1e-12 * std::max(1.0, m.norm()));
    }
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(g.gamma).eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(Gamma, IncompleteTableIsRejected) {
  TwoSpike f;
  VarianceOptions opt;
  opt.levels = {0};
  opt.nodes_per_side = 32;
  const auto t = variance_table(f.spectrum, f.contour, VarianceMethod::Numeric, opt);
  EXPECT_THROW(gamma_assemble(f.model, SubspaceQuery::canonical(20, 20, 20), t), ConfigError);
}

TEST(Mse, DirectionOfXi) {
  const auto model = SignalModel::build_canonical(20, 40, 1.0, {6, 5});
  CVector d = CVector::Zero(20);
  d(0) = 0.6;
  d(19) = 0.8;
  const auto g = gamma_assemble(model, SubspaceQuery(d, d), two_spike_table());
  EXPECT_NEAR(mse_predict(g, 1.0, 40).variance, g.gamma(0, 0), 1e-15);
  EXPECT_NEAR(mse_predict(g, Complex(0, 1), 40).variance, g.gamma(1, 1), 1e-15);
  EXPECT_NEAR(mse_predict(g, 1.0, 40).mse, g.gamma.trace() / 40, 1e-15);
}

TEST(Mse, NoiseEigenvectorUnderSpikedTableIsDegenerate) {
  TwoSpike f;
  const auto t = variance_table(f.spectrum, f.contour, VarianceMethod::SpikedClosed);
  const auto g = gamma_assemble(f.model, SubspaceQuery::canonical(20, 20, 20), t);
  const auto p = mse_predict(g, 1.0, 40);
  EXPECT_EQ(p.variance, 0.0);
  EXPECT_FALSE(p.nondegenerate);
}

TEST(Levels, RequiredByQuery) {
  const auto model = SignalModel::build_canonical(20, 40, 1.0, {6, 5});
  EXPECT_EQ(required_levels(model, SubspaceQuery::canonical(20, 20, 19)), std::vector<int>{2});
  EXPECT_EQ(required_levels(model, SubspaceQuery::canonical(20, 1, 20)), (std::vector<int>{0, 2}));
  EXPECT_EQ(level_of_index(model, 2), 1);
  EXPECT_THROW(level_of_index(model, 21), ConfigError);
}

}  // namespace
}  // namespace gmusic
