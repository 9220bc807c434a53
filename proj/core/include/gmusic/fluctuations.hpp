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

#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gmusic/asymptotic_spectrum.hpp"
#include "gmusic/contour.hpp"
#include "gmusic/model.hpp"

namespace gmusic {

// Second-order kernels at a pair of points off the support.
struct KernelPack {
  Complex z1, z2;
  Complex u;
  Complex v;
  Complex vtilde;
  Complex s;
  Complex r;
  Complex delta;           // (1 - u)^2 - z1 z2 v vtilde
  Complex delta_quotient;  // (z1 - z2) / (w1 - w2), or 1 / w'(z) when z1 ~ z2
  // theta(lk, ll) = theta1 + lk ll theta2 + (lk + ll) theta3
  Complex theta1;
  Complex theta2;
  Complex theta3;

  Complex theta(double lk, double ll) const { return theta1 + lk * ll * theta2 + (lk + ll) * theta3; }

  // Largest violation among the identities s + r = z1 z2 vtilde and
  // delta = delta_quotient (both relative), |u| < 1 and
  // |delta / (1 - u)^2 - 1| < 1. Returns an empty string when all hold.
  std::string violation(double identity_tol = 1e-9, double quotient_tol = 1e-8) const;
};

// Throws NumericalError if delta and its quotient form differ beyond 1e-6.
KernelPack kernel_pack(const SignalModel& model, const WPoint& p1, const WPoint& p2);

enum class VarianceMethod { Numeric, SpikedClosed, TradNumeric, TradClosed };
const char* to_string(VarianceMethod m);

// Variance coefficients indexed by eigenvalue level: levels 0..L-1 are the
// distinct signal eigenvalues (descending), level L is the noise eigenspace.
struct VarianceTable {
  VarianceMethod method = VarianceMethod::Numeric;
  std::vector<double> level_lambda;
  Eigen::MatrixXd values;  // NaN where a pair was not requested
  int nodes_per_side = 0;
  double max_imag = 0.0;   // largest imaginary residue before truncation

  int levels() const noexcept { return static_cast<int>(level_lambda.size()); }
  bool has(int a, int b) const;
  double at_level(int a, int b) const;
  // 1-based eigen-index of the model (indices above K are noise).
  double at(const SignalModel& model, int k, int l) const;
};

struct VarianceOptions {
  int nodes_per_side = 128;
  int max_nodes_per_side = 1024;
  int threads = 1;
  bool check_kernels = false;
  std::vector<int> levels;  // empty: every level
};

int level_of_index(const SignalModel& model, int k);

VarianceTable variance_table(const AsymptoticSpectrum& spectrum, const RectContour& contour,
                             VarianceMethod method, const VarianceOptions& options = {});

double vartheta_numeric(const AsymptoticSpectrum& spectrum, const RectContour& contour, int k,
                        int l, int nodes_per_side = 128);
double vartheta_spiked(const SignalModel& model, int k, int l);
double vartheta_trad(const AsymptoticSpectrum& spectrum, const RectContour& contour, int k, int l,
                     bool closed, int nodes_per_side = 128);

// Closed forms in terms of eigenvalues; 0 stands for the noise level.
double vartheta_spiked_value(double sigma2, double c, double lk, double ll);
double vartheta_trad_closed_value(double sigma2, double c, double lk, double ll);

// Levels whose projector touches d1 or d2.
std::vector<int> required_levels(const SignalModel& model, const SubspaceQuery& q);

struct CovarianceAssembly {
  Eigen::Matrix2d gamma = Eigen::Matrix2d::Zero();
  std::map<std::pair<int, int>, Eigen::Matrix2d> per_pair;  // by level
  // eta_proj[level] = {d1* P d1, d1* P d2, d2* P d2}
  std::vector<std::array<Complex, 3>> eta_proj;
  double sum_11_22 = 0.0;
  Complex sum_12_12 = 0.0;

  Complex eta(int i, int j, int level) const;
};

CovarianceAssembly gamma_assemble(const SignalModel& model, const SubspaceQuery& q,
                                  const VarianceTable& table);

struct MsePrediction {
  double variance = 0.0;  // of sqrt(N) Re(xi (eta_hat - eta))
  bool nondegenerate = false;
  double min_eigenvalue = 0.0;
  double mse = 0.0;       // E|eta_hat - eta|^2 ~ tr(Gamma) / N
};

MsePrediction mse_predict(const CovarianceAssembly& assembly, Complex xi, int N);

// 2 sum_{k,l} theta(k,l) |d* u_k|^2 |d* u_l|^2.
double quadratic_form_variance(const SignalModel& model, const CVector& d, const VarianceTable& table);

}  // namespace gmusic
