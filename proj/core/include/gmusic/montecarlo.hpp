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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gmusic/model.hpp"

namespace gmusic {

enum class EstimatorKind { Improved, Traditional };
enum class StatisticKind { Quadratic, BilinearReal, Bivariate };

const char* to_string(EstimatorKind k);
const char* to_string(StatisticKind k);

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 values
  std::vector<std::int64_t> counts;
};

struct TrialOptions {
  int trials = 20000;
  std::uint64_t master_seed = 1;
  EstimatorKind estimator = EstimatorKind::Improved;
  StatisticKind statistic = StatisticKind::Quadratic;
  int threads = 1;
  int nodes_per_side = 128;
  int histogram_bins = 60;
  // Traditional estimator only: centre on eta instead of its own limit.
  bool center_on_true_eta = false;
};

struct CltReport {
  int trials = 0;
  EstimatorKind estimator = EstimatorKind::Improved;
  StatisticKind statistic = StatisticKind::Quadratic;
  std::uint64_t master_seed = 0;

  Complex target;                 // eta, or the traditional limit
  Eigen::Matrix2d gamma = Eigen::Matrix2d::Zero();
  double predicted_variance = 0.0;
  double empirical_raw_variance = 0.0;
  double raw_mean = 0.0;

  SampleSummary summary;          // standardized statistic (first coordinate)
  double ks_distance = 0.0;
  Histogram histogram;

  // Bivariate whitened statistic only.
  std::optional<SampleSummary> summary_second;
  std::optional<double> ks_distance_second;
  std::optional<double> correlation;

  int confined_trials = 0;        // trials whose sample spectrum split as expected
  std::vector<double> standardized;
};

// Seeded Monte Carlo of sqrt(N) Re(xi (eta_est - target)) standardized by
// the predicted variance. Results are bit-identical for a given master seed
// whatever the number of threads.
CltReport run_trials(const SignalModel& model, const SubspaceQuery& q, const TrialOptions& options);

// Kolmogorov distance between the empirical CDF and the standard normal.
double ks_normal(std::vector<double> samples);

SampleSummary summarize(std::span<const double> x);
Histogram make_histogram(std::span<const double> x, int bins);
double normal_pdf(double x);

}  // namespace gmusic
