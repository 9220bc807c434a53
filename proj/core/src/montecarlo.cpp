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

#include "gmusic/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "gmusic/asymptotic_spectrum.hpp"
#include "gmusic/contour.hpp"
#include "gmusic/empirical_spectrum.hpp"
#include "gmusic/errors.hpp"
#include "gmusic/estimators.hpp"
#include "gmusic/fluctuations.hpp"

namespace gmusic {

const char* to_string(EstimatorKind k) {
  return k == EstimatorKind::Improved ? "improved" : "traditional";
}

const char* to_string(StatisticKind k) {
  switch (k) {
    case StatisticKind::Quadratic: return "quadratic";
    case StatisticKind::BilinearReal: return "bilinear-real";
    case StatisticKind::Bivariate: return "bivariate";
  }
  return "unknown";
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double ks_normal(std::vector<double> samples) {
  if (samples.size() < 100) throw ConfigError("the Kolmogorov distance needs at least 100 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-samples[i] / std::numbers::sqrt2);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

SampleSummary summarize(std::span<const double> x) {
  SampleSummary s;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return s;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  s.mean = mean;
  s.variance = x.size() > 1 ? m2 / (n - 1.0) : 0.0;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  s.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return s;
}

Histogram make_histogram(std::span<const double> x, int bins) {
  if (bins <= 0) throw ConfigError("histogram needs at least one bin");
  Histogram h;
  double lo = *std::min_element(x.begin(), x.end());
  double hi = *std::max_element(x.begin(), x.end());
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + b * width);
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : x) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

CltReport run_trials(const SignalModel& model, const SubspaceQuery& q, const TrialOptions& opt) {
  if (opt.trials <= 0) throw ConfigError("trials must be positive");
  if (opt.trials < 100) throw ConfigError("at least 100 trials are needed for the normality check");
  if (q.size() != model.M()) throw ConfigError("probe vector length does not match M");
  if (opt.statistic == StatisticKind::Quadratic && q.d1() != q.d2()) {
    throw ConfigError("the quadratic statistic needs d1 == d2");
  }

  const AsymptoticSpectrum spectrum(model);
  const SpectralSupport& support = spectrum.support();
  if (!support.separated() || model.K() == 0) {
    throw SeparationError("separation conditions fail; the CLT experiment is undefined");
  }
  const RectContour contour = contour_build(support, opt.nodes_per_side);
  const bool improved = opt.estimator == EstimatorKind::Improved;

  VarianceOptions vopt;
  vopt.nodes_per_side = opt.nodes_per_side;
  vopt.threads = opt.threads;
  vopt.levels = required_levels(model, q);
  const VarianceTable table = variance_table(
      spectrum, contour, improved ? VarianceMethod::Numeric : VarianceMethod::TradNumeric, vopt);
  const CovarianceAssembly cov = gamma_assemble(model, q, table);

  CltReport rep;
  rep.trials = opt.trials;
  rep.estimator = opt.estimator;
  rep.statistic = opt.statistic;
  rep.master_seed = opt.master_seed;
  rep.gamma = cov.gamma;
  rep.target = improved || opt.center_on_true_eta ? eta_true(model, q)
                                                  : eta_traditional_limit(spectrum, contour, q);

  const Complex xi = opt.statistic == StatisticKind::BilinearReal ? q.xi() : Complex(1.0);
  const MsePrediction pred = mse_predict(cov, xi, model.N());
  rep.predicted_variance =
      opt.statistic == StatisticKind::Bivariate ? cov.gamma(0, 0) : pred.variance;
  if (opt.statistic == StatisticKind::Bivariate) {
    if (!pred.nondegenerate) {
      throw ConfigError("degenerate predicted covariance: the bivariate statistic cannot be whitened");
    }
  } else if (!(rep.predicted_variance > 1e-14)) {
    std::ostringstream os;
    os << "degenerate predicted variance (" << rep.predicted_variance
       << "): fluctuations are faster than 1/sqrt(N) for this query";
    throw ConfigError(os.str());
  }

  // Trials are independent; each owns a derived stream and writes its slot.
  std::vector<Complex> est(static_cast<std::size_t>(opt.trials));
  std::vector<char> confined(static_cast<std::size_t>(opt.trials), 0);
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto work = [&] {
    while (true) {
      const int t = next.fetch_add(1);
      if (t >= opt.trials) return;
      {
        std::lock_guard<std::mutex> lock(err_mu);
        if (err) return;
      }
      try {
        const Realization r =
            sample_realization(model, derive_stream_seed(opt.master_seed, static_cast<std::uint64_t>(t)));
        const EmpiricalSpectrum spec = EmpiricalSpectrum::decompose(model, r);
        confined[static_cast<std::size_t>(t)] = confinement_check(spec, support).all();
        est[static_cast<std::size_t>(t)] =
            improved ? eta_improved(spec, contour, q, ImprovedMethod::Residue).value
                     : eta_traditional(spec, q);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  const int workers = std::clamp(opt.threads, 1, opt.trials);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (err) std::rethrow_exception(err);

  const double rootN = std::sqrt(static_cast<double>(model.N()));
  std::vector<double> raw(est.size());
  std::vector<double> second;
  rep.standardized.resize(est.size());
  for (char c : confined) rep.confined_trials += c;

  if (opt.statistic == StatisticKind::Bivariate) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov.gamma);
    const Eigen::Matrix2d white = es.operatorInverseSqrt();
    second.resize(est.size());
    for (std::size_t t = 0; t < est.size(); ++t) {
      const Complex d = est[t] - rep.target;
      const Eigen::Vector2d y = white * Eigen::Vector2d(rootN * d.real(), -rootN * d.imag());
      raw[t] = rootN * d.real();
      rep.standardized[t] = y(0);
      second[t] = y(1);
    }
  } else {
    const double sd = std::sqrt(rep.predicted_variance);
    for (std::size_t t = 0; t < est.size(); ++t) {
      raw[t] = rootN * (xi * (est[t] - rep.target)).real();
      rep.standardized[t] = raw[t] / sd;
    }
  }

  const SampleSummary raw_summary = summarize(raw);
  rep.raw_mean = raw_summary.mean;
  rep.empirical_raw_variance = raw_summary.variance;
  rep.summary = summarize(rep.standardized);
  rep.ks_distance = ks_normal(rep.standardized);
  rep.histogram = make_histogram(rep.standardized, opt.histogram_bins);
  if (opt.statistic == StatisticKind::Bivariate) {
    const SampleSummary s2 = summarize(second);
    rep.summary_second = s2;
    rep.ks_distance_second = ks_normal(second);
    double cross = 0.0;
    for (std::size_t t = 0; t < second.size(); ++t)
      cross += (rep.standardized[t] - rep.summary.mean) * (second[t] - s2.mean);
    cross /= static_cast<double>(second.size()) - 1.0;
    rep.correlation = cross / std::sqrt(rep.summary.variance * s2.variance);
  }
  return rep;
}

}  // namespace gmusic
