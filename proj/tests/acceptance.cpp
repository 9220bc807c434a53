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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "gmusic/contour.hpp"
#include "gmusic/empirical_spectrum.hpp"
#include "gmusic/estimators.hpp"
#include "gmusic/fluctuations.hpp"
#include "gmusic/montecarlo.hpp"

using namespace gmusic;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

SignalModel three_cluster() { return SignalModel::build_canonical(10, 20, 1.0, {10, 10, 10, 5, 5}); }
SignalModel two_spike(int M = 20) { return SignalModel::build_canonical(M, 2 * M, 1.0, {6, 5}); }

Verdict mp_support() {
  const AsymptoticSpectrum a(SignalModel::build_canonical(100, 200, 1.0, {}));
  const auto& s = a.support();
  if (s.Q() != 1) return {false, fmt("Q = %d", s.Q())};
  const auto& c = s.clusters[0];
  const double e = std::max({std::abs(c.lo - 0.0857864376269049), std::abs(c.hi - 2.914213562373095),
                             std::abs(c.w_lo + std::sqrt(0.5)), std::abs(c.w_hi - std::sqrt(0.5))});
  return {e < 1e-9, fmt("[%.10f, %.10f], max error %.2e", c.lo, c.hi, e)};
}

Verdict root_consistency() {
  const AsymptoticSpectrum a(three_cluster());
  const auto nodes = contour_build(a.support(), 34).nodes();
  double worst = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    const Complex z = nodes[i].z;
    worst = std::max(worst, std::abs(a.phi(a.solve(z).w).phi - z) / std::max(1.0, std::abs(z)));
  }
  return {worst < 1e-10, fmt("200 points, max scaled residual %.2e", worst)};
}

Verdict kernel_identities() {
  const SignalModel m = three_cluster();
  const AsymptoticSpectrum a(m);
  const auto nodes = contour_build(a.support(), 10).nodes();
  std::vector<WPoint> p;
  for (std::size_t i = 0; i < nodes.size() && p.size() < 20; i += nodes.size() / 20) p.push_back(a.solve(nodes[i].z));
  double dq = 0.0, umax = 0.0, series = 0.0, sr = 0.0;
  for (const auto& p1 : p) {
    for (const auto& p2 : p) {
      const KernelPack k = kernel_pack(m, p1, p2);
      const Complex quotient =
          std::abs(p1.z - p2.z) < 1e-6 ? 1.0 / p1.wprime : (p1.z - p2.z) / (p1.w - p2.w);
      dq = std::max(dq, std::abs(k.delta - quotient));
      umax = std::max(umax, std::abs(k.u));
      series = std::max(series, std::abs(k.delta / ((1.0 - k.u) * (1.0 - k.u)) - 1.0));
      sr = std::max(sr, std::abs(k.s + k.r - p1.z * p2.z * k.vtilde) / std::max(1.0, std::abs(k.s + k.r)));
    }
  }
  return {dq < 1e-8 && umax < 1.0 && series < 1.0 && sr < 1e-9,
          fmt("|delta - quotient| %.1e, max|u| %.3f, series %.3f, s+r %.1e", dq, umax, series, sr)};
}

std::vector<double> spiked_gaps(int M, std::string* detail) {
  const auto model = SignalModel::build_canonical(M, 2 * M, 1.0, {10, 5});
  const AsymptoticSpectrum a(model);
  VarianceOptions opt;
  opt.threads = threads();
  opt.levels = {0, 1};
  const auto t = variance_table(a, contour_build(a.support(), 128), VarianceMethod::Numeric, opt);
  std::vector<double> gaps;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const double s = vartheta_spiked_value(1.0, model.c(), t.level_lambda[i], t.level_lambda[j]);
      gaps.push_back(std::abs(t.at_level(i, j) - s) / s);
    }
  *detail += fmt(" M=%d:%.4f/%.4f/%.4f", M, gaps[0], gaps[1], gaps[2]);
  return gaps;
}

Verdict spiked_vs_numeric() {
  std::string d = "relative gaps (10,10)/(10,5)/(5,5)";
  const auto g1 = spiked_gaps(100, &d), g2 = spiked_gaps(200, &d), g4 = spiked_gaps(400, &d);
  bool ok = true;
  for (std::size_t i = 0; i < g4.size(); ++i) ok = ok && g4[i] < 2e-2 && g1[i] > g2[i] && g2[i] > g4[i];
  return {ok, d};
}

Verdict lower_bounds() {
  const SignalModel m = two_spike();
  const AsymptoticSpectrum a(m);
  VarianceOptions opt;
  opt.threads = threads();
  const auto t = variance_table(a, contour_build(a.support(), 128), VarianceMethod::Numeric, opt);
  const double M = 20, N = 40, K = 2;
  double slack = 1e300;
  for (int k = 1; k <= 20; k += 1) {
    for (int l = k; l <= 20; ++l) {
      const double v = t.at(m, k, l);
      const double lk = k <= K ? m.lambda(k - 1) : 0.0, ll = l <= K ? m.lambda(l - 1) : 0.0;
      double bound;
      if (k <= K && l <= K) bound = (M - K) / N / (2 * lk * ll);
      else if (k > K && l > K) bound = (1.0 / (2 * N)) * (1 / 36.0 + 1 / 25.0);
      else bound = 1.0 / (2 * std::max(lk, ll));
      slack = std::min(slack, v - bound);
    }
  }
  return {slack > -1e-9, fmt("smallest margin over all pairs %.3e", slack)};
}

Verdict secular() {
  const SignalModel m = three_cluster();
  double sec = 0.0, tr = 0.0;
  bool inter = true;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(m, sample_realization(m, seed));
    const auto& l = s.lambda_hat();
    const auto& o = s.omega_hat();
    double sl = 0.0, so = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) {
      inter = inter && o[k] > l[k] && (k == 0 || o[k] < l[k - 1]);
      sec = std::max(sec, std::abs(s.secular(o[k])));
      sl += l[k];
      so += o[k];
    }
    tr = std::max(tr, std::abs(so - sl - 0.5));
  }
  return {inter && sec < 1e-9 && tr < 1e-8,
          fmt("interlacing %s, max|secular| %.1e, trace gap %.1e", inter ? "ok" : "broken", sec, tr)};
}

Verdict dual_path() {
  const SignalModel m = two_spike();
  const AsymptoticSpectrum a(m);
  const auto c = contour_build(a.support(), 128);
  const auto q = SubspaceQuery::canonical(20, 20, 19);
  double worst = 0.0;
  int used = 0;
  for (std::uint64_t seed = 1; used < 100; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(m, sample_realization(m, seed));
    if (!confinement_check(s, a.support()).all()) continue;
    ++used;
    const auto e = eta_improved(s, c, q, ImprovedMethod::Both);
    worst = std::max(worst, std::abs(*e.residue - *e.quadrature) / std::max(1.0, std::abs(*e.residue)));
  }
  return {worst < 1e-8, fmt("100 confined seeds, max relative gap %.2e", worst)};
}

void errors_at(int M, double* improved, double* traditional) {
  const SignalModel m = two_spike(M);
  const AsymptoticSpectrum a(m);
  const auto c = contour_build(a.support(), 128);
  const auto q = SubspaceQuery::canonical(M, M, M);
  std::vector<double> ei, et;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(m, sample_realization(m, seed));
    ei.push_back(std::abs(eta_improved(s, c, q).value - 1.0));
    et.push_back(std::abs(eta_traditional(s, q) - 1.0));
  }
  *improved = median(ei);
  *traditional = median(et);
}

Verdict consistency() {
  double i20, t20, i160, t160;
  errors_at(20, &i20, &t20);
  errors_at(160, &i160, &t160);
  return {i160 <= 0.5 * i20 && i160 < t160,
          fmt("median |err| improved %.4g -> %.4g, traditional at M=160 %.4g", i20, i160, t160)};
}

TrialOptions clt_options(StatisticKind k) {
  TrialOptions o;
  o.trials = 20000;
  o.master_seed = 1;
  o.statistic = k;
  o.threads = threads();
  return o;
}

Verdict clt_quadratic() {
  const auto r = run_trials(two_spike(), SubspaceQuery::canonical(20, 20, 20), clt_options(StatisticKind::Quadratic));
  const double ratio = r.empirical_raw_variance / r.predicted_variance;
  return {std::abs(ratio - 1.0) < 0.1 && r.ks_distance < 0.015,
          fmt("variance ratio %.4f, KS %.4f, skewness %.3f", ratio, r.ks_distance, r.summary.skewness)};
}

Verdict clt_bilinear() {
  const auto q = SubspaceQuery::canonical(20, 20, 19);
  const auto r = run_trials(two_spike(), q, clt_options(StatisticKind::BilinearReal));
  const auto b = run_trials(two_spike(), q, clt_options(StatisticKind::Bivariate));
  return {r.ks_distance < 0.015 && b.ks_distance < 0.02 && *b.ks_distance_second < 0.02 &&
              std::abs(*b.correlation) < 0.05,
          fmt("real-part KS %.4f, whitened KS %.4f / %.4f, correlation %.4f", r.ks_distance, b.ks_distance,
              *b.ks_distance_second, *b.correlation)};
}

Verdict confinement() {
  const SignalModel m = three_cluster();
  const AsymptoticSpectrum a(m);
  const auto& cl = a.support().clusters;
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto s = EmpiricalSpectrum::decompose(m, sample_realization(m, seed));
    bool all = true;
    for (double l : s.lambda_hat()) {
      bool in = false;
      for (const auto& c : cl) in = in || (l >= c.lo - 0.05 && l <= c.hi + 0.05);
      all = all && in;
    }
    ok += all;
  }
  return {ok >= 990, fmt("%d of 1000 seeds confined", ok)};
}

Verdict traditional_closed() {
  const auto model = SignalModel::build_canonical(400, 800, 1.0, {10, 5});
  const AsymptoticSpectrum a(model);
  const auto c = contour_build(a.support(), 128);
  VarianceOptions opt;
  opt.threads = threads();
  const auto num = variance_table(a, c, VarianceMethod::TradNumeric, opt);
  const auto cls = variance_table(a, c, VarianceMethod::TradClosed, opt);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      if (i == 2 && j == 2) continue;
      worst = std::max(worst, std::abs(num.at_level(i, j) - cls.at_level(i, j)) / cls.at_level(i, j));
    }
  const double nn = num.at_level(2, 2);
  return {worst < 0.03 && nn < 0.01, fmt("max relative gap %.4f, noise-noise numeric %.2e", worst, nn)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> all{
      {1, "MP support", 1, mp_support},
      {2, "root consistency", 1, root_consistency},
      {3, "kernel identities", 5, kernel_identities},
      {4, "spiked closed form vs quadrature", 60, spiked_vs_numeric},
      {5, "variance lower bounds", 30, lower_bounds},
      {6, "secular roots", 10, secular},
      {7, "dual-path estimator", 30, dual_path},
      {8, "consistency ordering", 300, consistency},
      {9, "CLT quadratic form", 600, clt_quadratic},
      {10, "CLT bilinear form", 600, clt_bilinear},
      {11, "eigenvalue confinement", 60, confinement},
      {12, "traditional closed forms", 60, traditional_closed},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("%s  %2d  %-34s %s; %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs, c.budget, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
