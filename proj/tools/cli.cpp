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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gmusic/asymptotic_spectrum.hpp"
#include "gmusic/contour.hpp"
#include "gmusic/empirical_spectrum.hpp"
#include "gmusic/errors.hpp"
#include "gmusic/estimators.hpp"
#include "gmusic/fluctuations.hpp"
#include "gmusic/montecarlo.hpp"
#include "gmusic/scenario.hpp"

namespace gmusic::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Config {
  std::string command;
  std::string scenario_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  int trials = 20000;
  int nodes = 128;
  std::string method;
  int threads = 1;
  bool deterministic = false;
  bool log = false;

  double xmin = std::numeric_limits<double>::quiet_NaN();
  double xmax = std::numeric_limits<double>::quiet_NaN();
  int points = 400;
  std::string estimator = "improved";
  std::string statistic = "quadratic";
  std::string hist_path;
  int bins = 60;
  bool center_true = false;
};

class StageLog {
 public:
  StageLog(bool on, std::ostream& err) : on_(on), err_(err), start_(Clock::now()) {}
  void mark(const char* stage) {
    const auto now = Clock::now();
    if (on_) {
      err_ << "[gmusic] " << std::left << std::setw(12) << stage << std::fixed
           << std::setprecision(3)
           << std::chrono::duration<double, std::milli>(now - start_).count() << " ms\n";
      err_.unsetf(std::ios::floatfield);
    }
    start_ = now;
  }

 private:
  bool on_;
  std::ostream& err_;
  Clock::time_point start_;
};

json cjson(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void emit(const Config& cfg, std::ostream& out, const std::string& text,
          const std::string& path_override = {}) {
  const std::string& path = path_override.empty() ? cfg.out_path : path_override;
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output file " + path);
  f << text;
}

void emit_json(const Config& cfg, std::ostream& out, json j) {
  if (!cfg.deterministic) j["generated_at"] = timestamp();
  emit(cfg, out, j.dump(2) + "\n");
}

json support_json(const AsymptoticSpectrum& a) {
  const SignalModel& m = a.model();
  const SpectralSupport& s = a.support();
  json clusters = json::array();
  for (const Cluster& c : s.clusters)
    clusters.push_back({{"lo", c.lo}, {"hi", c.hi}, {"w_lo", c.w_lo}, {"w_hi", c.w_hi}});
  const SpikedSummary sp = spiked_pack(m);
  return {{"M", m.M()},
          {"N", m.N()},
          {"K", m.K()},
          {"sigma2", m.sigma2()},
          {"c", m.c()},
          {"Q", s.Q()},
          {"clusters", clusters},
          {"thresholds",
           {{"t1_minus", number(s.t1_minus)},
            {"t1_plus", number(s.t1_plus)},
            {"t2_minus", number(s.t2_minus)},
            {"t2_plus", number(s.t2_plus)}}},
          {"epsilon", s.epsilon},
          {"delta", s.delta},
          {"separated", {{"a1", s.a1}, {"a2", s.a2}}},
          {"w_at_t2_minus", number(s.w_at_t2_minus)},
          {"level_cluster", s.level_cluster},
          {"spiked",
           {{"margin", number(sp.margin)},
            {"limits", sp.limits},
            {"mp_lo", sp.mp_lo},
            {"mp_hi", sp.mp_hi}}}};
}

int cmd_support(const Config& cfg, const Scenario& sc, std::ostream& out, StageLog& log) {
  const AsymptoticSpectrum a(sc.model);
  log.mark("support");
  emit_json(cfg, out, support_json(a));
  return kOk;
}

int cmd_density(const Config& cfg, const Scenario& sc, std::ostream& out, StageLog& log) {
  const AsymptoticSpectrum a(sc.model);
  log.mark("support");
  const SpectralSupport& s = a.support();
  const double span = s.clusters.back().hi - s.clusters.front().lo;
  const double lo = std::isnan(cfg.xmin) ? std::max(0.0, s.clusters.front().lo - 0.05 * span) : cfg.xmin;
  const double hi = std::isnan(cfg.xmax) ? s.clusters.back().hi + 0.05 * span : cfg.xmax;
  if (cfg.points < 2 || !(hi > lo)) throw ConfigError("density grid needs --points >= 2 and xmax > xmin");
  std::ostringstream os;
  os << std::setprecision(12) << "x,density\n";
  for (int i = 0; i < cfg.points; ++i) {
    const double x = lo + (hi - lo) * i / (cfg.points - 1);
    os << x << "," << a.density(x).value << "\n";
  }
  log.mark("density");
  emit(cfg, out, os.str());
  return kOk;
}

int cmd_spectrum(const Config& cfg, const Scenario& sc, std::ostream& out, StageLog& log) {
  const std::uint64_t seed = cfg.seed.value_or(sc.seed);
  const Realization r = sample_realization(sc.model, seed);
  log.mark("sample");
  const EmpiricalSpectrum spec = EmpiricalSpectrum::decompose(sc.model, r);
  log.mark("decompose");
  std::ostringstream os;
  os << std::setprecision(17) << "index,lambda_hat,omega_hat\n";
  for (int k = 0; k < spec.M(); ++k)
    os << k + 1 << "," << spec.lambda_hat()[static_cast<std::size_t>(k)] << ","
       << spec.omega_hat()[static_cast<std::size_t>(k)] << "\n";
  emit(cfg, out, os.str());
  return kOk;
}

ImprovedMethod parse_improved(const std::string& m) {
  if (m.empty() || m == "both") return ImprovedMethod::Both;
  if (m == "residue") return ImprovedMethod::Residue;
  if (m == "quadrature") return ImprovedMethod::Quadrature;
  throw ConfigError("--method for estimate must be residue, quadrature or both");
}

int cmd_estimate(const Config& cfg, const Scenario& sc, std::ostream& out, StageLog& log) {
  const std::uint64_t seed = cfg.seed.value_or(sc.seed);
  const ImprovedMethod method = parse_improved(cfg.method);
  const AsymptoticSpectrum a(sc.model);
  log.mark("support");
  const Realization r = sample_realization(sc.model, seed);
  const EmpiricalSpectrum spec = EmpiricalSpectrum::decompose(sc.model, r);
  log.mark("decompose");

  json j = {{"seed", seed}, {"method", cfg.method.empty() ? "both" : cfg.method}};
  if (sc.model.K() == 0) {
    const Complex base = sc.query.d1().dot(sc.query.d2());
    j["eta_true"] = cjson(eta_true(sc.model, sc.query));
    j["eta_improved"] = cjson(base);
    j["eta_traditional"] = cjson(eta_traditional(spec, sc.query));
    j["eta_traditional_limit"] = cjson(base);
  } else {
    const RectContour contour = contour_build(a.support(), cfg.nodes);
    const EstimateResult e = estimate_all(a, contour, spec, sc.query, method);
    log.mark("estimate");
    j["eta_true"] = cjson(e.eta_true);
    j["eta_improved"] = cjson(e.eta_improved);
    if (e.eta_improved_quadrature) j["eta_improved_quadrature"] = cjson(*e.eta_improved_quadrature);
    j["eta_traditional"] = cjson(e.eta_traditional);
    j["eta_traditional_limit"] = cjson(e.eta_traditional_limit);
    if (e.eta_spiked) j["eta_spiked"] = cjson(*e.eta_spiked);
    j["confinement"] = {{"noise_eigenvalues", e.confinement.noise_eigenvalues},
                        {"signal_eigenvalues", e.confinement.signal_eigenvalues},
                        {"noise_omegas", e.confinement.noise_omegas},
                        {"signal_omegas", e.confinement.signal_omegas}};
    j["contour"] = {{"x_lo", contour.x_lo()}, {"x_hi", contour.x_hi()}, {"delta", contour.delta()}};
  }
  emit_json(cfg, out, j);
  return kOk;
}

VarianceMethod parse_variance(const std::string& m) {
  if (m.empty() || m == "numeric") return VarianceMethod::Numeric;
  if (m == "spiked") return VarianceMethod::SpikedClosed;
  if (m == "trad") return VarianceMethod::TradNumeric;
  if (m == "trad-closed") return VarianceMethod::TradClosed;
  throw ConfigError("--method for variance must be numeric, spiked, trad or trad-closed");
}

json table_json(const VarianceTable& t) {
  json rows = json::array();
  for (int a = 0; a < t.levels(); ++a) {
    json row = json::array();
    for (int b = 0; b < t.levels(); ++b) row.push_back(number(t.values(a, b)));
    rows.push_back(row);
  }
  return rows;
}

json matrix_json(const Eigen::Matrix2d& g) {
  return json::array({json::array({g(0, 0), g(0, 1)}), json::array({g(1, 0), g(1, 1)})});
}

int cmd_variance(const Config& cfg, const Scenario& sc, std::ostream& out, StageLog& log) {
  const VarianceMethod method = parse_variance(cfg.method);
  const AsymptoticSpectrum a(sc.model);
  log.mark("support");
  VarianceOptions opt;
  opt.nodes_per_side = cfg.nodes;
  opt.threads = cfg.threads;
  const bool numeric = method == VarianceMethod::Numeric || method == VarianceMethod::TradNumeric;
  if (sc.model.K() == 0 || !a.support().separated()) {
    throw SeparationError("separation conditions fail; the variance coefficients are undefined");
  }
  const RectContour contour = contour_build(a.support(), cfg.nodes);
  const VarianceTable t = variance_table(a, contour, method, opt);
  log.mark("table");
  const CovarianceAssembly cov = gamma_assemble(sc.model, sc.query, t);
  const MsePrediction pred = mse_predict(cov, sc.query.xi(), sc.model.N());

  json levels = json::array();
  for (std::size_t l = 0; l < sc.model.levels().size(); ++l) {
    const auto& lv = sc.model.levels()[l];
    levels.push_back({{"level", l}, {"lambda", lv.lambda}, {"multiplicity", lv.multiplicity}});
  }
  levels.push_back({{"level", sc.model.levels().size()},
                    {"lambda", 0.0},
                    {"multiplicity", sc.model.M() - sc.model.K()}});
  json j = {{"method", to_string(method)},
            {"levels", levels},
            {"vartheta", table_json(t)},
            {"gamma", matrix_json(cov.gamma)},
            {"xi", cjson(sc.query.xi())},
            {"predicted_variance", pred.variance},
            {"nondegenerate", pred.nondegenerate},
            {"mse", pred.mse}};
  if (numeric) {
    j["nodes_per_side"] = t.nodes_per_side;
    j["max_imag"] = t.max_imag;
  }
  emit_json(cfg, out, j);
  return kOk;
}

json summary_json(const SampleSummary& s) {
  return {{"mean", s.mean},
          {"variance", s.variance},
          {"skewness", s.skewness},
          {"excess_kurtosis", s.excess_kurtosis}};
}

int cmd_clt(const Config& cfg, const Scenario& sc, std::ostream& out, StageLog& log) {
  TrialOptions opt;
  opt.trials = cfg.trials;
  opt.master_seed = cfg.seed.value_or(sc.seed);
  opt.threads = cfg.threads;
  opt.nodes_per_side = cfg.nodes;
  opt.histogram_bins = cfg.bins;
  opt.center_on_true_eta = cfg.center_true;
  if (cfg.estimator == "improved") opt.estimator = EstimatorKind::Improved;
  else if (cfg.estimator == "traditional") opt.estimator = EstimatorKind::Traditional;
  else throw ConfigError("--estimator must be improved or traditional");
  if (cfg.statistic == "quadratic") opt.statistic = StatisticKind::Quadratic;
  else if (cfg.statistic == "bilinear-real") opt.statistic = StatisticKind::BilinearReal;
  else if (cfg.statistic == "bivariate") opt.statistic = StatisticKind::Bivariate;
  else throw ConfigError("--statistic must be quadratic, bilinear-real or bivariate");

  const CltReport rep = run_trials(sc.model, sc.query, opt);
  log.mark("trials");

  json j = {{"trials", rep.trials},
            {"estimator", to_string(rep.estimator)},
            {"statistic_kind", to_string(rep.statistic)},
            {"master_seed", rep.master_seed},
            {"target", cjson(rep.target)},
            {"gamma", matrix_json(rep.gamma)},
            {"predicted_variance", rep.predicted_variance},
            {"empirical_raw_variance", rep.empirical_raw_variance},
            {"raw_mean", rep.raw_mean},
            {"samples_summary", summary_json(rep.summary)},
            {"ks_distance", rep.ks_distance},
            {"confined_trials", rep.confined_trials},
            {"histogram", {{"edges", rep.histogram.edges}, {"counts", rep.histogram.counts}}}};
  if (rep.summary_second) {
    j["samples_summary_second"] = summary_json(*rep.summary_second);
    j["ks_distance_second"] = *rep.ks_distance_second;
    j["correlation"] = *rep.correlation;
  }
  emit_json(cfg, out, j);

  std::ostringstream csv;
  csv << std::setprecision(12) << "bin_left,bin_right,count,normal_pdf_at_center\n";
  for (std::size_t b = 0; b < rep.histogram.counts.size(); ++b) {
    const double l = rep.histogram.edges[b];
    const double r = rep.histogram.edges[b + 1];
    csv << l << "," << r << "," << rep.histogram.counts[b] << "," << normal_pdf(0.5 * (l + r)) << "\n";
  }
  std::string hist = cfg.hist_path;
  if (hist.empty() && !cfg.out_path.empty()) hist = cfg.out_path + ".hist.csv";
  if (!hist.empty()) emit(cfg, out, csv.str(), hist);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Improved subspace estimation for the information-plus-noise model", "gmusic"};
  app.fallthrough();
  app.require_subcommand(1);
  const char* commands[][2] = {
      {"support", "support of the limiting spectral measure (JSON)"},
      {"density", "density of the limiting spectral measure on a grid (CSV)"},
      {"spectrum", "sample eigenvalues and secular roots of one realization (CSV)"},
      {"estimate", "all estimators and the true value for one realization (JSON)"},
      {"variance", "variance coefficients and the 2x2 covariance (JSON)"},
      {"clt", "Monte Carlo check of the Gaussian fluctuations (JSON + histogram CSV)"}};
  for (const auto& c : commands) {
    app.add_subcommand(c[0], c[1])->callback([&cfg, name = std::string(c[0])] { cfg.command = name; });
  }
  app.add_option("--scenario", cfg.scenario_path, "scenario JSON file")->required();
  app.add_option("--out", cfg.out_path, "output file (default: standard output)");
  app.add_option("--seed", cfg.seed, "realization seed or Monte Carlo master seed");
  app.add_option("--trials", cfg.trials, "Monte Carlo trials")->capture_default_str();
  app.add_option("--nodes", cfg.nodes, "Gauss-Legendre nodes per contour side")->capture_default_str();
  app.add_option("--method", cfg.method,
                 "estimate: residue|quadrature|both; variance: numeric|spiked|trad|trad-closed");
  app.add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  app.add_flag("--deterministic", cfg.deterministic, "omit the timestamp from JSON output");
  app.add_flag("--log", cfg.log, "print per-stage timings to standard error");
  app.add_option("--xmin", cfg.xmin, "density grid start");
  app.add_option("--xmax", cfg.xmax, "density grid end");
  app.add_option("--points", cfg.points, "density grid size")->capture_default_str();
  app.add_option("--estimator", cfg.estimator, "clt: improved|traditional")->capture_default_str();
  app.add_option("--statistic", cfg.statistic, "clt: quadratic|bilinear-real|bivariate")
      ->capture_default_str();
  app.add_option("--hist", cfg.hist_path, "clt histogram CSV (default: <out>.hist.csv)");
  app.add_option("--bins", cfg.bins, "clt histogram bins")->capture_default_str();
  app.add_flag("--center-true", cfg.center_true,
               "clt, traditional estimator: centre on the true value instead of its limit");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "gmusic: " << e.what() << "\n";
    return kConfig;
  }

  try {
    if (cfg.trials <= 0) throw ConfigError("--trials must be positive");
    if (cfg.nodes <= 0) throw ConfigError("--nodes must be positive");
    if (cfg.threads <= 0) throw ConfigError("--threads must be positive");
    StageLog log(cfg.log, err);
    const Scenario sc = load_scenario(cfg.scenario_path);
    log.mark("scenario");
    if (cfg.command == "support") return cmd_support(cfg, sc, out, log);
    if (cfg.command == "density") return cmd_density(cfg, sc, out, log);
    if (cfg.command == "spectrum") return cmd_spectrum(cfg, sc, out, log);
    if (cfg.command == "estimate") return cmd_estimate(cfg, sc, out, log);
    if (cfg.command == "variance") return cmd_variance(cfg, sc, out, log);
    return cmd_clt(cfg, sc, out, log);
  } catch (const ConfigError& e) {
    err << "gmusic: configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const SeparationError& e) {
    err << "gmusic: separation failure: " << e.what() << "\n";
    return kSeparation;
  } catch (const Error& e) {
    err << "gmusic: numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace gmusic::cli
