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

#include "gmusic/fluctuations.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "gmusic/errors.hpp"

namespace gmusic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kChunks = 64;

struct NodeData {
  std::vector<Complex> z, w, s, stilde, g, h;
  std::vector<WPoint> points;
};

NodeData precompute(const AsymptoticSpectrum& spectrum, const RectContour& contour, int n,
                    bool traditional) {
  const std::vector<ContourNode> up = contour.upper_path(n);
  NodeData d;
  const std::size_t half = up.size();
  d.points.resize(2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    const WPoint p = spectrum.solve(up[i].z);
    WPoint c = p;
    c.z = std::conj(p.z);
    c.w = std::conj(p.w);
    c.m = std::conj(p.m);
    c.mtilde = std::conj(p.mtilde);
    c.wprime = std::conj(p.wprime);
    c.s = std::conj(p.s);
    c.stilde = std::conj(p.stilde);
    d.points[i] = p;
    d.points[half + i] = c;
  }
  for (std::size_t i = 0; i < 2 * half; ++i) {
    const WPoint& p = d.points[i];
    d.z.push_back(p.z);
    d.w.push_back(p.w);
    d.s.push_back(p.s);
    d.stilde.push_back(p.stilde);
    d.g.push_back(traditional ? p.s : p.wprime);
    d.h.push_back(i < half ? up[i].weight : -std::conj(up[i - half].weight));
  }
  return d;
}

double spiked_check(double sigma2, double c, double l) {
  if (l > 0.0 && l * l <= sigma2 * sigma2 * c) {
    std::ostringstream os;
    os << "signal eigenvalue " << l << " is below the fixed-rank threshold sigma2 sqrt(c)";
    throw SeparationError(os.str());
  }
  return l;
}

}  // namespace

std::string KernelPack::violation(double identity_tol, double quotient_tol) const {
  std::ostringstream os;
  const Complex rhs = z1 * z2 * vtilde;
  if (std::abs(s + r - rhs) > identity_tol * std::max(1.0, std::abs(rhs))) {
    os << "s + r != z1 z2 vtilde (" << std::abs(s + r - rhs) << ")";
  } else if (std::abs(delta - delta_quotient) > quotient_tol * std::max(1.0, std::abs(delta))) {
    os << "delta != quotient (" << std::abs(delta - delta_quotient) << ")";
  } else if (!(std::abs(u) < 1.0)) {
    os << "|u| = " << std::abs(u) << " >= 1";
  } else if (!(std::abs(delta / ((1.0 - u) * (1.0 - u)) - 1.0) < 1.0)) {
    os << "|delta / (1 - u)^2 - 1| >= 1";
  }
  return os.str();
}

KernelPack kernel_pack(const SignalModel& model, const WPoint& p1, const WPoint& p2) {
  const double s2 = model.sigma2();
  const double N = model.N();
  const double noise = model.M() - model.K();
  const double noise_t = model.N() - model.K();
  Complex sum_p = 0.0, sum_lp = 0.0, sum_llp = 0.0, sum_a1 = 0.0, sum_a2 = 0.0;
  for (const auto& lv : model.levels()) {
    const double n = lv.multiplicity;
    const Complex d1 = lv.lambda - p1.w;
    const Complex d2 = lv.lambda - p2.w;
    const Complex P = n / (d1 * d2);
    sum_p += P;
    sum_lp += lv.lambda * P;
    sum_llp += lv.lambda * lv.lambda * P;
    sum_a1 += n * lv.lambda / d1;
    sum_a2 += n * lv.lambda / d2;
  }
  const Complex ww = p1.w * p2.w;
  const Complex ss = p1.s * p2.s;
  KernelPack k;
  k.z1 = p1.z;
  k.z2 = p2.z;
  k.u = s2 / N * sum_lp;
  k.v = s2 / N * ss * (sum_p + noise / ww);
  k.vtilde = s2 / N * p1.stilde * p2.stilde * (sum_p + noise_t / ww);
  k.s = s2 / N * (N - sum_a1 - sum_a2) / ss;
  k.r = s2 / N * sum_llp / ss;
  k.delta = (1.0 - k.u) * (1.0 - k.u) - p1.z * p2.z * k.v * k.vtilde;
  k.delta_quotient = std::abs(p1.z - p2.z) < 1e-6 ? 1.0 / p1.wprime : (p1.z - p2.z) / (p1.w - p2.w);
  k.theta1 = p1.z * p2.z * ss * k.vtilde;
  k.theta2 = k.v / ss;
  k.theta3 = 1.0 - k.u;
  if (std::abs(k.delta - k.delta_quotient) > 1e-6 * std::max(1.0, std::abs(k.delta))) {
    std::ostringstream os;
    os << "kernel cross-check failed at z1 = " << p1.z << ", z2 = " << p2.z << ": delta "
       << k.delta << " vs quotient " << k.delta_quotient;
    throw NumericalError(os.str());
  }
  return k;
}

const char* to_string(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::Numeric: return "numeric";
    case VarianceMethod::SpikedClosed: return "spiked_closed";
    case VarianceMethod::TradNumeric: return "trad_numeric";
    case VarianceMethod::TradClosed: return "trad_closed";
  }
  return "unknown";
}

bool VarianceTable::has(int a, int b) const {
  if (a < 0 || b < 0 || a >= levels() || b >= levels()) return false;
  return !std::isnan(values(a, b));
}

double VarianceTable::at_level(int a, int b) const {
  if (!has(a, b)) {
    std::ostringstream os;
    os << "variance table has no entry for level pair (" << a << ", " << b << ")";
    throw ConfigError(os.str());
  }
  return values(a, b);
}

int level_of_index(const SignalModel& model, int k) {
  if (k < 1 || k > model.M()) throw ConfigError("eigen-index out of range [1, M]");
  const auto& lv = model.levels();
  for (std::size_t a = 0; a < lv.size(); ++a)
    for (int idx : lv[a].indices)
      if (idx == k - 1) return static_cast<int>(a);
  return static_cast<int>(lv.size());
}

double VarianceTable::at(const SignalModel& model, int k, int l) const {
  return at_level(level_of_index(model, k), level_of_index(model, l));
}

double vartheta_spiked_value(double sigma2, double c, double lk, double ll) {
  spiked_check(sigma2, c, lk);
  spiked_check(sigma2, c, ll);
  if (lk == 0.0 && ll == 0.0) return 0.0;
  const double s4c = sigma2 * sigma2 * c;
  const double num = s4c * (lk * ll + (lk + ll) * sigma2 + sigma2 * sigma2) * (lk * ll + s4c);
  return num / (2.0 * (lk * lk - s4c) * (ll * ll - s4c) * (lk * ll - s4c));
}

double vartheta_trad_closed_value(double sigma2, double c, double lk, double ll) {
  spiked_check(sigma2, c, lk);
  spiked_check(sigma2, c, ll);
  if (lk == 0.0 && ll == 0.0) return 0.0;
  const double s2 = sigma2;
  const double s4 = s2 * s2;
  if (lk == 0.0 || ll == 0.0) {
    const double l = std::max(lk, ll);
    const double t = l + s2 * c;
    return s2 * (l + s2) * (l * l - s4 * c) / (2.0 * l * l * t * t);
  }
  const double p = lk * ll;
  const double sum = lk + ll;
  const double chi = p * (p + s2 * sum + s4) * ((1.0 + c) * (p + s4 * c) + 2.0 * s2 * c * sum) -
                     c * (p - s4 * c) * std::pow(p + s2 * sum + s4 * c, 2);
  const double tk = lk + s2 * c;
  const double tl = ll + s2 * c;
  return s4 * c * chi / (2.0 * p * tk * tk * tl * tl * (p - s4 * c));
}

VarianceTable variance_table(const AsymptoticSpectrum& spectrum, const RectContour& contour,
                             VarianceMethod method, const VarianceOptions& options) {
  const SignalModel& model = spectrum.model();
  const int L = static_cast<int>(model.levels().size());
  VarianceTable t;
  t.method = method;
  for (const auto& lv : model.levels()) t.level_lambda.push_back(lv.lambda);
  t.level_lambda.push_back(0.0);
  t.values = Eigen::MatrixXd::Constant(L + 1, L + 1, kNaN);

  std::vector<int> lv = options.levels;
  if (lv.empty())
    for (int a = 0; a <= L; ++a) lv.push_back(a);
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  for (int a : lv)
    if (a < 0 || a > L) throw ConfigError("requested level out of range");

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < lv.size(); ++i)
    for (std::size_t j = i; j < lv.size(); ++j) pairs.emplace_back(lv[i], lv[j]);

  if (method == VarianceMethod::SpikedClosed || method == VarianceMethod::TradClosed) {
    for (auto [a, b] : pairs) {
      const double la = t.level_lambda[static_cast<std::size_t>(a)];
      const double lb = t.level_lambda[static_cast<std::size_t>(b)];
      const double v = method == VarianceMethod::SpikedClosed
                           ? vartheta_spiked_value(model.sigma2(), model.c(), la, lb)
                           : vartheta_trad_closed_value(model.sigma2(), model.c(), la, lb);
      t.values(a, b) = v;
      t.values(b, a) = v;
    }
    return t;
  }

  if (!spectrum.support().separated()) {
    throw SeparationError("separation conditions fail; the variance integral is undefined");
  }
  const bool traditional = method == VarianceMethod::TradNumeric;
  const double s2 = model.sigma2();
  const double N = model.N();
  const double noise = model.M() - model.K();
  const double noise_t = model.N() - model.K();
  const auto& levels = model.levels();
  const std::size_t P = pairs.size();

  auto compute = [&](int n, double* max_imag) {
    const NodeData nd = precompute(spectrum, contour, n, traditional);
    const std::size_t T = nd.z.size();
    // q[p][i] = h_i g_i / ((la - w_i)(lb - w_i))
    std::vector<std::vector<Complex>> q(P, std::vector<Complex>(T));
    std::vector<double> la(P), lb(P);
    for (std::size_t p = 0; p < P; ++p) {
      la[p] = t.level_lambda[static_cast<std::size_t>(pairs[p].first)];
      lb[p] = t.level_lambda[static_cast<std::size_t>(pairs[p].second)];
      for (std::size_t i = 0; i < T; ++i)
        q[p][i] = nd.h[i] * nd.g[i] / ((la[p] - nd.w[i]) * (lb[p] - nd.w[i]));
    }

    std::vector<std::vector<Complex>> partial(kChunks, std::vector<Complex>(P, 0.0));
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mu;

    auto work = [&] {
      std::vector<Complex> x(P);
      while (true) {
        const int chunk = next.fetch_add(1);
        if (chunk >= kChunks || failed.load()) return;
        std::vector<Complex>& acc = partial[static_cast<std::size_t>(chunk)];
        for (std::size_t i = static_cast<std::size_t>(chunk); i < T; i += kChunks) {
          for (std::size_t j = i; j < T; ++j) {
            Complex sum_p = 0.0, sum_lp = 0.0;
            for (const auto& l : levels) {
              const Complex pp = static_cast<double>(l.multiplicity) / ((l.lambda - nd.w[i]) * (l.lambda - nd.w[j]));
              sum_p += pp;
              sum_lp += l.lambda * pp;
            }
            const Complex ww = nd.w[i] * nd.w[j];
            const Complex ss = nd.s[i] * nd.s[j];
            const Complex u = s2 / N * sum_lp;
            const Complex v = s2 / N * ss * (sum_p + noise / ww);
            const Complex vt = s2 / N * nd.stilde[i] * nd.stilde[j] * (sum_p + noise_t / ww);
            const Complex zz = nd.z[i] * nd.z[j];
            const Complex delta = (1.0 - u) * (1.0 - u) - zz * v * vt;
            const Complex x1 = zz * ss * vt / delta;
            const Complex x2 = v / (ss * delta);
            const Complex x3 = (1.0 - u) / delta;
            const double sym = i == j ? 1.0 : 2.0;
            for (std::size_t p = 0; p < P; ++p) {
              acc[p] += sym * q[p][i] * q[p][j] * (x1 + la[p] * lb[p] * x2 + (la[p] + lb[p]) * x3);
            }
            if (options.check_kernels) {
              const KernelPack kp = kernel_pack(model, nd.points[i], nd.points[j]);
              const std::string bad = kp.violation();
              if (!bad.empty()) {
                std::lock_guard<std::mutex> lock(failure_mu);
                failure = bad;
                failed = true;
                return;
              }
            }
          }
        }
      }
    };
    const int workers = std::clamp(options.threads, 1, kChunks);
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failed) throw NumericalError("kernel invariant violated: " + failure);

    std::vector<double> out(P);
    const double pref = -s2 / (8.0 * std::numbers::pi * std::numbers::pi);
    *max_imag = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      Complex total = 0.0;
      for (int c = 0; c < kChunks; ++c) total += partial[static_cast<std::size_t>(c)][p];
      total *= pref;
      out[p] = total.real();
      *max_imag = std::max(*max_imag, std::abs(total.imag()));
    }
    return out;
  };

  int n = std::max(options.nodes_per_side, 4);
  double imag = 0.0;
  std::vector<double> prev = compute(n, &imag);
  while (true) {
    const int n2 = 2 * n;
    if (n2 > options.max_nodes_per_side) {
      std::ostringstream os;
      os << "variance quadrature unstable up to " << n << " nodes per side";
      throw NumericalError(os.str());
    }
    double imag2 = 0.0;
    std::vector<double> cur = compute(n2, &imag2);
    bool stable = true;
    for (std::size_t p = 0; p < P; ++p)
      if (std::abs(cur[p] - prev[p]) > 1e-6 * std::max(std::abs(cur[p]), 1e-12)) stable = false;
    prev = std::move(cur);
    imag = imag2;
    n = n2;
    if (stable) break;
  }
  t.nodes_per_side = n;
  t.max_imag = imag;
  for (std::size_t p = 0; p < P; ++p) {
    t.values(pairs[p].first, pairs[p].second) = prev[p];
    t.values(pairs[p].second, pairs[p].first) = prev[p];
  }
  return t;
}

double vartheta_numeric(const AsymptoticSpectrum& spectrum, const RectContour& contour, int k,
                        int l, int nodes_per_side) {
  const SignalModel& model = spectrum.model();
  VarianceOptions opt;
  opt.nodes_per_side = nodes_per_side;
  opt.levels = {level_of_index(model, k), level_of_index(model, l)};
  return variance_table(spectrum, contour, VarianceMethod::Numeric, opt)
      .at_level(opt.levels[0], opt.levels[1]);
}

double vartheta_spiked(const SignalModel& model, int k, int l) {
  const int a = level_of_index(model, k);
  const int b = level_of_index(model, l);
  const int L = static_cast<int>(model.levels().size());
  const double la = a == L ? 0.0 : model.levels()[static_cast<std::size_t>(a)].lambda;
  const double lb = b == L ? 0.0 : model.levels()[static_cast<std::size_t>(b)].lambda;
  return vartheta_spiked_value(model.sigma2(), model.c(), la, lb);
}

double vartheta_trad(const AsymptoticSpectrum& spectrum, const RectContour& contour, int k, int l,
                     bool closed, int nodes_per_side) {
  const SignalModel& model = spectrum.model();
  VarianceOptions opt;
  opt.nodes_per_side = nodes_per_side;
  opt.levels = {level_of_index(model, k), level_of_index(model, l)};
  const VarianceTable t = variance_table(
      spectrum, contour, closed ? VarianceMethod::TradClosed : VarianceMethod::TradNumeric, opt);
  return t.at_level(opt.levels[0], opt.levels[1]);
}

std::vector<int> required_levels(const SignalModel& model, const SubspaceQuery& q) {
  const int L = static_cast<int>(model.levels().size());
  const double scale = std::max(1e-300, (q.norm1() + q.norm2()) * (q.norm1() + q.norm2()));
  std::vector<int> out;
  for (int a = 0; a <= L; ++a) {
    const double m = std::max({std::abs(projected_product(model, q.d1(), q.d1(), a)),
                               std::abs(projected_product(model, q.d2(), q.d2(), a))});
    if (m > 1e-14 * scale) out.push_back(a);
  }
  return out;
}

Complex CovarianceAssembly::eta(int i, int j, int level) const {
  const auto& e = eta_proj.at(static_cast<std::size_t>(level));
  if (i == 1 && j == 1) return e[0];
  if (i == 1 && j == 2) return e[1];
  if (i == 2 && j == 1) return std::conj(e[1]);
  if (i == 2 && j == 2) return e[2];
  throw ConfigError("projector index must be 1 or 2");
}

CovarianceAssembly gamma_assemble(const SignalModel& model, const SubspaceQuery& q,
                                  const VarianceTable& table) {
  const int L = static_cast<int>(model.levels().size());
  if (table.levels() != L + 1) throw ConfigError("variance table was built for another model");
  CovarianceAssembly out;
  for (int a = 0; a <= L; ++a) {
    out.eta_proj.push_back({projected_product(model, q.d1(), q.d1(), a),
                            projected_product(model, q.d1(), q.d2(), a),
                            projected_product(model, q.d2(), q.d2(), a)});
  }
  const std::vector<int> need = required_levels(model, q);
  for (int a : need) {
    for (int b : need) {
      if (!table.has(a, b)) {
        std::ostringstream os;
        os << "incomplete variance table: missing level pair (" << a << ", " << b << ")";
        throw ConfigError(os.str());
      }
      const auto& ea = out.eta_proj[static_cast<std::size_t>(a)];
      const auto& eb = out.eta_proj[static_cast<std::size_t>(b)];
      const Complex p = ea[1] * eb[1];
      const double sym = 0.5 * (ea[0].real() * eb[2].real() + eb[0].real() * ea[2].real());
      Eigen::Matrix2d g;
      g << p.real() + sym, -p.imag(), -p.imag(), -p.real() + sym;
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
      if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, g.norm())) {
        throw NumericalError("pair covariance is not non-negative definite");
      }
      const double th = table.at_level(a, b);
      out.per_pair[{a, b}] = g;
      out.gamma += th * g;
      out.sum_11_22 += th * ea[0].real() * eb[2].real();
      out.sum_12_12 += th * p;
    }
  }
  return out;
}

MsePrediction mse_predict(const CovarianceAssembly& assembly, Complex xi, int N) {
  if (N <= 0) throw ConfigError("N must be positive");
  MsePrediction out;
  const Eigen::Vector2d x(xi.real(), xi.imag());
  out.variance = x.dot(assembly.gamma * x);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(assembly.gamma);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  const double margin = assembly.sum_11_22 - std::abs(assembly.sum_12_12);
  out.nondegenerate = margin > 1e-12 * std::max(1.0, std::abs(assembly.sum_11_22));
  out.mse = assembly.gamma.trace() / static_cast<double>(N);
  return out;
}

double quadratic_form_variance(const SignalModel& model, const CVector& d, const VarianceTable& table) {
  const SubspaceQuery q(d, d);
  const std::vector<int> need = required_levels(model, q);
  double acc = 0.0;
  for (int a : need)
    for (int b : need)
      acc += table.at_level(a, b) * projected_product(model, d, d, a).real() *
             projected_product(model, d, d, b).real();
  return 2.0 * acc;
}

}  // namespace gmusic
