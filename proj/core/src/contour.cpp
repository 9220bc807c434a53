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

#include "gmusic/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "gmusic/errors.hpp"

namespace gmusic {

namespace {

GaussLegendre compute_rule(int n) {
  GaussLegendre r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      // Three-term recurrence for P_n and P_{n-1}.
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 0 ? 1.0 : (n == 1 ? x : p1);
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[static_cast<std::size_t>(i)] = -x;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(i)] = w;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return r;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n <= 0) throw ConfigError("Gauss-Legendre rule needs at least one node");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(compute_rule(n));
  return *slot;
}

RectContour::RectContour(double x_lo, double x_hi, double delta, double epsilon,
                         int nodes_per_side)
    : x_lo_(x_lo), x_hi_(x_hi), delta_(delta), epsilon_(epsilon), nodes_per_side_(nodes_per_side) {
  if (nodes_per_side <= 0) throw ConfigError("contour needs a positive number of nodes per side");
  if (!(x_lo < x_hi) || !(delta > 0.0) || !std::isfinite(x_lo) || !std::isfinite(x_hi)) {
    throw ConfigError("degenerate contour rectangle");
  }
}

std::vector<ContourNode> RectContour::upper_path(int n) const {
  const GaussLegendre& gl = gauss_legendre(n);
  const Complex corners[4] = {Complex(x_lo_, 0.0), Complex(x_lo_, delta_), Complex(x_hi_, delta_),
                              Complex(x_hi_, 0.0)};
  std::vector<ContourNode> out;
  out.reserve(static_cast<std::size_t>(3 * n));
  for (int seg = 0; seg < 3; ++seg) {
    const Complex a = corners[seg];
    const Complex half = 0.5 * (corners[seg + 1] - a);
    for (int i = 0; i < n; ++i) {
      const double t = gl.nodes[static_cast<std::size_t>(i)];
      out.push_back({a + half * (t + 1.0), half * gl.weights[static_cast<std::size_t>(i)]});
    }
  }
  return out;
}

std::vector<ContourNode> RectContour::nodes(int n) const {
  std::vector<ContourNode> up = upper_path(n);
  const std::size_t half = up.size();
  up.reserve(2 * half);
  for (std::size_t i = 0; i < half; ++i) up.push_back({std::conj(up[i].z), -std::conj(up[i].weight)});
  return up;
}

double RectContour::distance(double x) const noexcept {
  const double side = std::min(std::abs(x - x_lo_), std::abs(x - x_hi_));
  return encloses(x) ? std::min(side, delta_) : side;
}

RectContour RectContour::avoiding(std::span<const double> poles, double min_dist) const {
  auto worst = [&](double b) {
    double d = std::numeric_limits<double>::infinity();
    for (double p : poles) d = std::min(d, std::abs(p - b));
    return d;
  };
  auto place = [&](double b) {
    if (worst(b) >= min_dist) return b;
    const double lo = b - 0.5 * epsilon_;
    const double hi = b + 0.5 * epsilon_;
    std::vector<double> cand{lo, hi};
    std::vector<double> inside;
    for (double p : poles)
      if (p > lo && p < hi) inside.push_back(p);
    std::sort(inside.begin(), inside.end());
    if (!inside.empty()) {
      cand.push_back(0.5 * (lo + inside.front()));
      cand.push_back(0.5 * (inside.back() + hi));
      for (std::size_t i = 0; i + 1 < inside.size(); ++i) cand.push_back(0.5 * (inside[i] + inside[i + 1]));
    }
    double best = b;
    double best_d = worst(b);
    for (double x : cand) {
      const double d = worst(x);
      if (d > best_d + 1e-15 || (d == best_d && std::abs(x - b) < std::abs(best - b))) {
        best = x;
        best_d = d;
      }
    }
    if (best_d < min_dist) {
      throw NumericalError("contour cannot be moved away from the sample eigenvalues");
    }
    return best;
  };
  return RectContour(place(x_lo_), place(x_hi_), delta_, epsilon_, nodes_per_side_);
}

RectContour contour_build(const SpectralSupport& support, int nodes_per_side) {
  if (nodes_per_side <= 0) throw ConfigError("nodes per side must be positive");
  if (support.level_cluster.empty()) {
    throw SeparationError("no signal cluster to enclose (K = 0)");
  }
  if (!support.separated()) {
    throw SeparationError(
        "separation conditions fail: the noise cluster is not isolated from the signal clusters");
  }
  const double eps = support.epsilon;
  return RectContour(support.t2_minus - eps, support.t2_plus + eps, support.delta, eps,
                     nodes_per_side);
}

}  // namespace gmusic
