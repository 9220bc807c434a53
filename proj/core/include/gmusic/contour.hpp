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

#include <span>
#include <vector>

#include "gmusic/asymptotic_spectrum.hpp"
#include "gmusic/types.hpp"

namespace gmusic {

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point rule on [-1, 1]. Results are cached; safe to call concurrently.
const GaussLegendre& gauss_legendre(int n);

struct ContourNode {
  Complex z;
  Complex weight;  // includes dz
};

// Clockwise boundary of [x_lo, x_hi] x [-delta, delta].
class RectContour {
 public:
  RectContour(double x_lo, double x_hi, double delta, double epsilon, int nodes_per_side);

  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_hi_; }
  double delta() const noexcept { return delta_; }
  double epsilon() const noexcept { return epsilon_; }
  int nodes_per_side() const noexcept { return nodes_per_side_; }

  // Upper half: x_lo -> x_lo + i delta -> x_hi + i delta -> x_hi, with n
  // Gauss-Legendre nodes per segment. The lower half is the conjugate path
  // traversed backwards, i.e. nodes conj(z) with weights -conj(weight).
  std::vector<ContourNode> upper_path(int n) const;
  std::vector<ContourNode> nodes(int n) const;
  std::vector<ContourNode> nodes() const { return nodes(nodes_per_side_); }

  bool encloses(double x) const noexcept { return x > x_lo_ && x < x_hi_; }
  double distance(double x) const noexcept;

  // Moves the vertical sides by at most epsilon / 2 so that every pole is
  // at least `min_dist` away. Throws NumericalError if that is impossible.
  RectContour avoiding(std::span<const double> poles, double min_dist) const;

 private:
  double x_lo_;
  double x_hi_;
  double delta_;
  double epsilon_;
  int nodes_per_side_;
};

// Rectangle enclosing every signal cluster and excluding the noise cluster:
// x_lo = t2- - eps, x_hi = t2+ + eps, half height delta.
RectContour contour_build(const SpectralSupport& support, int nodes_per_side);

}  // namespace gmusic
