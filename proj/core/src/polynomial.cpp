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

#include "gmusic/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "gmusic/errors.hpp"

namespace gmusic {

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
  while (coeffs_.size() > 1 && coeffs_.back() == Complex(0.0)) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

Complex Polynomial::operator()(Complex w) const {
  Complex acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * w + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return constant(0.0);
  std::vector<Complex> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<Complex> r(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) r[i] += coeffs_[i];
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) r[i] += o.coeffs_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * Complex(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  std::vector<Complex> r(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) r[i + j] += coeffs_[i] * o.coeffs_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(Complex s) const {
  std::vector<Complex> r = coeffs_;
  for (auto& x : r) x *= s;
  return Polynomial(std::move(r));
}

std::vector<Complex> Polynomial::roots() const {
  double cmax = 0.0;
  for (const auto& x : coeffs_) cmax = std::max(cmax, std::abs(x));
  if (cmax == 0.0) throw DomainError("roots of the zero polynomial are undefined");

  std::size_t n = coeffs_.size();
  while (n > 1 && std::abs(coeffs_[n - 1]) <= 1e-15 * cmax) --n;
  const int deg = static_cast<int>(n) - 1;
  if (deg <= 0) return {};

  // Zero roots are factored out first so the scaling below is well defined.
  std::size_t lo = 0;
  while (lo < n && std::abs(coeffs_[lo]) == 0.0) ++lo;
  std::vector<Complex> out(lo, Complex(0.0));
  const int d = deg - static_cast<int>(lo);
  if (d == 0) return out;

  const Complex lead = coeffs_[n - 1];
  const double scale = std::pow(std::abs(coeffs_[lo] / lead), 1.0 / d);
  const double s = (scale > 0.0 && std::isfinite(scale)) ? scale : 1.0;

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  double sp = 1.0;
  for (int i = 0; i < d; ++i) {
    // coefficient of t^i after w = s t, normalised by the leading one
    companion(i, d - 1) = -coeffs_[lo + static_cast<std::size_t>(i)] * sp / (lead * std::pow(s, d));
    sp *= s;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  if (es.info() != Eigen::Success) throw NumericalError("companion eigen-solve failed");
  for (int i = 0; i < d; ++i) out.push_back(es.eigenvalues()(i) * s);
  return out;
}

}  // namespace gmusic
