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
#include <span>
#include <string>
#include <vector>

#include "gmusic/types.hpp"

namespace gmusic {

// A group of equal signal eigenvalues. `indices` are 0-based positions in
// the descending eigenvalue list.
struct EigenLevel {
  double lambda = 0.0;
  int multiplicity = 0;
  std::vector<int> indices;
};

// Deterministic side of the information-plus-noise model
//   Sigma = B + W,  B B* = U diag(lambdas) U*,  W_ij ~ N_C(0, sigma2 / N).
class SignalModel {
 public:
  // `U` must be M x K with orthonormal columns. Eigenvalues are sorted in
  // descending order (stable) and the columns of U are permuted with them.
  static SignalModel build(int M, int N, double sigma2, std::vector<double> lambdas,
                           const CMatrix& U);
  // Uses the first K canonical basis vectors of C^M.
  static SignalModel build_canonical(int M, int N, double sigma2,
                                     std::vector<double> lambdas);

  int M() const noexcept { return M_; }
  int N() const noexcept { return N_; }
  int K() const noexcept { return static_cast<int>(lambdas_.size()); }
  double sigma2() const noexcept { return sigma2_; }
  double c() const noexcept { return c_; }
  bool canonical() const noexcept { return canonical_; }

  std::span<const double> lambdas() const noexcept { return lambdas_; }
  double lambda(int k) const { return lambdas_.at(static_cast<std::size_t>(k)); }
  const CMatrix& U() const noexcept { return U_; }

  // Distinct signal eigenvalues, descending.
  const std::vector<EigenLevel>& levels() const noexcept { return levels_; }

  // Dense B = U diag(sqrt(lambda)) V* with V the first K canonical vectors of C^N.
  CMatrix dense_B() const;

 private:
  SignalModel() = default;
  void finalize();

  int M_ = 0;
  int N_ = 0;
  double sigma2_ = 0.0;
  double c_ = 0.0;
  bool canonical_ = false;
  std::vector<double> lambdas_;
  CMatrix U_;
  std::vector<EigenLevel> levels_;
};

// Probe vectors d1, d2 and the complex weight xi.
class SubspaceQuery {
 public:
  SubspaceQuery(CVector d1, CVector d2, Complex xi = 1.0);

  static SubspaceQuery canonical(int M, int i1, int i2, Complex xi = 1.0);

  const CVector& d1() const noexcept { return d1_; }
  const CVector& d2() const noexcept { return d2_; }
  Complex xi() const noexcept { return xi_; }
  double norm1() const noexcept { return norm1_; }
  double norm2() const noexcept { return norm2_; }
  int size() const noexcept { return static_cast<int>(d1_.size()); }

 private:
  CVector d1_;
  CVector d2_;
  Complex xi_;
  double norm1_ = 0.0;
  double norm2_ = 0.0;
};

struct Realization {
  CMatrix sigma_matrix;
  std::uint64_t seed = 0;
};

Realization sample_realization(const SignalModel& model, std::uint64_t seed);

// d1* (I - U U*) d2.
Complex eta_true(const SignalModel& model, const SubspaceQuery& q);

// d1* P d2 for the spectral projector of a signal level, or of the noise
// eigenspace when `level` equals levels().size().
Complex projected_product(const SignalModel& model, const CVector& a, const CVector& b,
                          int level);

}  // namespace gmusic
