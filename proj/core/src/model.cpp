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

#include "gmusic/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gmusic/errors.hpp"

namespace gmusic {

namespace {

void validate_dims(int M, int N, double sigma2, const std::vector<double>& lambdas) {
  if (M <= 0 || N <= 0) throw ConfigError("M and N must be positive");
  if (M >= N) throw ConfigError("M must be smaller than N (c = M/N < 1)");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma2 must be positive");
  if (static_cast<int>(lambdas.size()) >= M) throw ConfigError("K must be smaller than M");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0) || !std::isfinite(lambdas[k])) {
      std::ostringstream os;
      os << "signal eigenvalue " << k + 1 << " is not positive: " << lambdas[k];
      throw ConfigError(os.str());
    }
  }
}

}  // namespace

SignalModel SignalModel::build(int M, int N, double sigma2, std::vector<double> lambdas,
                               const CMatrix& U) {
  validate_dims(M, N, sigma2, lambdas);
  const int K = static_cast<int>(lambdas.size());
  if (U.rows() != M || U.cols() != K) {
    std::ostringstream os;
    os << "eigenvector matrix is " << U.rows() << "x" << U.cols() << ", expected " << M << "x"
       << K;
    throw ConfigError(os.str());
  }
  if (!U.allFinite()) throw ConfigError("eigenvector matrix has non-finite entries");
  if (K > 0) {
    const CMatrix gram = U.adjoint() * U;
    const double err = (gram - CMatrix::Identity(K, K)).cwiseAbs().maxCoeff();
    if (err > 1e-12) {
      std::ostringstream os;
      os << "eigenvector columns are not orthonormal (max deviation " << err << ")";
      throw ConfigError(os.str());
    }
  }

  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lambdas[a] > lambdas[b]; });

  SignalModel m;
  m.M_ = M;
  m.N_ = N;
  m.sigma2_ = sigma2;
  m.c_ = static_cast<double>(M) / static_cast<double>(N);
  m.U_.resize(M, K);
  m.lambdas_.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    m.lambdas_[static_cast<std::size_t>(k)] = lambdas[static_cast<std::size_t>(order[k])];
    m.U_.col(k) = U.col(order[k]);
  }
  m.finalize();
  return m;
}

SignalModel SignalModel::build_canonical(int M, int N, double sigma2,
                                         std::vector<double> lambdas) {
  validate_dims(M, N, sigma2, lambdas);
  std::stable_sort(lambdas.begin(), lambdas.end(), std::greater<>());
  const int K = static_cast<int>(lambdas.size());
  SignalModel m = build(M, N, sigma2, std::move(lambdas), CMatrix::Identity(M, K));
  m.canonical_ = true;
  return m;
}

void SignalModel::finalize() {
  levels_.clear();
  for (int k = 0; k < K(); ++k) {
    const double l = lambdas_[static_cast<std::size_t>(k)];
    if (levels_.empty() || levels_.back().lambda != l) {
      levels_.push_back({l, 0, {}});
    }
    levels_.back().multiplicity += 1;
    levels_.back().indices.push_back(k);
  }
}

CMatrix SignalModel::dense_B() const {
  CMatrix B = CMatrix::Zero(M_, N_);
  for (int k = 0; k < K(); ++k) {
    B.col(k) = std::sqrt(lambdas_[static_cast<std::size_t>(k)]) * U_.col(k);
  }
  return B;
}

SubspaceQuery::SubspaceQuery(CVector d1, CVector d2, Complex xi)
    : d1_(std::move(d1)), d2_(std::move(d2)), xi_(xi) {
  if (d1_.size() == 0 || d1_.size() != d2_.size()) {
    throw ConfigError("d1 and d2 must be non-empty vectors of equal length");
  }
  norm1_ = d1_.norm();
  norm2_ = d2_.norm();
  if (!std::isfinite(norm1_) || !std::isfinite(norm2_)) {
    throw ConfigError("probe vectors must have finite norm");
  }
  if (!std::isfinite(xi_.real()) || !std::isfinite(xi_.imag())) {
    throw ConfigError("xi must be finite");
  }
}

SubspaceQuery SubspaceQuery::canonical(int M, int i1, int i2, Complex xi) {
  if (i1 < 1 || i1 > M || i2 < 1 || i2 > M) {
    throw ConfigError("canonical probe index out of range [1, M]");
  }
  CVector d1 = CVector::Zero(M);
  CVector d2 = CVector::Zero(M);
  d1(i1 - 1) = 1.0;
  d2(i2 - 1) = 1.0;
  return SubspaceQuery(std::move(d1), std::move(d2), xi);
}

Realization sample_realization(const SignalModel& model, std::uint64_t seed) {
  const int M = model.M();
  const int N = model.N();
  std::mt19937_64 gen(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, std::sqrt(model.sigma2() / (2.0 * N)));

  Realization r;
  r.seed = seed;
  r.sigma_matrix.resize(M, N);
  // Column-major fill order is part of the reproducibility contract.
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < M; ++i) {
      const double re = normal(gen);
      const double im = normal(gen);
      r.sigma_matrix(i, j) = Complex(re, im);
    }
  }
  for (int k = 0; k < model.K(); ++k) {
    r.sigma_matrix.col(k) += std::sqrt(model.lambda(k)) * model.U().col(k);
  }
  return r;
}

Complex projected_product(const SignalModel& model, const CVector& a, const CVector& b,
                          int level) {
  if (a.size() != model.M() || b.size() != model.M()) {
    throw ConfigError("probe vector length does not match M");
  }
  const auto& levels = model.levels();
  if (level < 0 || level > static_cast<int>(levels.size())) {
    throw ConfigError("level index out of range");
  }
  const CMatrix& U = model.U();
  if (level < static_cast<int>(levels.size())) {
    Complex acc = 0.0;
    for (int k : levels[static_cast<std::size_t>(level)].indices) {
      acc += std::conj(U.col(k).dot(a)) * U.col(k).dot(b);
    }
    return acc;
  }
  Complex acc = a.dot(b);
  for (int k = 0; k < model.K(); ++k) {
    acc -= std::conj(U.col(k).dot(a)) * U.col(k).dot(b);
  }
  return acc;
}

Complex eta_true(const SignalModel& model, const SubspaceQuery& q) {
  return projected_product(model, q.d1(), q.d2(), static_cast<int>(model.levels().size()));
}

}  // namespace gmusic
