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

#include "gmusic/empirical_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gmusic/errors.hpp"

namespace gmusic {

EmpiricalSpectrum EmpiricalSpectrum::decompose(const SignalModel& model, const Realization& r) {
  if (r.sigma_matrix.rows() != model.M() || r.sigma_matrix.cols() != model.N()) {
    throw ConfigError("realization does not match the model dimensions");
  }
  const CMatrix gram = r.sigma_matrix * r.sigma_matrix.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");

  // Eigen returns ascending order; flip to descending.
  const int M = model.M();
  std::vector<double> lam(static_cast<std::size_t>(M));
  CMatrix u(M, M);
  for (int k = 0; k < M; ++k) {
    lam[static_cast<std::size_t>(k)] = std::max(0.0, es.eigenvalues()(M - 1 - k));
    u.col(k) = es.eigenvectors().col(M - 1 - k);
  }
  const double trace = gram.trace().real();
  double sum = 0.0;
  for (double l : lam) sum += l;
  if (std::abs(sum - trace) > 1e-8 * std::max(1.0, trace)) {
    throw NumericalError("eigenvalues do not reproduce the trace of the sample covariance");
  }
  return from_eigenpairs(model, std::move(lam), std::move(u));
}

EmpiricalSpectrum EmpiricalSpectrum::from_eigenpairs(const SignalModel& model,
                                                     std::vector<double> lambda_hat,
                                                     CMatrix u_hat) {
  const int M = model.M();
  if (static_cast<int>(lambda_hat.size()) != M || u_hat.rows() != M || u_hat.cols() != M) {
    throw ConfigError("eigenpairs do not match the model dimension");
  }
  for (int k = 0; k + 1 < M; ++k) {
    if (lambda_hat[static_cast<std::size_t>(k)] < lambda_hat[static_cast<std::size_t>(k + 1)]) {
      throw ConfigError("sample eigenvalues must be sorted in descending order");
    }
  }
  EmpiricalSpectrum s;
  s.model_ = model;
  s.lambda_hat_ = std::move(lambda_hat);
  s.u_hat_ = std::move(u_hat);
  s.compute_omegas();
  return s;
}

void EmpiricalSpectrum::compute_omegas() {
  const double beta = model_.sigma2() * model_.c();
  omega_hat_ = secular_roots(lambda_hat_, beta);
  has_ties_ = false;
  for (std::size_t k = 0; k + 1 < lambda_hat_.size(); ++k)
    if (lambda_hat_[k] == lambda_hat_[k + 1]) has_ties_ = true;
}

double EmpiricalSpectrum::secular(double w) const {
  double acc = 0.0;
  for (double l : lambda_hat_) acc += 1.0 / (l - w);
  return 1.0 + model_.sigma2() * model_.c() * acc / static_cast<double>(lambda_hat_.size());
}

std::vector<double> secular_roots(std::span<const double> lam, double beta) {
  const std::size_t M = lam.size();
  std::vector<double> out(M);
  const double scale = beta / static_cast<double>(M);
  std::vector<double> delta(M);

  for (std::size_t k = 0; k < M; ++k) {
    const double base = lam[k];
    const double width = k == 0 ? beta : lam[k - 1] - base;
    if (width <= 0.0) {
      out[k] = base;
      continue;
    }
    // Work in the shifted variable tau = w - lambda_k to keep the
    // distance to the nearest pole accurate.
    for (std::size_t j = 0; j < M; ++j) delta[j] = lam[j] - base;
    auto eval = [&](double tau, double* deriv) {
      double g = 0.0;
      double gp = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        const double inv = 1.0 / (delta[j] - tau);
        g += inv;
        gp += inv * inv;
      }
      *deriv = scale * gp;
      return 1.0 + scale * g;
    };

    double lo = 0.0;
    double hi = width;
    double tau = 0.5 * width;
    for (int it = 0; it < 200; ++it) {
      double gp = 0.0;
      const double g = eval(tau, &gp);
      if (g == 0.0) break;
      if (g < 0.0) lo = tau; else hi = tau;
      double next = tau - g / gp;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == tau || next == lo || next == hi) break;
      if (std::abs(g) <= 1e-14 && std::abs(next - tau) <= 4e-16 * std::max(tau, 1e-300)) {
        tau = next;
        break;
      }
      tau = next;
    }
    out[k] = base + tau;
  }
  return out;
}

EmpiricalStieltjes empirical_stieltjes(const EmpiricalSpectrum& spec, Complex z, WHatForm form) {
  const auto& lam = spec.lambda_hat();
  const double M = static_cast<double>(lam.size());
  Complex m = 0.0;
  Complex mp = 0.0;
  for (double l : lam) {
    if (std::abs(z - l) <= 1e-14 * std::max(1.0, l)) {
      std::ostringstream os;
      os << "empirical Stieltjes transform evaluated at the sample eigenvalue " << l;
      throw DomainError(os.str());
    }
    const Complex inv = 1.0 / (l - z);
    m += inv;
    mp += inv * inv;
  }
  m /= M;
  mp /= M;
  const double s2 = spec.model().sigma2();
  const double c = spec.model().c();
  const double gamma = form == WHatForm::Standard ? s2 * (1.0 - c) : s2;
  const Complex s = 1.0 + s2 * c * m;
  const Complex sp = s2 * c * mp;
  return {m, mp, z * s * s - gamma * s, s * s + 2.0 * z * s * sp - gamma * sp};
}

ConfinementVerdict confinement_check(const EmpiricalSpectrum& spec,
                                     const SpectralSupport& support) {
  const int K = spec.model().K();
  const int M = spec.M();
  auto inside = [](const std::vector<double>& v, int from, int to, double lo, double hi) {
    for (int k = from; k < to; ++k) {
      const double x = v[static_cast<std::size_t>(k)];
      if (!(x >= lo && x <= hi)) return false;
    }
    return true;
  };
  ConfinementVerdict v;
  v.noise_eigenvalues = inside(spec.lambda_hat(), K, M, support.t1_minus, support.t1_plus);
  v.noise_omegas = inside(spec.omega_hat(), K, M, support.t1_minus, support.t1_plus);
  if (K == 0) {
    v.signal_eigenvalues = true;
    v.signal_omegas = true;
  } else if (support.separated()) {
    v.signal_eigenvalues = inside(spec.lambda_hat(), 0, K, support.t2_minus, support.t2_plus);
    v.signal_omegas = inside(spec.omega_hat(), 0, K, support.t2_minus, support.t2_plus);
  }
  return v;
}

}  // namespace gmusic
