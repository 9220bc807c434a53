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
#include "gmusic/model.hpp"

namespace gmusic {

// Which constant multiplies the affine term of w-hat. The standard form
// uses sigma2 (1 - c) so that w-hat tracks w(z); the literal form uses
// sigma2 alone and exists for comparison only.
enum class WHatForm { Standard, Literal };

// Eigen-analysis of one realization. Everything is sorted in descending
// order: lambda_hat[0] is the largest sample eigenvalue.
class EmpiricalSpectrum {
 public:
  static EmpiricalSpectrum decompose(const SignalModel& model, const Realization& r);
  // Builds the spectrum from given eigenpairs (columns of u_hat).
  static EmpiricalSpectrum from_eigenpairs(const SignalModel& model,
                                           std::vector<double> lambda_hat, CMatrix u_hat);

  const SignalModel& model() const noexcept { return model_; }
  const std::vector<double>& lambda_hat() const noexcept { return lambda_hat_; }
  const std::vector<double>& omega_hat() const noexcept { return omega_hat_; }
  const CMatrix& u_hat() const noexcept { return u_hat_; }
  bool has_ties() const noexcept { return has_ties_; }
  int M() const noexcept { return static_cast<int>(lambda_hat_.size()); }

  // 1 + sigma2 c m_hat(w), evaluated at a real point.
  double secular(double w) const;

 private:
  EmpiricalSpectrum() = default;
  void compute_omegas();

  SignalModel model_ = SignalModel::build_canonical(1, 2, 1.0, {});
  std::vector<double> lambda_hat_;
  std::vector<double> omega_hat_;
  CMatrix u_hat_;
  bool has_ties_ = false;
};

struct EmpiricalStieltjes {
  Complex m_hat;
  Complex m_hat_prime;
  Complex w_hat;
  Complex w_hat_prime;
};

EmpiricalStieltjes empirical_stieltjes(const EmpiricalSpectrum& spec, Complex z,
                                       WHatForm form = WHatForm::Standard);

// Roots of 1 + (beta / M) sum_j 1 / (lambda_j - w) for descending, distinct
// lambda and beta > 0; one root in (lambda_1, lambda_1 + beta) and one in each
// (lambda_{k+1}, lambda_k). Equal neighbours yield a root at the tie.
std::vector<double> secular_roots(std::span<const double> lambda_desc, double beta);

struct ConfinementVerdict {
  bool noise_eigenvalues = false;
  bool signal_eigenvalues = false;
  bool noise_omegas = false;
  bool signal_omegas = false;

  bool eigenvalues() const noexcept { return noise_eigenvalues && signal_eigenvalues; }
  bool omegas() const noexcept { return noise_omegas && signal_omegas; }
  bool all() const noexcept { return eigenvalues() && omegas(); }
};

// Smallest M - K sample eigenvalues in [t1-, t1+] and largest K in
// [t2-, t2+]; the same for the secular roots.
ConfinementVerdict confinement_check(const EmpiricalSpectrum& spec, const SpectralSupport& support);

}  // namespace gmusic
