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

#include <optional>

#include "gmusic/asymptotic_spectrum.hpp"
#include "gmusic/contour.hpp"
#include "gmusic/empirical_spectrum.hpp"
#include "gmusic/model.hpp"

namespace gmusic {

enum class ImprovedMethod { Residue, Quadrature, Both };

struct ImprovedEstimate {
  Complex value;
  std::optional<Complex> residue;
  std::optional<Complex> quadrature;
  int quadrature_nodes = 0;   // nodes per side at convergence
  bool contour_moved = false; // a pole was too close to the rectangle
  bool tie_fallback = false;  // residue requested but sample eigenvalues tie
};

// d1* (I - sum_{k<=K} u_hat_k u_hat_k*) d2.
Complex eta_traditional(const EmpiricalSpectrum& spec, const SubspaceQuery& q);

// d1* d2 - (1 / 2 pi i) oint d1* Q(z) d2  w_hat'(z) / (1 + sigma2 c m_hat(z)) dz
// over the clockwise rectangle. K = 0 returns d1* d2.
ImprovedEstimate eta_improved(const EmpiricalSpectrum& spec, const RectContour& contour,
                              const SubspaceQuery& q, ImprovedMethod method = ImprovedMethod::Residue,
                              WHatForm form = WHatForm::Standard);

// Deterministic limit of the traditional estimator:
// d1* d2 - (1 / 2 pi i) oint d1* T(z) d2 dz.
Complex eta_traditional_limit(const AsymptoticSpectrum& spectrum, const RectContour& contour,
                              const SubspaceQuery& q);

// Fixed-rank simplification: d1* (I - sum_k h(lambda_hat_k) u_hat_k u_hat_k*) d2.
Complex eta_spiked(const EmpiricalSpectrum& spec, const SubspaceQuery& q);

struct EstimateResult {
  Complex eta_true;
  Complex eta_improved;
  std::optional<Complex> eta_improved_quadrature;
  Complex eta_traditional;
  Complex eta_traditional_limit;
  std::optional<Complex> eta_spiked;
  ConfinementVerdict confinement;
};

// Every estimator for one realization. The spiked value is included when
// the fixed-rank margin is positive and every signal eigenvalue lies above
// the bulk edge.
EstimateResult estimate_all(const AsymptoticSpectrum& spectrum, const RectContour& contour,
                            const EmpiricalSpectrum& spec, const SubspaceQuery& q,
                            ImprovedMethod method = ImprovedMethod::Both);

}  // namespace gmusic
