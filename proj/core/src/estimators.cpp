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

#include "gmusic/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "gmusic/errors.hpp"

namespace gmusic {

namespace {

constexpr int kMaxNodesPerSide = 4096;
const Complex kTwoPiI(0.0, 2.0 * std::numbers::pi);

// a_j = (d1* u_j)(u_j* d2)
std::vector<Complex> weights(const EmpiricalSpectrum& spec, const SubspaceQuery& q) {
  if (q.size() != spec.M()) throw ConfigError("probe vector length does not match M");
  const CMatrix& U = spec.u_hat();
  const CVector p1 = U.adjoint() * q.d1();
  const CVector p2 = U.adjoint() * q.d2();
  std::vector<Complex> a(static_cast<std::size_t>(spec.M()));
  for (int j = 0; j < spec.M(); ++j) a[static_cast<std::size_t>(j)] = std::conj(p1(j)) * p2(j);
  return a;
}

Complex residue_sum(const EmpiricalSpectrum& spec, const RectContour& contour,
                    const std::vector<Complex>& a, double gamma) {
  const auto& lam = spec.lambda_hat();
  const auto& om = spec.omega_hat();
  const std::size_t M = lam.size();
  const double beta = spec.model().sigma2() * spec.model().c() / static_cast<double>(M);

  Complex total = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    if (!contour.encloses(lam[k])) continue;
    const double lk = lam[k];
    Complex ra = -a[k];
    Complex rb = 0.0;
    Complex rc_pair = 0.0;
    double rc_omega = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      rc_omega += 1.0 / (lk - om[i]);
      if (i == k) continue;
      const double d = lk - lam[i];
      ra += beta * (a[k] + a[i]) / d;
      rb += 2.0 * beta * (a[i] * lam[i] - a[k] * lk) / (d * d);
      rc_pair += (a[k] + a[i]) / d;
    }
    total += ra + rb + gamma * (a[k] * rc_omega - rc_pair);
  }
  for (std::size_t k = 0; k < M; ++k) {
    if (!contour.encloses(om[k])) continue;
    Complex acc = 0.0;
    for (std::size_t i = 0; i < M; ++i) acc += a[i] / (om[k] - lam[i]);
    total += gamma * acc;
  }
  return total;
}

// (1 / 2 pi i) oint of the integrand, using the conjugate symmetry of the
// lower half of the rectangle.
Complex contour_integral(const EmpiricalSpectrum& spec, const std::vector<Complex>& a,
                         const std::vector<ContourNode>& up, double gamma) {
  const auto& lam = spec.lambda_hat();
  const std::size_t M = lam.size();
  const double s2c = spec.model().sigma2() * spec.model().c();
  Complex direct = 0.0;
  Complex mirrored = 0.0;
  for (const ContourNode& nd : up) {
    Complex q = 0.0;
    Complex qc = 0.0;
    Complex m = 0.0;
    Complex mp = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const Complex inv = 1.0 / (lam[j] - nd.z);
      q += a[j] * inv;
      qc += std::conj(a[j]) * inv;
      m += inv;
      mp += inv * inv;
    }
    m /= static_cast<double>(M);
    mp /= static_cast<double>(M);
    const Complex s = 1.0 + s2c * m;
    const Complex sp = s2c * mp;
    const Complex g = (s * s + 2.0 * nd.z * s * sp - gamma * sp) / s * nd.weight;
    direct += q * g;
    mirrored += qc * g;
  }
  return (direct - std::conj(mirrored)) / kTwoPiI;
}

template <class Integral>
Complex adaptive(int n0, Integral&& integral, int* used) {
  int n = std::max(n0, 8);
  Complex prev = integral(n);
  while (true) {
    const int n2 = 2 * n;
    if (n2 > kMaxNodesPerSide) {
      std::ostringstream os;
      os << "contour quadrature did not stabilise with " << kMaxNodesPerSide << " nodes per side";
      throw NumericalError(os.str());
    }
    const Complex next = integral(n2);
    if (std::abs(next - prev) < 1e-9 * std::max(1.0, std::abs(next))) {
      if (used) *used = n2;
      return next;
    }
    prev = next;
    n = n2;
  }
}

}  // namespace

Complex eta_traditional(const EmpiricalSpectrum& spec, const SubspaceQuery& q) {
  if (q.size() != spec.M()) throw ConfigError("probe vector length does not match M");
  Complex acc = q.d1().dot(q.d2());
  const CMatrix& U = spec.u_hat();
  for (int k = 0; k < spec.model().K(); ++k) {
    acc -= std::conj(U.col(k).dot(q.d1())) * U.col(k).dot(q.d2());
  }
  return acc;
}

ImprovedEstimate eta_improved(const EmpiricalSpectrum& spec, const RectContour& contour,
                              const SubspaceQuery& q, ImprovedMethod method, WHatForm form) {
  ImprovedEstimate out;
  if (q.size() != spec.M()) throw ConfigError("probe vector length does not match M");
  const Complex base = q.d1().dot(q.d2());
  if (spec.model().K() == 0) {
    out.value = base;
    return out;
  }
  const double s2 = spec.model().sigma2();
  const double gamma = form == WHatForm::Standard ? s2 * (1.0 - spec.model().c()) : s2;
  const std::vector<Complex> a = weights(spec, q);

  std::vector<double> poles = spec.lambda_hat();
  poles.insert(poles.end(), spec.omega_hat().begin(), spec.omega_hat().end());
  const double min_dist = 0.25 * contour.epsilon();
  double nearest = std::numeric_limits<double>::infinity();
  for (double p : poles) nearest = std::min(nearest, contour.distance(p));
  const RectContour rect = nearest >= min_dist ? contour : contour.avoiding(poles, min_dist);
  out.contour_moved = nearest < min_dist;

  bool want_residue = method != ImprovedMethod::Quadrature;
  bool want_quad = method != ImprovedMethod::Residue;
  if (want_residue && spec.has_ties()) {
    out.tie_fallback = true;
    want_residue = false;
    want_quad = true;
  }
  if (want_residue) out.residue = base + residue_sum(spec, rect, a, gamma);
  if (want_quad) {
    const Complex integral = adaptive(
        rect.nodes_per_side(),
        [&](int n) { return contour_integral(spec, a, rect.upper_path(n), gamma); },
        &out.quadrature_nodes);
    out.quadrature = base - integral;
  }
  out.value = out.residue ? *out.residue : *out.quadrature;
  if (out.residue && out.quadrature) {
    const double gap = std::abs(*out.residue - *out.quadrature);
    if (gap > 1e-8 * std::max(1.0, std::abs(*out.residue))) {
      std::ostringstream os;
      os << "residue and quadrature values disagree by " << gap;
      throw NumericalError(os.str());
    }
  }
  return out;
}

Complex eta_traditional_limit(const AsymptoticSpectrum& spectrum, const RectContour& contour,
                              const SubspaceQuery& q) {
  const SignalModel& model = spectrum.model();
  const int L = static_cast<int>(model.levels().size());
  std::vector<Complex> p(static_cast<std::size_t>(L + 1));
  for (int l = 0; l <= L; ++l) p[static_cast<std::size_t>(l)] = projected_product(model, q.d1(), q.d2(), l);
  const Complex base = q.d1().dot(q.d2());
  if (model.K() == 0) return base;

  auto integral = [&](int n) {
    Complex direct = 0.0;
    Complex mirrored = 0.0;
    for (const ContourNode& nd : contour.upper_path(n)) {
      const WPoint wp = spectrum.solve(nd.z);
      Complex f = p[static_cast<std::size_t>(L)] * (-wp.s / wp.w);
      Complex fc = std::conj(p[static_cast<std::size_t>(L)]) * (-wp.s / wp.w);
      for (int l = 0; l < L; ++l) {
        const Complex t = wp.s / (model.levels()[static_cast<std::size_t>(l)].lambda - wp.w);
        f += p[static_cast<std::size_t>(l)] * t;
        fc += std::conj(p[static_cast<std::size_t>(l)]) * t;
      }
      direct += f * nd.weight;
      mirrored += fc * nd.weight;
    }
    return (direct - std::conj(mirrored)) / kTwoPiI;
  };
  return base - adaptive(contour.nodes_per_side(), integral, nullptr);
}

Complex eta_spiked(const EmpiricalSpectrum& spec, const SubspaceQuery& q) {
  const SpikedSummary sp = spiked_pack(spec.model());
  if (!(sp.margin > 0.0)) {
    std::ostringstream os;
    os << "fixed-rank separation margin is not positive (" << sp.margin << ")";
    throw SeparationError(os.str());
  }
  Complex acc = q.d1().dot(q.d2());
  const CMatrix& U = spec.u_hat();
  for (int k = 0; k < spec.model().K(); ++k) {
    const double x = spec.lambda_hat()[static_cast<std::size_t>(k)];
    if (!(x > sp.mp_hi)) {
      std::ostringstream os;
      os << "sample eigenvalue " << k + 1 << " (" << x << ") is below the bulk edge " << sp.mp_hi;
      throw DomainError(os.str());
    }
    acc -= sp.h(x) * std::conj(U.col(k).dot(q.d1())) * U.col(k).dot(q.d2());
  }
  return acc;
}

EstimateResult estimate_all(const AsymptoticSpectrum& spectrum, const RectContour& contour,
                            const EmpiricalSpectrum& spec, const SubspaceQuery& q,
                            ImprovedMethod method) {
  EstimateResult r;
  r.eta_true = eta_true(spectrum.model(), q);
  const ImprovedEstimate imp = eta_improved(spec, contour, q, method);
  r.eta_improved = imp.value;
  r.eta_improved_quadrature = imp.quadrature;
  r.eta_traditional = eta_traditional(spec, q);
  r.eta_traditional_limit = eta_traditional_limit(spectrum, contour, q);
  r.confinement = confinement_check(spec, spectrum.support());
  const SpikedSummary sp = spiked_pack(spectrum.model());
  bool spiked_ok = sp.margin > 0.0;
  for (int k = 0; spiked_ok && k < spectrum.model().K(); ++k)
    spiked_ok = spec.lambda_hat()[static_cast<std::size_t>(k)] > sp.mp_hi;
  if (spiked_ok) r.eta_spiked = eta_spiked(spec, q);
  return r;
}

}  // namespace gmusic
