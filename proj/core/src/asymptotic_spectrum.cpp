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

#include "gmusic/asymptotic_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gmusic/errors.hpp"

namespace gmusic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double scale_of(Complex z) { return std::max(1.0, std::abs(z)); }

}  // namespace

SpectralSupport::Where SpectralSupport::locate(double x, int* index) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(x));
  int left = -1;
  for (int q = 0; q < Q(); ++q) {
    const Cluster& cl = clusters[static_cast<std::size_t>(q)];
    if (std::abs(x - cl.lo) <= tol || std::abs(x - cl.hi) <= tol) {
      if (index) *index = q;
      return Where::Edge;
    }
    if (x > cl.lo && x < cl.hi) {
      if (index) *index = q;
      return Where::Cluster;
    }
    if (x > cl.hi) left = q;
  }
  if (index) *index = left;
  return Where::Gap;
}

AsymptoticSpectrum::AsymptoticSpectrum(SignalModel model) : model_(std::move(model)) {
  compute_support();
}

void AsymptoticSpectrum::check_pole(Complex w) const {
  if (std::abs(w) <= 1e-300) throw DomainError("phi evaluated at its pole w = 0");
  for (const auto& lv : model_.levels()) {
    if (std::abs(w - lv.lambda) <= 1e-14 * std::max(1.0, lv.lambda)) {
      std::ostringstream os;
      os << "phi evaluated at its pole w = " << lv.lambda;
      throw DomainError(os.str());
    }
  }
}

Complex AsymptoticSpectrum::f(Complex w) const {
  check_pole(w);
  const double M = model_.M();
  Complex acc = -static_cast<double>(model_.M() - model_.K()) / w;
  for (const auto& lv : model_.levels()) acc += static_cast<double>(lv.multiplicity) / (lv.lambda - w);
  return acc / M;
}

PhiValue AsymptoticSpectrum::phi(Complex w) const {
  check_pole(w);
  const double M = model_.M();
  const double noise = model_.M() - model_.K();
  Complex fv = -noise / w;
  Complex fp = noise / (w * w);
  for (const auto& lv : model_.levels()) {
    const Complex r = 1.0 / (lv.lambda - w);
    fv += static_cast<double>(lv.multiplicity) * r;
    fp += static_cast<double>(lv.multiplicity) * r * r;
  }
  fv /= M;
  fp /= M;
  const double s2 = model_.sigma2();
  const double c = model_.c();
  const Complex a = 1.0 - s2 * c * fv;
  const Complex ap = -s2 * c * fp;
  return {w * a * a + s2 * (1.0 - c) * a, a * a + 2.0 * w * a * ap + s2 * (1.0 - c) * ap};
}

Complex AsymptoticSpectrum::phi_second(Complex w) const {
  check_pole(w);
  const double M = model_.M();
  const double noise = model_.M() - model_.K();
  Complex fv = -noise / w;
  Complex fp = noise / (w * w);
  Complex fpp = -2.0 * noise / (w * w * w);
  for (const auto& lv : model_.levels()) {
    const Complex r = 1.0 / (lv.lambda - w);
    const double n = lv.multiplicity;
    fv += n * r;
    fp += n * r * r;
    fpp += 2.0 * n * r * r * r;
  }
  fv /= M;
  fp /= M;
  fpp /= M;
  const double s2 = model_.sigma2();
  const double c = model_.c();
  const Complex a = 1.0 - s2 * c * fv;
  const Complex ap = -s2 * c * fp;
  const Complex app = -s2 * c * fpp;
  return 4.0 * a * ap + 2.0 * w * (ap * ap + a * app) + s2 * (1.0 - c) * app;
}

void AsymptoticSpectrum::compute_support() {
  const double M = model_.M();
  const double K = model_.K();
  const double s2 = model_.sigma2();
  const double c = model_.c();
  const auto& levels = model_.levels();

  // phi = num / den with den = w R^2, R = prod_j (v_j - w) over distinct levels.
  Polynomial R = Polynomial::constant(1.0);
  for (const auto& lv : levels) R = R * Polynomial::linear(lv.lambda, -1.0);
  const Polynomial W = Polynomial::linear(0.0, 1.0);
  Polynomial F = R * Complex(-(M - K));
  for (std::size_t j = 0; j < levels.size(); ++j) {
    Polynomial prod = W * Complex(static_cast<double>(levels[j].multiplicity));
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (i != j) prod = prod * Polynomial::linear(levels[i].lambda, -1.0);
    F = F + prod;
  }
  const Polynomial A = W * R - F * Complex(s2 * c / M);
  num_ = A * A + A * R * Complex(s2 * (1.0 - c));
  den_ = W * R * R;

  // Critical points of phi: the common factor R of num' den - num den' is
  // divided out, otherwise every pole shows up as a spurious root.
  const Polynomial crit = num_.derivative() * W * R - num_ * (R + W * R.derivative() * Complex(2.0));
  std::vector<Complex> raw = crit.roots();
  const Polynomial crit_prime = crit.derivative();
  for (Complex& r : raw) {
    for (int it = 0; it < 8; ++it) {
      const Complex d = crit_prime(r);
      if (d == 0.0) break;
      const Complex step = crit(r) / d;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      r -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(r))) break;
    }
  }

  auto near_pole = [&](double w) {
    if (std::abs(w) <= 1e-10) return true;
    for (const auto& lv : levels)
      if (std::abs(w - lv.lambda) <= 1e-10 * std::max(1.0, lv.lambda)) return true;
    return false;
  };

  for (double tol : {1e-9, 1e-6}) {
    std::vector<double> ext;
    for (const Complex& r : raw) {
      if (!std::isfinite(r.real()) || std::abs(r.imag()) >= tol * std::max(1.0, std::abs(r.real())))
        continue;
      double w = r.real();
      if (near_pole(w)) continue;
      for (int it = 0; it < 60; ++it) {
        const double d1 = phi(w).phi_prime.real();
        const double d2 = phi_second(w).real();
        if (d2 == 0.0) break;
        const double step = d1 / d2;
        w -= step;
        if (near_pole(w)) break;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(w))) break;
      }
      if (near_pole(w)) continue;
      if (!(phi(w).phi.real() > 0.0)) continue;
      const bool dup = std::any_of(ext.begin(), ext.end(), [&](double e) {
        return std::abs(e - w) <= 1e-9 * std::max(1.0, std::abs(w));
      });
      if (!dup) ext.push_back(w);
    }
    std::sort(ext.begin(), ext.end());

    bool ok = !ext.empty() && ext.size() % 2 == 0;
    std::vector<Cluster> clusters;
    for (std::size_t q = 0; ok && q < ext.size() / 2; ++q) {
      const double wl = ext[2 * q];
      const double wh = ext[2 * q + 1];
      Cluster cl{phi(wl).phi.real(), phi(wh).phi.real(), wl, wh};
      if (!(phi_second(wl).real() < 0.0 && phi_second(wh).real() > 0.0 && cl.lo < cl.hi)) ok = false;
      if (!clusters.empty() && !(clusters.back().hi < cl.lo)) ok = false;
      clusters.push_back(cl);
    }
    if (ok && !(clusters.front().w_lo < 0.0 && clusters.front().w_hi > 0.0)) ok = false;
    if (ok && model_.K() > 0 && !(clusters.back().w_hi > model_.lambda(0))) ok = false;
    for (const auto& lv : levels) {
      if (!ok) break;
      ok = std::any_of(clusters.begin(), clusters.end(),
                       [&](const Cluster& cl) { return lv.lambda > cl.w_lo && lv.lambda < cl.w_hi; });
    }
    if (!ok) continue;
    support_.clusters = std::move(clusters);
    break;
  }
  if (support_.clusters.empty()) {
    throw NumericalError("inconsistent extrema pairing while computing the support");
  }

  SpectralSupport& S = support_;
  const int Q = S.Q();
  double min_gap = kInf;
  for (int q = 0; q + 1 < Q; ++q)
    min_gap = std::min(min_gap, S.clusters[static_cast<std::size_t>(q + 1)].lo -
                                    S.clusters[static_cast<std::size_t>(q)].hi);
  S.epsilon = Q == 1 ? 0.5 : std::min(0.25 * min_gap, 0.5);
  S.delta = std::max(0.25, S.epsilon);
  const Cluster& c1 = S.clusters.front();
  S.t1_minus = std::max(c1.lo - S.epsilon, 0.5 * c1.lo);
  S.t1_plus = c1.hi + S.epsilon;
  if (Q >= 2) {
    S.t2_minus = S.clusters[1].lo - S.epsilon;
    S.t2_plus = S.clusters.back().hi + S.epsilon;
  } else {
    S.t2_minus = kNaN;
    S.t2_plus = kNaN;
  }

  S.level_cluster.clear();
  for (const auto& lv : levels) {
    int found = -1;
    for (int q = 0; q < Q; ++q) {
      const Cluster& cl = S.clusters[static_cast<std::size_t>(q)];
      if (lv.lambda > cl.w_lo && lv.lambda < cl.w_hi) found = q;
    }
    if (found < 0) throw NumericalError("signal eigenvalue not attached to any cluster");
    S.level_cluster.push_back(found);
  }

  if (model_.K() == 0) {
    S.a1 = true;
    S.a2 = true;
    S.w_at_t2_minus = kNaN;
  } else {
    S.a1 = Q >= 2;
    if (S.a1) {
      S.w_at_t2_minus = solve_real(S.t2_minus).real();
      S.a2 = S.w_at_t2_minus < model_.lambdas().back();
    } else {
      S.w_at_t2_minus = kNaN;
      S.a2 = false;
    }
  }
}

std::vector<Complex> AsymptoticSpectrum::preimages(Complex z) const {
  return (num_ - den_ * z).roots();
}

Complex AsymptoticSpectrum::polish(Complex z, Complex w) const {
  double res = std::abs(phi(w).phi - z);
  for (int it = 0; it < 8 && res > 0.0; ++it) {
    const PhiValue pv = phi(w);
    if (pv.phi_prime == Complex(0.0)) break;
    const Complex next = w - (pv.phi - z) / pv.phi_prime;
    double r2;
    try {
      r2 = std::abs(phi(next).phi - z);
    } catch (const DomainError&) {
      break;
    }
    if (!(r2 < res)) break;
    w = next;
    res = r2;
  }
  return w;
}

Complex AsymptoticSpectrum::solve_real(double x) const {
  int idx = -1;
  const auto where = support_.locate(x, &idx);
  if (where == SpectralSupport::Where::Edge) {
    std::ostringstream os;
    os << "z = " << x << " lies on the boundary of the support";
    throw DomainError(os.str());
  }
  const std::vector<Complex> roots = preimages(x);
  if (where == SpectralSupport::Where::Cluster) {
    Complex best(0.0, -kInf);
    for (const Complex& r : roots)
      if (r.imag() > best.imag()) best = r;
    if (!(best.imag() > 0.0)) throw NumericalError("no complex preimage inside a cluster");
    return polish(x, best);
  }

  const int Q = support_.Q();
  const double lo = idx < 0 ? -kInf : support_.clusters[static_cast<std::size_t>(idx)].w_hi;
  const double hi = idx + 1 < Q ? support_.clusters[static_cast<std::size_t>(idx + 1)].w_lo : kInf;
  double best = kNaN;
  double best_im = kInf;
  for (const Complex& r : roots) {
    if (r.real() > lo && r.real() < hi && std::abs(r.imag()) < best_im) {
      best = r.real();
      best_im = std::abs(r.imag());
    }
  }
  if (!std::isfinite(best) || best_im > 1e-6 * std::max(1.0, std::abs(best))) {
    throw NumericalError("no real preimage in the gap interval");
  }
  // phi is increasing on the gap preimage, so Newton stays bracketed.
  double w = best;
  for (int it = 0; it < 50; ++it) {
    const PhiValue pv = phi(w);
    const double step = (pv.phi.real() - x) / pv.phi_prime.real();
    double next = w - step;
    if (!(next > lo && next < hi)) next = 0.5 * (w + (step > 0 ? lo : hi));
    if (!std::isfinite(next)) break;
    w = next;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

Complex AsymptoticSpectrum::solve_upper(Complex z) const {
  const std::vector<Complex> roots = preimages(z);
  struct Candidate {
    Complex w;
    int score;
  };
  std::vector<Candidate> cands;
  const double s2 = model_.sigma2();
  const double c = model_.c();
  for (const Complex& r0 : roots) {
    if (!(r0.imag() > 0.0)) continue;
    Complex r;
    try {
      r = polish(z, r0);
    } catch (const DomainError&) {
      continue;
    }
    if (!(r.imag() > 0.0)) continue;
    const Complex s = 1.0 / (1.0 - s2 * c * f(r));
    const Complex m = s * f(r);
    const Complex mt = c * m - (1.0 - c) / z;
    int score = 0;
    score += m.imag() > 0.0;
    score += mt.imag() > 0.0;
    score += (z * m).imag() >= -1e-12 * std::abs(z * m);
    score += (z * mt).imag() >= -1e-12 * std::abs(z * mt);
    bool diag_ok = model_.M() == model_.K() || (-s / r).imag() > 0.0;
    for (const auto& lv : model_.levels()) diag_ok = diag_ok && (s / (lv.lambda - r)).imag() > 0.0;
    score += diag_ok;
    cands.push_back({r, score});
  }
  if (cands.empty()) throw NumericalError("no preimage with positive imaginary part");

  int top = 0;
  for (const auto& cd : cands) top = std::max(top, cd.score);
  std::vector<Complex> best;
  for (const auto& cd : cands)
    if (cd.score == top) best.push_back(cd.w);
  if (best.size() == 1) return best.front();

  // Ambiguous: follow continuity from the real axis.
  int idx = -1;
  const auto where = support_.locate(z.real(), &idx);
  if (where != SpectralSupport::Where::Edge) {
    const Complex ref = solve_real(z.real());
    return *std::min_element(best.begin(), best.end(), [&](Complex a, Complex b) {
      return std::abs(a - ref) < std::abs(b - ref);
    });
  }
  return *std::max_element(best.begin(), best.end(),
                           [](Complex a, Complex b) { return a.imag() < b.imag(); });
}

WPoint AsymptoticSpectrum::finish(Complex z, Complex w) const {
  const double s2 = model_.sigma2();
  const double c = model_.c();
  const PhiValue pv = phi(w);
  if (std::abs(pv.phi - z) > 1e-10 * scale_of(z)) {
    std::ostringstream os;
    os << "preimage residual " << std::abs(pv.phi - z) << " too large at z = " << z;
    throw NumericalError(os.str());
  }
  WPoint p;
  p.z = z;
  p.w = w;
  const Complex fv = f(w);
  p.s = 1.0 / (1.0 - s2 * c * fv);
  p.m = p.s * fv;
  p.mtilde = c * p.m - (1.0 - c) / z;
  p.stilde = p.s - s2 * (1.0 - c) / z;
  p.wprime = 1.0 / pv.phi_prime;
  return p;
}

WPoint AsymptoticSpectrum::solve(Complex z) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("non-finite z");
  if (z == Complex(0.0)) throw DomainError("z = 0 is a pole of mtilde");
  if (z.imag() < 0.0) {
    WPoint p = solve(std::conj(z));
    p.z = std::conj(p.z);
    p.w = std::conj(p.w);
    p.m = std::conj(p.m);
    p.mtilde = std::conj(p.mtilde);
    p.wprime = std::conj(p.wprime);
    p.s = std::conj(p.s);
    p.stilde = std::conj(p.stilde);
    return p;
  }
  if (z.imag() == 0.0) return finish(z, solve_real(z.real()));
  return finish(z, solve_upper(z));
}

ResolventDiagonal AsymptoticSpectrum::resolvent(const WPoint& p) const {
  const int M = model_.M();
  const int N = model_.N();
  const int K = model_.K();
  ResolventDiagonal rd;
  rd.t_diag.resize(static_cast<std::size_t>(M));
  rd.ttilde_signal.resize(static_cast<std::size_t>(K));
  Complex sum_t = 0.0;
  Complex sum_tt = 0.0;
  for (int k = 0; k < K; ++k) {
    const Complex inv = 1.0 / (model_.lambda(k) - p.w);
    rd.t_diag[static_cast<std::size_t>(k)] = p.s * inv;
    rd.ttilde_signal[static_cast<std::size_t>(k)] = p.stilde * inv;
    sum_t += p.s * inv;
    sum_tt += p.stilde * inv;
  }
  const Complex tn = -p.s / p.w;
  for (int k = K; k < M; ++k) rd.t_diag[static_cast<std::size_t>(k)] = tn;
  sum_t += static_cast<double>(M - K) * tn;
  rd.ttilde_noise = -1.0 / (p.z * p.s);
  sum_tt += static_cast<double>(N - K) * rd.ttilde_noise;

  const Complex m_chk = sum_t / static_cast<double>(M);
  const Complex mt_chk = sum_tt / static_cast<double>(N);
  if (std::abs(m_chk - p.m) > 1e-9 * std::max(1.0, std::abs(p.m)) ||
      std::abs(mt_chk - p.mtilde) > 1e-9 * std::max(1.0, std::abs(p.mtilde))) {
    throw NumericalError("trace of the resolvent equivalent does not match m");
  }
  return rd;
}

DensitySample AsymptoticSpectrum::density(double x) const {
  int idx = -1;
  auto where = support_.locate(x, &idx);
  DensitySample out;
  if (where == SpectralSupport::Where::Gap) return out;
  if (where == SpectralSupport::Where::Edge) {
    out.near_edge = true;
    const Cluster& cl = support_.clusters[static_cast<std::size_t>(idx)];
    const double tol = 1e-8 * std::max(1.0, std::abs(x));
    x = std::abs(x - cl.lo) < std::abs(x - cl.hi) ? cl.lo + tol : cl.hi - tol;
  }
  const WPoint p = solve(Complex(x, 0.0));
  out.value = std::max(0.0, p.m.imag() / std::numbers::pi);
  return out;
}

Complex f_eval(const SignalModel& model, Complex w) {
  return AsymptoticSpectrum(model).f(w);
}

PhiValue phi_eval(const SignalModel& model, Complex w) {
  return AsymptoticSpectrum(model).phi(w);
}

SpectralSupport support_compute(const SignalModel& model) {
  return AsymptoticSpectrum(model).support();
}

double SpikedSummary::phi(double w) const { return (w + sigma2 * c) * (w + sigma2) / w; }

Complex SpikedSummary::w(Complex z) const {
  if (z.imag() < 0.0) return std::conj(w(std::conj(z)));
  const Complex b = z - sigma2 * (1.0 + c);
  const Complex root = std::sqrt(b * b - 4.0 * sigma2 * sigma2 * c);
  const Complex r1 = 0.5 * (b + root);
  const Complex r2 = 0.5 * (b - root);
  if (z.imag() > 0.0) return r1.imag() > r2.imag() ? r1 : r2;
  const double x = z.real();
  const double tol = 1e-9 * std::max(1.0, std::abs(x));
  if (std::abs(x - mp_lo) <= tol || std::abs(x - mp_hi) <= tol) {
    throw DomainError("z lies on the Marchenko-Pastur edge");
  }
  if (x > mp_hi) return std::max(r1.real(), r2.real());
  if (x < mp_lo) return std::min(r1.real(), r2.real());
  return r1.imag() > r2.imag() ? r1 : r2;
}

Complex SpikedSummary::m(Complex z) const { return -1.0 / (w(z) + sigma2 * c); }

Complex SpikedSummary::delta(Complex z1, Complex z2) const {
  return 1.0 - sigma2 * sigma2 * c / (w(z1) * w(z2));
}

double SpikedSummary::w_right(double x) const {
  if (!(x > mp_hi)) {
    std::ostringstream os;
    os << "x = " << x << " is not above the Marchenko-Pastur edge " << mp_hi;
    throw DomainError(os.str());
  }
  const double b = x - sigma2 * (1.0 + c);
  return 0.5 * (b + std::sqrt(std::max(0.0, b * b - 4.0 * sigma2 * sigma2 * c)));
}

double SpikedSummary::h(double x) const {
  const double wv = w_right(x);
  return wv * (wv + sigma2 * c) / (wv * wv - sigma2 * sigma2 * c);
}

SpikedSummary spiked_pack(const SignalModel& model) {
  SpikedSummary s;
  s.sigma2 = model.sigma2();
  s.c = model.c();
  const double rc = std::sqrt(s.c);
  s.mp_lo = s.sigma2 * (1.0 - rc) * (1.0 - rc);
  s.mp_hi = s.sigma2 * (1.0 + rc) * (1.0 + rc);
  s.margin = model.K() == 0 ? std::numeric_limits<double>::infinity()
                            : model.lambdas().back() - s.sigma2 * rc;
  for (double l : model.lambdas()) s.limits.push_back(s.phi(l));
  return s;
}

}  // namespace gmusic
