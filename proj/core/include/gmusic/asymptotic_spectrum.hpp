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

#include <vector>

#include "gmusic/model.hpp"
#include "gmusic/polynomial.hpp"
#include "gmusic/types.hpp"

namespace gmusic {

struct PhiValue {
  Complex phi;
  Complex phi_prime;
};

// One connected component [lo, hi] of the support of the limiting
// spectral measure, together with its preimages under phi.
struct Cluster {
  double lo = 0.0;
  double hi = 0.0;
  double w_lo = 0.0;
  double w_hi = 0.0;
};

struct SpectralSupport {
  std::vector<Cluster> clusters;

  // Margins around the noise cluster (t1) and the block of signal
  // clusters (t2). t2 values are NaN when there is a single cluster.
  double t1_minus = 0.0;
  double t1_plus = 0.0;
  double t2_minus = 0.0;
  double t2_plus = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;

  bool a1 = false;  // noise cluster isolated from the rest
  bool a2 = false;  // only the zero eigenvalue is attached to the noise cluster
  double w_at_t2_minus = 0.0;

  // Cluster index (0-based) attached to each signal level of the model.
  std::vector<int> level_cluster;

  int Q() const noexcept { return static_cast<int>(clusters.size()); }
  bool separated() const noexcept { return a1 && a2; }

  enum class Where { Gap, Cluster, Edge };
  // Classifies a real point. `index` receives the cluster index, or for a
  // gap the index of the cluster immediately to the left (-1 if none).
  Where locate(double x, int* index = nullptr) const;
};

struct WPoint {
  Complex z;
  Complex w;
  Complex m;
  Complex mtilde;
  Complex wprime;
  Complex s;       // 1 + sigma2 c m
  Complex stilde;  // 1 + sigma2 mtilde
};

struct ResolventDiagonal {
  std::vector<Complex> t_diag;         // M entries, signal first, then noise
  std::vector<Complex> ttilde_signal;  // K entries
  Complex ttilde_noise;                // shared by the N - K noise entries
};

struct DensitySample {
  double value = 0.0;
  bool near_edge = false;
};

// Deterministic equivalents of the model: phi, its support, w(z), m(z),
// the diagonal of T(z) and the density. The support is computed once at
// construction; every method is const and thread-safe.
class AsymptoticSpectrum {
 public:
  explicit AsymptoticSpectrum(SignalModel model);

  const SignalModel& model() const noexcept { return model_; }
  const SpectralSupport& support() const noexcept { return support_; }

  Complex f(Complex w) const;
  PhiValue phi(Complex w) const;
  Complex phi_second(Complex w) const;

  WPoint solve(Complex z) const;
  ResolventDiagonal resolvent(const WPoint& p) const;
  DensitySample density(double x) const;

 private:
  void check_pole(Complex w) const;
  WPoint finish(Complex z, Complex w) const;
  Complex polish(Complex z, Complex w) const;
  Complex solve_real(double x) const;
  Complex solve_upper(Complex z) const;
  std::vector<Complex> preimages(Complex z) const;
  void compute_support();

  SignalModel model_;
  SpectralSupport support_;
  Polynomial num_;
  Polynomial den_;
};

Complex f_eval(const SignalModel& model, Complex w);
PhiValue phi_eval(const SignalModel& model, Complex w);
SpectralSupport support_compute(const SignalModel& model);

// Closed forms of the fixed-rank (spiked) regime, where the bulk is the
// Marchenko-Pastur law with ratio c and variance sigma2.
struct SpikedSummary {
  double sigma2 = 0.0;
  double c = 0.0;
  double margin = 0.0;  // lambda_K - sigma2 sqrt(c); +inf when K = 0
  std::vector<double> limits;  // phi(lambda_k), descending
  double mp_lo = 0.0;
  double mp_hi = 0.0;

  double phi(double w) const;
  // Branch of phi^{-1} with Im w > 0 for Im z > 0, continuous with the
  // real branches outside [mp_lo, mp_hi].
  Complex w(Complex z) const;
  Complex m(Complex z) const;
  Complex delta(Complex z1, Complex z2) const;
  // Real solution of phi(w) = x right of sigma2 sqrt(c); x > mp_hi.
  double w_right(double x) const;
  // Weight of the fixed-rank estimator, w (w + sigma2 c) / (w^2 - sigma2^2 c).
  double h(double x) const;
};

SpikedSummary spiked_pack(const SignalModel& model);

}  // namespace gmusic
