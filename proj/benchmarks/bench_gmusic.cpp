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

#include <benchmark/benchmark.h>

#include "gmusic/contour.hpp"
#include "gmusic/estimators.hpp"
#include "gmusic/fluctuations.hpp"

namespace gmusic {
namespace {

SignalModel spiked(int M) { return SignalModel::build_canonical(M, 2 * M, 1.0, {10, 6, 5}); }

void BM_Support(benchmark::State& state) {
  const SignalModel m = spiked(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(support_compute(m));
}
BENCHMARK(BM_Support)->Arg(20)->Arg(400);

void BM_WSolve(benchmark::State& state) {
  const AsymptoticSpectrum a(spiked(100));
  const auto nodes = contour_build(a.support(), 64).nodes();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(a.solve(nodes[i].z));
    i = (i + 1) % nodes.size();
  }
}
BENCHMARK(BM_WSolve);

void BM_VarianceTable(benchmark::State& state) {
  const AsymptoticSpectrum a(spiked(100));
  const auto c = contour_build(a.support(), 128);
  VarianceOptions opt;
  opt.nodes_per_side = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(variance_table(a, c, VarianceMethod::Numeric, opt));
}
BENCHMARK(BM_VarianceTable)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  const SignalModel m = spiked(static_cast<int>(state.range(0)));
  const Realization r = sample_realization(m, 1);
  for (auto _ : state) benchmark::DoNotOptimize(EmpiricalSpectrum::decompose(m, r));
}
BENCHMARK(BM_Decompose)->Arg(20)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_EtaImproved(benchmark::State& state) {
  const SignalModel m = spiked(160);
  const AsymptoticSpectrum a(m);
  const auto c = contour_build(a.support(), 128);
  const auto s = EmpiricalSpectrum::decompose(m, sample_realization(m, 1));
  const auto q = SubspaceQuery::canonical(160, 160, 159);
  const auto method = state.range(0) ? ImprovedMethod::Quadrature : ImprovedMethod::Residue;
  for (auto _ : state) benchmark::DoNotOptimize(eta_improved(s, c, q, method));
}
BENCHMARK(BM_EtaImproved)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace gmusic

BENCHMARK_MAIN();
