// Copyright 2026 The SGLSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "sglss/kernels.hpp"
#include "sglss/mua.hpp"
#include "sglss/sampler.hpp"
#include "sglss/simulate.hpp"

namespace {

using namespace sglss;

std::pair<Dataset, sim::GroundTruth> scenario(std::size_t side) {
  sim::SimulationOptions o;
  o.rows = o.cols = side;
  return sim::gen_scenario1(1, o);
}

void BM_Sweep(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto [data, truth] = scenario(side);
  Hyperparams h = Hyperparams::defaults(data.q(), data.p());
  h.kernel = truth.kernel;
  const ScaleMatrix psi = build_psi(data.grid, h.kernel);
  GibbsSampler g(data, h, psi, initial_state(data, h, psi, InitPolicy::kMua), 1);
  std::uint64_t it = 0;
  for (auto _ : state) {
    g.set_iteration(it++);
    g.sweep();
  }
  state.counters["p"] = static_cast<double>(data.p());
}
BENCHMARK(BM_Sweep)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_UpdateZ(benchmark::State& state) {
  const auto [data, truth] = scenario(static_cast<std::size_t>(state.range(0)));
  Hyperparams h = Hyperparams::defaults(data.q(), data.p());
  h.kernel = truth.kernel;
  const ScaleMatrix psi = build_psi(data.grid, h.kernel);
  GibbsSampler g(data, h, psi, initial_state(data, h, psi, InitPolicy::kMua), 1);
  std::uint64_t it = 0;
  for (auto _ : state) {
    g.set_iteration(it++);
    g.update_Z();
  }
}
BENCHMARK(BM_UpdateZ)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SampleIwDawid(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const LocationGrid grid = LocationGrid::lattice(side, side, 1.0 / static_cast<double>(side - 1));
  const ScaleMatrix psi = build_psi(grid, MaternKernel{1.0, 0.25});
  std::uint64_t it = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_iw_dawid(5, psi, 1, it++, 6));
  }
}
BENCHMARK(BM_SampleIwDawid)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_MaternGram(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Matrix dist = LocationGrid::lattice(side, side, 1.0 / static_cast<double>(side - 1)).distances();
  for (auto _ : state) {
    benchmark::DoNotOptimize(matern52_gram(dist, MaternKernel{1.0, 0.25}));
  }
}
BENCHMARK(BM_MaternGram)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_MuaPipeline(benchmark::State& state) {
  const auto [data, truth] = scenario(30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mua::mua_pipeline(data, 0.05));
  }
}
BENCHMARK(BM_MuaPipeline)->Unit(benchmark::kMillisecond);

void BM_KernelFit(benchmark::State& state) {
  const auto [data, truth] = scenario(20);
  const Matrix beta = mua::ols_coefficients(data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_kernel_empirical(data, beta));
  }
}
BENCHMARK(BM_KernelFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
