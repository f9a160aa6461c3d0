// Copyright 2026 The helioprop Authors.
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

#include <random>
#include <vector>

#include "helioprop/hux.hpp"
#include "helioprop/metrics.hpp"
#include "helioprop/sfno.hpp"
#include "helioprop/sht.hpp"

using namespace helioprop;

namespace {

VelocityMap random_map(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(300.0, 800.0);
  VelocityMap m(g);
  for (auto& v : m.values) v = u(rng);
  return m;
}

OperatorConfig bench_config(std::size_t hidden) {
  OperatorConfig c;
  c.n_layers = 2;
  c.hidden_channels = hidden;
  c.lmax = 30;
  c.mmax = 16;
  c.nlat = 31;
  c.nlon = 32;
  c.out_channels = 5;
  c.seed = 1;
  return c;
}

void BM_ShtAnalysis(benchmark::State& state) {
  const auto lmax = static_cast<std::size_t>(state.range(0));
  const auto g = shared_gauss_legendre_grid(lmax + 1, 2 * ((lmax + 2) / 2) + 16);
  const auto t = shared_transform(g, lmax, std::min(lmax, g->nlon() / 2));
  const auto f = random_map(g, 1);
  std::vector<double> re(t->mode_count()), im(t->mode_count());
  for (auto _ : state) {
    t->analysis(f.values, re, im);
    benchmark::DoNotOptimize(re.data());
  }
}
BENCHMARK(BM_ShtAnalysis)->Arg(30)->Arg(110)->Unit(benchmark::kMicrosecond);

void BM_ShtSynthesisFullGrid(benchmark::State& state) {
  const auto g = shared_gauss_legendre_grid(111, 128);
  const auto t = shared_transform(g, 110, 64);
  std::vector<double> re(t->mode_count(), 0.01), im(t->mode_count(), 0.01), f(g->size());
  for (auto _ : state) {
    t->synthesis(re, im, f);
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_ShtSynthesisFullGrid)->Unit(benchmark::kMicrosecond);

void BM_SfnoForward(benchmark::State& state) {
  const auto params = init_params(bench_config(static_cast<std::size_t>(state.range(0))));
  const auto g = shared_gauss_legendre_grid(31, 32);
  const auto m = random_map(g, 2);
  std::vector<ChannelStack> x{to_channel_stack(m)};
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, x, false));
}
BENCHMARK(BM_SfnoForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SfnoForwardBackward(benchmark::State& state) {
  const auto params = init_params(bench_config(static_cast<std::size_t>(state.range(0))));
  const auto g = shared_gauss_legendre_grid(31, 32);
  std::vector<ChannelStack> x{to_channel_stack(random_map(g, 3))};
  std::vector<ChannelStack> dy{ChannelStack(5, g->size())};
  for (auto& v : dy[0].data) v = 1e-3;
  for (auto _ : state) {
    const auto fw = forward(params, x, true);
    benchmark::DoNotOptimize(backward(params, *fw.tape, dy));
  }
}
BENCHMARK(BM_SfnoForwardBackward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HuxForward(benchmark::State& state) {
  const auto g = shared_gauss_legendre_grid(111, 128);
  const auto m = random_map(g, 4);
  const auto rg = default_radial_grid();
  for (auto _ : state) benchmark::DoNotOptimize(hux_forward(m, rg, HuxConfig{}));
}
BENCHMARK(BM_HuxForward)->Unit(benchmark::kMillisecond);

void BM_EvaluateCube(benchmark::State& state) {
  const auto g = shared_gauss_legendre_grid(111, 128);
  const auto rg = build_radial_grid(static_cast<std::size_t>(state.range(0)), 30.0, kAstronomicalUnitRs);
  VelocityCube truth{rg, g, {}, {}}, pred{rg, g, {}, {}};
  for (std::size_t i = 0; i < rg.nr(); ++i) {
    truth.slices.push_back(random_map(g, 5 + 2 * i));
    pred.slices.push_back(random_map(g, 6 + 2 * i));
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_cube(pred, truth));
}
BENCHMARK(BM_EvaluateCube)->Arg(10)->Arg(140)->Unit(benchmark::kMillisecond);

void BM_Emd(benchmark::State& state) {
  const auto g = shared_gauss_legendre_grid(111, 128);
  const auto a = random_map(g, 7), b = random_map(g, 8);
  for (auto _ : state) benchmark::DoNotOptimize(emd(a.values, b.values));
}
BENCHMARK(BM_Emd)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
