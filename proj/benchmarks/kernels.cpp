/*
 * Copyright 2026 The PCSA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <benchmark/benchmark.h>

#include "pcsa/metrics/ssim.hpp"
#include "pcsa/net/generator.hpp"
#include "pcsa/tensor/ops.hpp"
#include "pcsa/tensor/rng.hpp"
#include "pcsa/tensor/tape.hpp"

namespace {

using namespace pcsa;

Volume<float> noise(const Shape& s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Volume<float> v(s);
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(rng.uniform(i, lo, hi));
  return v;
}

// Args: spatial edge, channels in = out.
void BM_Conv3dForward(benchmark::State& state) {
  const auto edge = static_cast<std::size_t>(state.range(0));
  const auto ch = static_cast<std::size_t>(state.range(1));
  const auto x = noise({1, ch, edge, edge, edge}, 1);
  const auto w = noise({ch, ch, 3, 3, 3}, 2);
  const auto b = noise({1, ch, 1, 1, 1}, 3);
  for (auto _ : state) {
    Tape<float> tape;
    auto y = ops::conv3d(tape.constant(x), tape.constant(w), tape.constant(b));
    benchmark::DoNotOptimize(y.value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(edge * edge * edge * ch * ch * 27));
}
BENCHMARK(BM_Conv3dForward)->Args({16, 8})->Args({16, 24})->Args({32, 8})->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
  const auto edge = static_cast<std::size_t>(state.range(0));
  const auto ch = static_cast<std::size_t>(state.range(1));
  const auto x = noise({1, ch, edge, edge, edge}, 1);
  const auto w = noise({ch, ch, 3, 3, 3}, 2);
  const auto b = noise({1, ch, 1, 1, 1}, 3);
  for (auto _ : state) {
    Tape<float> tape;
    auto y = ops::conv3d(tape.variable(x), tape.variable(w), tape.variable(b));
    tape.backward(ops::mean(y));
  }
}
BENCHMARK(BM_Conv3dBackward)->Args({16, 8})->Args({16, 24})->Unit(benchmark::kMillisecond);

// Default generator on one 16^3 or 32^3 volume.
void BM_GeneratorForward(benchmark::State& state) {
  const auto edge = static_cast<std::size_t>(state.range(0));
  const net::Generator<float> g(net::GeneratorConfig{}, 1);
  const auto x = noise({1, 1, edge, edge, edge}, 4, 0.0, 1.0);
  for (auto _ : state) {
    Tape<float> tape;
    auto y = g.forward(tape.constant(x), false);
    benchmark::DoNotOptimize(y.value().data().data());
  }
}
BENCHMARK(BM_GeneratorForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_GeneratorBackward(benchmark::State& state) {
  const auto edge = static_cast<std::size_t>(state.range(0));
  net::Generator<float> g(net::GeneratorConfig{}, 1);
  const auto x = noise({1, 1, edge, edge, edge}, 4, 0.0, 1.0);
  for (auto _ : state) {
    g.params().zero_grad();
    Tape<float> tape;
    tape.backward(ops::mean(g.forward(tape.constant(x), true)));
  }
}
BENCHMARK(BM_GeneratorBackward)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MsSsimLossAndGradient(benchmark::State& state) {
  const auto edge = static_cast<std::size_t>(state.range(0));
  const auto x = noise({1, 1, edge, edge, edge}, 5, 0.0, 1.0);
  const auto y = noise({1, 1, edge, edge, edge}, 6, 0.0, 1.0);
  const auto cfg = metrics::SSIMConfig::multi_scale();
  for (auto _ : state) {
    Tape<float> tape;
    tape.backward(metrics::ms_ssim(tape.variable(x), tape.constant(y), cfg));
  }
}
BENCHMARK(BM_MsSsimLossAndGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
