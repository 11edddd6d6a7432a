/* Copyright 2026 The CAPad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "capad/bench.hpp"
#include "capad/conv.hpp"
#include "capad/net.hpp"
#include "capad/padding.hpp"
#include "capad/train.hpp"
#include "capad/warp.hpp"

namespace capad {
namespace {

Tensor RandomImage(int c, int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t(c, h, w);
  for (double& v : t.values()) v = u(rng);
  return t;
}

DisplacementField RandomField(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  DisplacementField f(h, w);
  for (double& v : f.dx.values()) v = u(rng);
  for (double& v : f.dy.values()) v = u(rng);
  return f;
}

void BM_Conv2d(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Tensor x = RandomImage(16, size, size, 1);
  const ConvKernel k = RandomKernel(16, 16, 3, 2);
  const std::vector<double> bias(16, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(Conv2d(x, k, bias, 1, 1));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_Conv2d)->Arg(32)->Arg(64)->Arg(128);

void BM_PartialConv2d(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Tensor x = PadIndexMapped(RandomImage(3, size, size, 3), PadMethod::kZero, 1);
  const Mask mask = MakeBorderMask(size + 2, size + 2, 1, SideSet::All());
  const ConvKernel k = RandomKernel(8, 3, 3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(PartialConv2d(x, mask, k, {}, 1));
}
BENCHMARK(BM_PartialConv2d)->Arg(64)->Arg(256);

void BM_WarpForward(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  const Tensor block = RandomImage(3, len, 23, 5);
  const DisplacementField f = RandomField(len, 23, 6);
  for (auto _ : state) benchmark::DoNotOptimize(WarpForward(block, f));
  state.SetItemsProcessed(state.iterations() * len * 23);
}
BENCHMARK(BM_WarpForward)->Arg(64)->Arg(512);

void BM_WarpBackward(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  const Tensor block = RandomImage(3, len, 23, 7);
  const Tensor grad = RandomImage(3, len, 23, 8);
  const DisplacementField f = RandomField(len, 23, 9);
  for (auto _ : state) benchmark::DoNotOptimize(WarpBackward(grad, block, f));
  state.SetItemsProcessed(state.iterations() * len * 23);
}
BENCHMARK(BM_WarpBackward)->Arg(64)->Arg(512);

void BM_NetForwardBackward(benchmark::State& state) {
  NetConfig cfg;
  const Network net = NetInit(cfg);
  std::vector<Tensor> batch;
  for (int i = 0; i < 8; ++i) batch.push_back(RandomImage(3, 64, 23, 10 + i));
  const std::vector<DisplacementField> grads(8, RandomField(64, 23, 20));
  for (auto _ : state) {
    const NetOutput out = NetForward(net, batch, true, PlacementFor(Side::kLeft));
    benchmark::DoNotOptimize(NetBackward(net, out.cache, grads));
  }
}
BENCHMARK(BM_NetForwardBackward)->Unit(benchmark::kMillisecond);

void BM_PadClassic(benchmark::State& state) {
  const auto method = static_cast<PadMethod>(state.range(0));
  const Tensor x = RandomImage(3, 256, 256, 30);
  for (auto _ : state) benchmark::DoNotOptimize(PadClassic(x, method, 3));
  state.SetLabel(std::string(MethodName(method)));
}
BENCHMARK(BM_PadClassic)
    ->Arg(static_cast<int>(PadMethod::kZero))
    ->Arg(static_cast<int>(PadMethod::kReflect))
    ->Arg(static_cast<int>(PadMethod::kBilinear))
    ->Arg(static_cast<int>(PadMethod::kDistribution));

void BM_CaPad(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  PadModel model;
  model.two_model_mode = true;
  model.nets[Side::kLeft] = NetInit(model.config);
  model.nets[Side::kTop] = NetInit(model.config);
  const Tensor x = RandomImage(3, size, size, 40);
  for (auto _ : state) benchmark::DoNotOptimize(CaPad(x, model, 3));
}
BENCHMARK(BM_CaPad)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace capad

BENCHMARK_MAIN();
