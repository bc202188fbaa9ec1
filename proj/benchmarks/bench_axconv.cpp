/* Copyright 2026 The axemu Authors. All Rights Reserved.

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

#include "axemu/axconv.hpp"
#include "axemu/axmult.hpp"
#include "axemu/quantizer.hpp"

namespace {

axemu::Tensor4 random_tensor(axemu::Shape4 shape, axemu::Layout layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  axemu::Tensor4 t(shape, layout);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

struct ConvCase {
  axemu::Tensor4 input;
  axemu::Tensor4 filters;
  axemu::Range in_range;
  axemu::Range f_range;
  axemu::ConvConfig cfg;
};

ConvCase make_case(std::int64_t batch, std::int64_t channels) {
  ConvCase c{random_tensor({batch, 32, 32, channels}, axemu::Layout::kNHWC, 1),
             random_tensor({3, 3, channels, channels}, axemu::Layout::kHWCN, 2),
             {},
             {},
             {}};
  c.in_range = axemu::tensor_min_max(c.input);
  c.f_range = axemu::tensor_min_max(c.filters);
  c.cfg.geometry.padding = axemu::Padding::same();
  return c;
}

void BM_AxConv2D(benchmark::State& state) {
  const auto c = make_case(state.range(0), state.range(1));
  const auto lut = axemu::exact_lut(axemu::Signedness::kUnsigned);
  axemu::ConvStats stats;
  for (auto _ : state) {
    benchmark::DoNotOptimize(axemu::axconv2d(c.input, c.filters, c.in_range, c.f_range, lut, c.cfg, &stats));
  }
  const double macs = static_cast<double>(stats.mac_count) / static_cast<double>(state.iterations());
  state.counters["MAC/s"] = benchmark::Counter(macs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_AxConv2D)->Args({8, 8})->Args({8, 16})->Args({32, 16})->Unit(benchmark::kMillisecond);

void BM_DirectConv(benchmark::State& state) {
  const auto c = make_case(state.range(0), state.range(1));
  const auto lut = axemu::exact_lut(axemu::Signedness::kUnsigned);
  axemu::ConvStats stats;
  for (auto _ : state) {
    benchmark::DoNotOptimize(axemu::direct_conv(c.input, c.filters, c.in_range, c.f_range, lut, c.cfg, &stats));
  }
  const double macs = static_cast<double>(stats.mac_count) / static_cast<double>(state.iterations());
  state.counters["MAC/s"] = benchmark::Counter(macs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_DirectConv)->Args({1, 8})->Args({1, 16})->Unit(benchmark::kMillisecond);

void BM_Im2Cols(benchmark::State& state) {
  const auto c = make_case(state.range(0), 16);
  const auto p1 = axemu::compute_coeffs(c.in_range, axemu::Signedness::kUnsigned);
  for (auto _ : state) {
    benchmark::DoNotOptimize(axemu::im2cols(c.input, p1, c.filters.shape(), c.cfg.geometry));
  }
}
BENCHMARK(BM_Im2Cols)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Quantize(benchmark::State& state) {
  const auto t = random_tensor({state.range(0), 32, 32, 16}, axemu::Layout::kNHWC, 3);
  const auto p = axemu::compute_coeffs(axemu::tensor_min_max(t), axemu::Signedness::kSigned);
  for (auto _ : state) benchmark::DoNotOptimize(axemu::quantize(t, p));
  state.SetItemsProcessed(state.iterations() * t.size());
}
BENCHMARK(BM_Quantize)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
