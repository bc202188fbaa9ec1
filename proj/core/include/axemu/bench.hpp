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

#ifndef AXEMU_BENCH_HPP_
#define AXEMU_BENCH_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "axemu/axconv.hpp"
#include "axemu/formats.hpp"
#include "axemu/graph.hpp"

namespace axemu {

struct BenchOptions {
  ConvEngine engine = ConvEngine::kGemm;
  int workers = 1;
  std::int64_t chunk_size = 64;
  Accumulator accumulator = Accumulator::kExact64;
  RoundMode round = RoundMode::kHalfAwayFromZero;
  /// Images per inference batch; ranges are recomputed per batch.
  std::int64_t batch_size = 100;
  /// Scoped phase timers around quantization, LUT GEMM and min/max.
  bool collect_timing = true;
  bool keep_outputs = true;
};

struct BenchResult {
  RunReport report;
  std::optional<TransformReport> transform;
  /// Graph outputs for every image, concatenated along the batch axis.
  Tensor4 outputs;
};

/// Runs inference over `images` in batches of options.batch_size.
///
/// With a table, Conv2D nodes are transformed to AxConv2D first (or the table
/// is bound to an already transformed graph); without one the graph runs as-is.
/// t_init covers `preload_seconds` (artifact loading done by the caller), the
/// transform, and one untimed warmup batch. t_comp covers all batches.
BenchResult bench(const LayerGraph& model, const Tensor4& images,
                  std::shared_ptr<const MultLut> lut, const BenchOptions& options,
                  double preload_seconds = 0.0);

/// Ratio of baseline total time to candidate total time.
double speedup(const RunReport& baseline, const RunReport& candidate);

}  // namespace axemu

#endif  // AXEMU_BENCH_HPP_
