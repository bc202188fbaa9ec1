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

#include "axemu/bench.hpp"

#include <algorithm>
#include <map>

#include "axemu/error.hpp"
#include "axemu/stopwatch.hpp"

namespace axemu {

namespace {

void check_batch_shape(const LayerGraph& g, const Tensor4& images) {
  for (const auto& node : g.nodes()) {
    if (node.kind != NodeKind::kInput) continue;
    if (images.layout() != Layout::kNHWC || images.dim(1) != node.image_shape[0] ||
        images.dim(2) != node.image_shape[1] || images.dim(3) != node.image_shape[2])
      fail(ErrorCode::kShapeMismatch,
           "dataset " + shape_to_string(images.shape()) + " does not match model input (" +
               std::to_string(node.image_shape[0]) + "," + std::to_string(node.image_shape[1]) + "," +
               std::to_string(node.image_shape[2]) + ")");
  }
  if (images.dim(0) < 1) fail(ErrorCode::kInvalidArgument, "dataset is empty");
}

}  // namespace

BenchResult bench(const LayerGraph& model, const Tensor4& images,
                  std::shared_ptr<const MultLut> lut, const BenchOptions& options,
                  double preload_seconds) {
  if (options.batch_size < 1) fail(ErrorCode::kInvalidArgument, "batch size must be at least 1");
  check_batch_shape(model, images);

  BenchResult result;
  Stopwatch init_watch;
  LayerGraph graph = model;
  if (lut) {
    if (graph.count(NodeKind::kConv2D) > 0) {
      TransformOptions topts;
      topts.round = options.round;
      auto [transformed, report] = transform(graph, lut, topts);
      graph = std::move(transformed);
      result.transform = std::move(report);
    } else {
      graph = bind_lut(graph, lut);
    }
  } else if (graph.count(NodeKind::kAxConv2D) > 0) {
    fail(ErrorCode::kInvalidArgument, "model contains AxConv2D nodes but no multiplier table was given");
  }

  RunOptions run_options;
  run_options.engine = options.engine;
  run_options.workers = options.workers;
  run_options.conv.workers = options.workers;
  run_options.conv.chunk_size = options.chunk_size;
  run_options.conv.accumulator = options.accumulator;
  run_options.collect_timing = options.collect_timing;
  run_options.conv.validate();

  const std::int64_t n = images.dim(0);
  const std::int64_t batch = std::min(options.batch_size, n);
  const std::int64_t batches = (n + batch - 1) / batch;

  // Warmup on the first batch; its completion ends t_init.
  run(graph, images.slice_batch(0, batch), run_options);
  const double t_init = preload_seconds + init_watch.seconds();

  std::vector<Tensor4> outputs;
  RunTrace total;
  std::map<std::string, std::size_t> layer_slot;
  RunReport& report = result.report;
  Stopwatch comp_watch;
  for (std::int64_t b = 0; b < batches; ++b) {
    const std::int64_t first = b * batch;
    RunTrace trace;
    Tensor4 out = run(graph, images.slice_batch(first, std::min(batch, n - first)), run_options, &trace);
    if (options.keep_outputs) outputs.push_back(std::move(out));
    total.conv += trace.conv;
    total.minmax_seconds += trace.minmax_seconds;
    total.float_mac_count += trace.float_mac_count;
    for (const auto& t : trace.nodes) {
      auto [it, inserted] = layer_slot.emplace(t.id, report.per_layer.size());
      if (inserted) report.per_layer.push_back({t.id, std::string(node_kind_name(t.kind)), 0.0});
      report.per_layer[it->second].seconds += t.seconds;
    }
  }
  const double t_comp = comp_watch.seconds();

  report.engine = lut ? std::string(engine_name(options.engine)) : "accurate";
  report.images = n;
  report.batches = batches;
  report.workers = options.workers;
  report.t_init = t_init;
  report.t_comp = t_comp;
  report.mac_count = total.conv.mac_count + total.float_mac_count;

  const double lut_s = total.conv.lut_seconds;
  const double quant_s =
      total.conv.quantize_seconds + total.conv.dequantize_seconds + total.minmax_seconds;
  const double other_s = std::max(t_comp - lut_s - quant_s, 0.0);
  const double all = t_init + lut_s + quant_s + other_s;
  auto phase = [all](double s) { return PhaseTime{s, all > 0.0 ? 100.0 * s / all : 0.0}; };
  report.phase_breakdown[std::string(kPhaseLutLookup)] = phase(lut_s);
  report.phase_breakdown[std::string(kPhaseQuantDequantMinMax)] = phase(quant_s);
  report.phase_breakdown[std::string(kPhaseInit)] = phase(t_init);
  report.phase_breakdown[std::string(kPhaseOther)] = phase(other_s);

  if (options.keep_outputs) result.outputs = concat_batch(outputs);
  return result;
}

double speedup(const RunReport& baseline, const RunReport& candidate) {
  if (candidate.total() <= 0.0) fail(ErrorCode::kInvalidArgument, "candidate report has zero total time");
  return baseline.total() / candidate.total();
}

}  // namespace axemu
