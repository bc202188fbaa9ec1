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

#ifndef AXEMU_GRAPH_HPP_
#define AXEMU_GRAPH_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "axemu/axconv.hpp"
#include "axemu/axmult.hpp"
#include "axemu/tensor.hpp"

namespace axemu {

enum class NodeKind : std::uint8_t {
  kInput,
  kConv2D,
  kAxConv2D,
  kMin,
  kMax,
  kReLU,
  kMaxPool,
  kAvgPool,
  kAdd,
  kDense,
  kFlatten,
  kSoftmax,
};

std::string_view node_kind_name(NodeKind kind) noexcept;
/// Throws kGraph for anything outside the supported node set.
NodeKind parse_node_kind(std::string_view name);

/// A graph node. Only the attributes relevant to `kind` are populated.
struct Node {
  std::string id;
  NodeKind kind = NodeKind::kInput;
  std::vector<std::string> inputs;

  // Input: per-image extents (h, w, c); the batch extent is free.
  std::array<std::int64_t, 3> image_shape{0, 0, 0};

  // Conv2D / AxConv2D. `filters` is HWCN; a Conv2D with a second input takes
  // its filters from that node instead and only records `filter_shape`.
  ConvGeometry geometry;
  Tensor4 filters;
  Shape4 filter_shape{0, 0, 0, 0};
  std::vector<float> bias;

  // AxConv2D: folded filter range, multiplier and rounding.
  Range filter_range;
  RoundMode round = RoundMode::kHalfAwayFromZero;
  std::string lut_name;
  std::shared_ptr<const MultLut> lut;

  // MaxPool / AvgPool.
  std::array<std::int64_t, 2> window{1, 1};
  std::array<std::int64_t, 2> pool_strides{1, 1};
  bool global = false;

  // Dense: HWCN (1, 1, in, out).
  Tensor4 weights;

  bool has_constant_filters() const noexcept { return inputs.size() == 1 && !filters.empty(); }
};

/// Directed acyclic graph stored in topological order.
class LayerGraph {
 public:
  LayerGraph() = default;
  LayerGraph(std::vector<Node> nodes, std::string output);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::string& output() const noexcept { return output_; }
  const Node& node(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
  std::size_t count(NodeKind kind) const;

  /// Checks id uniqueness, topological order, per-kind arity and attributes.
  void validate() const;

 private:
  std::vector<Node> nodes_;
  std::string output_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct TransformOptions {
  RoundMode round = RoundMode::kHalfAwayFromZero;
  std::string lut_name = "lut";
};

struct TransformReport {
  std::int64_t replaced_count = 0;
  std::int64_t inserted_min_max = 0;
  /// Distinct kinds of the nodes left as they were, in enum order.
  std::vector<NodeKind> untouched_kinds;
};

/// Replaces every Conv2D by an AxConv2D fed by Min and Max nodes over its data
/// input. Filter ranges are folded to constants. Other nodes are copied as-is.
std::pair<LayerGraph, TransformReport> transform(const LayerGraph& g,
                                                 std::shared_ptr<const MultLut> lut,
                                                 const TransformOptions& options = {});

/// Rebinds the multiplier of every AxConv2D (e.g. after loading a model file).
LayerGraph bind_lut(const LayerGraph& g, std::shared_ptr<const MultLut> lut);

struct RunOptions {
  ConvEngine engine = ConvEngine::kGemm;
  /// Geometry and rounding come from each node; the rest applies to every AxConv2D.
  ConvConfig conv;
  /// Workers used by accurate float convolutions.
  int workers = 1;
  bool collect_timing = false;
  bool keep_activations = false;
};

struct NodeTiming {
  std::string id;
  NodeKind kind = NodeKind::kInput;
  double seconds = 0.0;
};

struct RunTrace {
  std::vector<NodeTiming> nodes;
  ConvStats conv;
  double minmax_seconds = 0.0;
  /// MACs of accurate Conv2D nodes (AxConv2D MACs live in conv.mac_count).
  std::int64_t float_mac_count = 0;
  std::map<std::string, Tensor4> activations;
};

/// Evaluates the graph in topological order. Min/Max reduce over the whole batch.
Tensor4 run(const LayerGraph& g, const Tensor4& batch, const RunOptions& options = {},
            RunTrace* trace = nullptr);

}  // namespace axemu

#endif  // AXEMU_GRAPH_HPP_
