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

#include "axemu/graph.hpp"

#include <algorithm>
#include <set>

#include "axemu/error.hpp"
#include "axemu/layers.hpp"
#include "axemu/stopwatch.hpp"

namespace axemu {

namespace {

constexpr std::pair<NodeKind, std::string_view> kKindNames[] = {
    {NodeKind::kInput, "Input"},     {NodeKind::kConv2D, "Conv2D"},
    {NodeKind::kAxConv2D, "AxConv2D"}, {NodeKind::kMin, "Min"},
    {NodeKind::kMax, "Max"},         {NodeKind::kReLU, "ReLU"},
    {NodeKind::kMaxPool, "MaxPool"}, {NodeKind::kAvgPool, "AvgPool"},
    {NodeKind::kAdd, "Add"},         {NodeKind::kDense, "Dense"},
    {NodeKind::kFlatten, "Flatten"}, {NodeKind::kSoftmax, "Softmax"},
};

[[noreturn]] void graph_error(const std::string& message) { fail(ErrorCode::kGraph, message); }

void expect_arity(const Node& node, std::size_t arity) {
  if (node.inputs.size() != arity)
    graph_error(std::string(node_kind_name(node.kind)) + " node '" + node.id + "' needs " +
                std::to_string(arity) + " input(s), has " + std::to_string(node.inputs.size()));
}

}  // namespace

std::string_view node_kind_name(NodeKind kind) noexcept {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

NodeKind parse_node_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  graph_error("unsupported node kind '" + std::string(name) + "'");
}

LayerGraph::LayerGraph(std::vector<Node> nodes, std::string output)
    : nodes_(std::move(nodes)), output_(std::move(output)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) graph_error("duplicate node id '" + nodes_[i].id + "'");
  }
  validate();
}

bool LayerGraph::contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

std::size_t LayerGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) graph_error("unknown node '" + std::string(id) + "'");
  return it->second;
}

const Node& LayerGraph::node(std::string_view id) const { return nodes_[index_of(id)]; }

std::size_t LayerGraph::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [kind](const Node& n) { return n.kind == kind; }));
}

void LayerGraph::validate() const {
  if (nodes_.empty()) graph_error("graph has no nodes");
  if (count(NodeKind::kInput) != 1) graph_error("graph must have exactly one Input node");
  if (!contains(output_)) graph_error("output node '" + output_ + "' does not exist");

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    for (const auto& input : node.inputs) {
      if (!contains(input)) graph_error("node '" + node.id + "' reads unknown node '" + input + "'");
      if (index_of(input) >= i)
        graph_error("node '" + node.id + "' reads '" + input + "' before it is defined");
    }
    switch (node.kind) {
      case NodeKind::kInput:
        expect_arity(node, 0);
        for (auto e : node.image_shape)
          if (e < 1) graph_error("Input '" + node.id + "' needs positive extents");
        break;
      case NodeKind::kConv2D:
        if (node.inputs.size() != 1 && node.inputs.size() != 2)
          graph_error("Conv2D '" + node.id + "' needs a data input and optionally a filter input");
        node.geometry.validate();
        if (node.inputs.size() == 1) {
          if (node.filters.empty() || node.filters.layout() != Layout::kHWCN)
            graph_error("Conv2D '" + node.id + "' has no HWCN filter constant");
        } else {
          for (auto e : node.filter_shape)
            if (e < 1) graph_error("Conv2D '" + node.id + "' needs a positive filter_shape");
        }
        break;
      case NodeKind::kAxConv2D: {
        expect_arity(node, 3);
        node.geometry.validate();
        if (node.filters.empty() || node.filters.layout() != Layout::kHWCN)
          graph_error("AxConv2D '" + node.id + "' has no HWCN filter constant");
        if (nodes_[index_of(node.inputs[1])].kind != NodeKind::kMin ||
            nodes_[index_of(node.inputs[2])].kind != NodeKind::kMax)
          graph_error("AxConv2D '" + node.id + "' range inputs must be Min then Max nodes");
        node.filter_range.validate();
        if (!node.lut && node.lut_name.empty())
          graph_error("AxConv2D '" + node.id + "' has no multiplier reference");
        break;
      }
      case NodeKind::kAdd:
        expect_arity(node, 2);
        break;
      case NodeKind::kMaxPool:
      case NodeKind::kAvgPool:
        expect_arity(node, 1);
        if (!node.global && (node.window[0] < 1 || node.window[1] < 1 || node.pool_strides[0] < 1 ||
                             node.pool_strides[1] < 1))
          graph_error("pool '" + node.id + "' needs positive window and strides");
        break;
      case NodeKind::kDense:
        expect_arity(node, 1);
        if (node.weights.empty() || node.weights.dim(0) != 1 || node.weights.dim(1) != 1)
          graph_error("Dense '" + node.id + "' needs (1,1,in,out) weights");
        if (!node.bias.empty() && static_cast<std::int64_t>(node.bias.size()) != node.weights.dim(3))
          graph_error("Dense '" + node.id + "' bias length differs from output width");
        break;
      default:
        expect_arity(node, 1);
        break;
    }
    if ((node.kind == NodeKind::kConv2D || node.kind == NodeKind::kAxConv2D) && !node.bias.empty()) {
      const std::int64_t out_c = node.filters.empty() ? node.filter_shape[3] : node.filters.dim(3);
      if (static_cast<std::int64_t>(node.bias.size()) != out_c)
        graph_error("conv '" + node.id + "' bias length differs from filter count");
    }
  }
}

std::pair<LayerGraph, TransformReport> transform(const LayerGraph& g,
                                                 std::shared_ptr<const MultLut> lut,
                                                 const TransformOptions& options) {
  if (!lut) fail(ErrorCode::kInvalidArgument, "transform needs a multiplier table");
  TransformReport report;
  std::set<NodeKind> untouched;
  std::set<std::string> taken;
  for (const auto& node : g.nodes()) taken.insert(node.id);
  auto fresh_id = [&taken](const std::string& base) {
    std::string id = base;
    for (int i = 1; taken.count(id); ++i) id = base + "_" + std::to_string(i);
    taken.insert(id);
    return id;
  };

  std::vector<Node> nodes;
  nodes.reserve(g.nodes().size() + 2 * g.count(NodeKind::kConv2D));
  for (const auto& node : g.nodes()) {
    if (node.kind != NodeKind::kConv2D) {
      untouched.insert(node.kind);
      nodes.push_back(node);
      continue;
    }
    if (!node.has_constant_filters())
      graph_error("Conv2D '" + node.id + "' has non-constant filters and cannot be approximated");

    Node lo;
    lo.id = fresh_id(node.id + "/min");
    lo.kind = NodeKind::kMin;
    lo.inputs = {node.inputs[0]};
    Node hi;
    hi.id = fresh_id(node.id + "/max");
    hi.kind = NodeKind::kMax;
    hi.inputs = {node.inputs[0]};

    Node ax = node;
    ax.kind = NodeKind::kAxConv2D;
    ax.inputs = {node.inputs[0], lo.id, hi.id};
    ax.filter_range = tensor_min_max(node.filters);
    ax.round = options.round;
    ax.lut = lut;
    ax.lut_name = options.lut_name;

    nodes.push_back(std::move(lo));
    nodes.push_back(std::move(hi));
    nodes.push_back(std::move(ax));
    ++report.replaced_count;
    report.inserted_min_max += 2;
  }
  report.untouched_kinds.assign(untouched.begin(), untouched.end());
  return {LayerGraph(std::move(nodes), g.output()), std::move(report)};
}

LayerGraph bind_lut(const LayerGraph& g, std::shared_ptr<const MultLut> lut) {
  if (!lut) fail(ErrorCode::kInvalidArgument, "bind_lut needs a multiplier table");
  std::vector<Node> nodes = g.nodes();
  for (auto& node : nodes)
    if (node.kind == NodeKind::kAxConv2D) node.lut = lut;
  return LayerGraph(std::move(nodes), g.output());
}

namespace {

double scalar_of(const Tensor4& t, const Node& consumer) {
  if (t.size() != 1) graph_error("range input of '" + consumer.id + "' is not a scalar");
  return t.data()[0];
}

}  // namespace

Tensor4 run(const LayerGraph& g, const Tensor4& batch, const RunOptions& options, RunTrace* trace) {
  const auto& nodes = g.nodes();
  const std::size_t out_index = g.index_of(g.output());

  // Release intermediates after their last consumer unless the caller wants them.
  std::vector<std::size_t> last_use(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& input : nodes[i].inputs) last_use[g.index_of(input)] = i;
  last_use[out_index] = nodes.size();

  std::vector<std::optional<Tensor4>> values(nodes.size());
  auto value = [&](const Node& node, std::size_t slot) -> const Tensor4& {
    const auto& v = values[g.index_of(node.inputs[slot])];
    if (!v) graph_error("value of '" + node.inputs[slot] + "' was released");
    return *v;
  };

  const bool timing = options.collect_timing && trace;
  ConvStats local_stats;
  ConvStats* stats = trace ? &trace->conv : &local_stats;
  stats->collect_timing = timing;

  for (std::size_t i = 0; i <= out_index; ++i) {
    const Node& node = nodes[i];
    Stopwatch watch;
    Tensor4 result;
    switch (node.kind) {
      case NodeKind::kInput:
        if (batch.layout() != Layout::kNHWC || batch.dim(1) != node.image_shape[0] ||
            batch.dim(2) != node.image_shape[1] || batch.dim(3) != node.image_shape[2])
          fail(ErrorCode::kShapeMismatch, "batch " + shape_to_string(batch.shape()) +
                                              " does not match Input '" + node.id + "'");
        result = batch;
        break;
      case NodeKind::kConv2D: {
        const Tensor4& x = value(node, 0);
        if (node.has_constant_filters()) {
          result = layers::conv2d(x, node.filters, node.bias, node.geometry, options.workers);
          if (trace)
            trace->float_mac_count +=
                element_count(result.shape()) * node.filters.dim(0) * node.filters.dim(1) * node.filters.dim(2);
        } else {
          const Tensor4& dynamic = value(node, 1);
          Tensor4 filters(node.filter_shape, Layout::kHWCN,
                          std::vector<float>(dynamic.data().begin(), dynamic.data().end()));
          result = layers::conv2d(x, filters, node.bias, node.geometry, options.workers);
        }
        break;
      }
      case NodeKind::kAxConv2D: {
        if (!node.lut) graph_error("AxConv2D '" + node.id + "' has no bound multiplier table");
        const Tensor4& x = value(node, 0);
        const Range in_range{scalar_of(value(node, 1), node), scalar_of(value(node, 2), node)};
        ConvConfig cfg = options.conv;
        cfg.geometry = node.geometry;
        cfg.round = node.round;
        result = approx_conv2d(options.engine, x, node.filters, in_range, node.filter_range,
                               *node.lut, cfg, stats);
        layers::add_bias(result, node.bias);
        break;
      }
      case NodeKind::kMin:
      case NodeKind::kMax: {
        Stopwatch minmax;
        const Range r = tensor_min_max(value(node, 0));
        const double v = node.kind == NodeKind::kMin ? r.min : r.max;
        result = Tensor4({1, 1, 1, 1}, Layout::kNHWC, {static_cast<float>(v)});
        if (timing) trace->minmax_seconds += minmax.seconds();
        break;
      }
      case NodeKind::kReLU:
        result = layers::relu(value(node, 0));
        break;
      case NodeKind::kMaxPool:
        result = node.global ? layers::max_pool(value(node, 0), {value(node, 0).dim(1), value(node, 0).dim(2)}, {1, 1})
                             : layers::max_pool(value(node, 0), node.window, node.pool_strides);
        break;
      case NodeKind::kAvgPool:
        result = node.global ? layers::global_avg_pool(value(node, 0))
                             : layers::avg_pool(value(node, 0), node.window, node.pool_strides);
        break;
      case NodeKind::kAdd:
        result = layers::add(value(node, 0), value(node, 1));
        break;
      case NodeKind::kDense:
        result = layers::dense(value(node, 0), node.weights, node.bias);
        break;
      case NodeKind::kFlatten:
        result = layers::flatten(value(node, 0));
        break;
      case NodeKind::kSoftmax:
        result = layers::softmax(value(node, 0));
        break;
    }
    if (timing) trace->nodes.push_back({node.id, node.kind, watch.seconds()});
    if (trace && options.keep_activations) trace->activations[node.id] = result;
    values[i] = std::move(result);
    for (const auto& input : node.inputs) {
      const std::size_t j = g.index_of(input);
      if (last_use[j] == i) values[j].reset();
    }
  }
  return std::move(*values[out_index]);
}

}  // namespace axemu
