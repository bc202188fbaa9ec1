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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "axemu/error.hpp"
#include "axemu/graph.hpp"
#include "axemu/layers.hpp"
#include "axemu/zoo.hpp"
#include "support/oracles.hpp"

namespace axemu {
namespace {

std::shared_ptr<const MultLut> exact(Signedness mode = Signedness::kUnsigned) {
  return std::make_shared<const MultLut>(exact_lut(mode));
}

std::vector<std::string> ids(const LayerGraph& g) {
  std::vector<std::string> out;
  for (const auto& n : g.nodes()) out.push_back(n.id);
  return out;
}

double max_abs(std::span<const float> v) {
  double m = 0.0;
  for (float x : v) m = std::max(m, static_cast<double>(std::abs(x)));
  return m;
}

TEST(Transform, GraphWithoutConvolutionIsUnchanged) {
  GraphBuilder b;
  const auto x = b.input(4, 4, 2);
  const auto r = b.relu(x);
  const auto p = b.max_pool(r, 2, 2);
  const LayerGraph g = std::move(b).finish(p);
  const auto [t, report] = transform(g, exact());
  EXPECT_EQ(report.replaced_count, 0);
  EXPECT_EQ(report.inserted_min_max, 0);
  EXPECT_EQ(ids(t), ids(g));
  EXPECT_EQ(report.untouched_kinds, (std::vector<NodeKind>{NodeKind::kInput, NodeKind::kReLU, NodeKind::kMaxPool}));
}

TEST(Transform, SingleConvolution) {
  const LayerGraph g = make_single_conv(8, 8, 3, 4, 3, 1);
  const auto [t, report] = transform(g, exact());
  EXPECT_EQ(report.replaced_count, 1);
  EXPECT_EQ(report.inserted_min_max, 2);
  EXPECT_EQ(t.count(NodeKind::kConv2D), 0u);
  EXPECT_EQ(t.count(NodeKind::kAxConv2D), 1u);
  EXPECT_EQ(t.count(NodeKind::kMin), 1u);
  EXPECT_EQ(t.count(NodeKind::kMax), 1u);
  EXPECT_EQ(t.output(), g.output());
  const Node& ax = t.node(g.output());
  EXPECT_EQ(ax.kind, NodeKind::kAxConv2D);
  EXPECT_EQ(ax.filter_range, tensor_min_max(g.node(g.output()).filters));
  EXPECT_EQ(t.node(ax.inputs[1]).kind, NodeKind::kMin);
  EXPECT_EQ(t.node(ax.inputs[2]).kind, NodeKind::kMax);
}

TEST(Transform, ResNet8StyleReplacesSevenConvolutions) {
  const LayerGraph g = make_resnet8_style(8, 3);
  EXPECT_EQ(g.count(NodeKind::kConv2D), 7u);
  const auto [t, report] = transform(g, exact());
  EXPECT_EQ(report.replaced_count, 7);
  EXPECT_EQ(report.inserted_min_max, 14);
  EXPECT_EQ(report.inserted_min_max, 2 * report.replaced_count);
  EXPECT_EQ(t.nodes().size(), g.nodes().size() + 14);
  // Already-approximate graphs are left alone.
  const auto [again, second] = transform(t, exact());
  EXPECT_EQ(second.replaced_count, 0);
  EXPECT_EQ(ids(again), ids(t));
}

TEST(Transform, PreservesOutputShapes) {
  std::mt19937_64 rng(5);
  const LayerGraph g = make_resnet8_style(4, 9);
  const auto t = transform(g, exact()).first;
  const Tensor4 batch = testing::random_tensor({3, 32, 32, 3}, Layout::kNHWC, rng, 0.0f, 1.0f);
  RunOptions opts;
  opts.keep_activations = true;
  RunTrace ft, at;
  run(g, batch, opts, &ft);
  run(t, batch, opts, &at);
  for (const auto& [id, act] : ft.activations) {
    ASSERT_TRUE(at.activations.count(id)) << id;
    EXPECT_EQ(at.activations.at(id).shape(), act.shape()) << id;
  }
}

TEST(Transform, RejectsNonConstantFilters) {
  Node in;
  in.id = "x";
  in.image_shape = {4, 4, 1};
  Node w;
  w.id = "w";
  w.kind = NodeKind::kReLU;
  w.inputs = {"x"};
  Node conv;
  conv.id = "conv";
  conv.kind = NodeKind::kConv2D;
  conv.inputs = {"x", "w"};
  conv.filter_shape = {2, 2, 1, 4};
  const LayerGraph g({in, w, conv}, "conv");
  try {
    transform(g, exact());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGraph);
    EXPECT_NE(std::string(e.what()).find("conv"), std::string::npos);
  }
}

TEST(LayerGraph, ValidationErrors) {
  Node in;
  in.id = "x";
  in.image_shape = {2, 2, 1};
  Node relu;
  relu.id = "r";
  relu.kind = NodeKind::kReLU;
  relu.inputs = {"later"};
  EXPECT_THROW(LayerGraph({in, relu}, "r"), Error);
  EXPECT_THROW(LayerGraph({in, in}, "x"), Error);
  EXPECT_THROW(LayerGraph({in}, "nope"), Error);
  EXPECT_THROW(parse_node_kind("BatchNorm"), Error);
  EXPECT_EQ(parse_node_kind("AxConv2D"), NodeKind::kAxConv2D);
}

TEST(Run, InputOnlyGraphReturnsBatch) {
  GraphBuilder b;
  const auto x = b.input(3, 3, 2);
  const LayerGraph g = std::move(b).finish(x);
  std::mt19937_64 rng(1);
  const Tensor4 batch = testing::random_tensor({2, 3, 3, 2}, Layout::kNHWC, rng);
  EXPECT_EQ(run(g, batch), batch);
  EXPECT_THROW(run(g, testing::random_tensor({2, 3, 4, 2}, Layout::kNHWC, rng)), Error);
}

TEST(Run, TransformedSingleConvAgreesWithFloatGraph) {
  std::mt19937_64 rng(12);
  const LayerGraph g = make_single_conv(10, 10, 3, 6, 3, 4);
  const Tensor4 batch = testing::random_tensor({4, 10, 10, 3}, Layout::kNHWC, rng, 0.0f, 1.0f);
  const Tensor4 want = run(g, batch);
  for (Signedness mode : {Signedness::kUnsigned, Signedness::kSigned}) {
    const auto t = transform(g, exact(mode)).first;
    const Tensor4 got = run(t, batch);
    const double scale = max_abs(want.data());
    for (std::int64_t i = 0; i < got.size(); ++i)
      ASSERT_LE(std::abs(got.data()[i] - want.data()[i]), 1e-2 * scale);
    EXPECT_EQ(run(t, batch), got);
  }
}

TEST(Run, EnginesAndWorkerCountsAreBitIdentical) {
  std::mt19937_64 rng(13);
  const LayerGraph g = transform(make_resnet8_style(4, 2), exact(Signedness::kSigned)).first;
  const Tensor4 batch = testing::random_tensor({5, 32, 32, 3}, Layout::kNHWC, rng, 0.0f, 1.0f);
  const Tensor4 base = run(g, batch);
  RunOptions opts;
  opts.conv.workers = 3;
  opts.conv.chunk_size = 2;
  EXPECT_EQ(run(g, batch, opts), base);
  opts.engine = ConvEngine::kDirect;
  EXPECT_EQ(run(g, batch, opts), base);
}

// Each approximate layer, fed the float graph's own input activation, stays
// within sum over taps of (a1/2 |w| + a2/2 |x| + a1 a2 / 4) of the float layer.
TEST(Run, PerLayerErrorWithinPropagatedQuantizationBound) {
  std::mt19937_64 rng(17);
  const LayerGraph g = make_resnet8_style(8, 21);
  const Tensor4 batch = testing::random_tensor({4, 32, 32, 3}, Layout::kNHWC, rng, 0.0f, 1.0f);
  RunOptions opts;
  opts.keep_activations = true;
  RunTrace trace;
  run(g, batch, opts, &trace);
  const auto t = transform(g, exact()).first;
  int checked = 0;
  for (const Node& ax : t.nodes()) {
    if (ax.kind != NodeKind::kAxConv2D) continue;
    const Tensor4& x = trace.activations.at(ax.inputs[0]);
    const Tensor4& want = trace.activations.at(ax.id);
    const Range xr = tensor_min_max(x);
    const QuantParams p1 = compute_coeffs(xr, Signedness::kUnsigned);
    const QuantParams p2 = compute_coeffs(ax.filter_range, Signedness::kUnsigned);
    ConvConfig cfg;
    cfg.geometry = ax.geometry;
    Tensor4 got = axconv2d(x, ax.filters, xr, ax.filter_range, *ax.lut, cfg);
    layers::add_bias(got, ax.bias);
    const auto x_term = testing::reference_conv(
        x.shape(), ax.filters.shape(), ax.geometry,
        [&](auto n, auto h, auto w, auto c) { return p2.alpha / 2 * std::abs(x.at(n, h, w, c)); },
        [](auto...) { return 1.0; });
    const auto w_term = testing::reference_conv(
        x.shape(), ax.filters.shape(), ax.geometry, [](auto...) { return 1.0; },
        [&](auto h, auto w, auto c, auto o) {
          return p1.alpha / 2 * std::abs(ax.filters.at(h, w, c, o)) + p1.alpha * p2.alpha / 4;
        });
    const auto magnitude = testing::reference_conv(
        x.shape(), ax.filters.shape(), ax.geometry,
        [&](auto n, auto h, auto w, auto c) { return std::abs(static_cast<double>(x.at(n, h, w, c))); },
        [&](auto h, auto w, auto c, auto o) { return std::abs(static_cast<double>(ax.filters.at(h, w, c, o))); });
    ASSERT_EQ(got.shape(), want.shape());
    for (std::int64_t i = 0; i < got.size(); ++i) {
      const auto idx = got.unflatten(i);
      // Float32 accumulation in both paths gets a small relative allowance.
      const double limit = x_term.at(idx[0], idx[1], idx[2], idx[3]) +
                           w_term.at(idx[0], idx[1], idx[2], idx[3]) +
                           1e-5 * magnitude.at(idx[0], idx[1], idx[2], idx[3]) + 1e-6;
      ASSERT_LE(std::abs(static_cast<double>(got.data()[i]) - want.data()[i]), limit) << ax.id;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 7);
}

TEST(Run, TraceRecordsTimingAndMacs) {
  std::mt19937_64 rng(3);
  const LayerGraph g = make_single_conv(6, 6, 2, 3, 3, 2);
  const Tensor4 batch = testing::random_tensor({2, 6, 6, 2}, Layout::kNHWC, rng);
  RunOptions opts;
  opts.collect_timing = true;
  RunTrace ft;
  run(g, batch, opts, &ft);
  EXPECT_EQ(ft.float_mac_count, 2 * 6 * 6 * 3 * 18);
  RunTrace at;
  run(transform(g, exact()).first, batch, opts, &at);
  EXPECT_EQ(at.conv.mac_count, ft.float_mac_count);
  EXPECT_EQ(at.nodes.size(), 4u);
  EXPECT_TRUE(at.activations.empty());
}

TEST(Run, AxConvWithoutBoundTableFails) {
  const LayerGraph t = transform(make_single_conv(4, 4, 1, 1, 1, 0), exact()).first;
  std::vector<Node> nodes = t.nodes();
  for (auto& n : nodes) n.lut.reset();
  const LayerGraph unbound(nodes, t.output());
  std::mt19937_64 rng(1);
  EXPECT_THROW(run(unbound, testing::random_tensor({1, 4, 4, 1}, Layout::kNHWC, rng)), Error);
  const LayerGraph rebound = bind_lut(unbound, exact());
  EXPECT_NO_THROW(run(rebound, testing::random_tensor({1, 4, 4, 1}, Layout::kNHWC, rng)));
}

}  // namespace
}  // namespace axemu
