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

#include "axemu/zoo.hpp"

#include <cmath>

namespace axemu {

std::string GraphBuilder::push(Node node, const char* prefix) {
  if (node.id.empty()) node.id = std::string(prefix) + std::to_string(counter_++);
  std::string id = node.id;
  nodes_.push_back(std::move(node));
  return id;
}

std::string GraphBuilder::input(std::int64_t h, std::int64_t w, std::int64_t c, std::string id) {
  Node node;
  node.id = std::move(id);
  node.kind = NodeKind::kInput;
  node.image_shape = {h, w, c};
  return push(std::move(node), "input");
}

std::string GraphBuilder::conv(const std::string& x, Tensor4 filters, std::vector<float> bias,
                               ConvGeometry geometry, std::string id) {
  Node node;
  node.id = std::move(id);
  node.kind = NodeKind::kConv2D;
  node.inputs = {x};
  node.filter_shape = filters.shape();
  node.filters = std::move(filters);
  node.bias = std::move(bias);
  node.geometry = geometry;
  return push(std::move(node), "conv");
}

namespace {

Node unary(NodeKind kind, const std::string& x, std::string id) {
  Node node;
  node.id = std::move(id);
  node.kind = kind;
  node.inputs = {x};
  return node;
}

}  // namespace

std::string GraphBuilder::relu(const std::string& x, std::string id) {
  return push(unary(NodeKind::kReLU, x, std::move(id)), "relu");
}

std::string GraphBuilder::max_pool(const std::string& x, std::int64_t window, std::int64_t stride,
                                   std::string id) {
  Node node = unary(NodeKind::kMaxPool, x, std::move(id));
  node.window = {window, window};
  node.pool_strides = {stride, stride};
  return push(std::move(node), "maxpool");
}

std::string GraphBuilder::global_avg_pool(const std::string& x, std::string id) {
  Node node = unary(NodeKind::kAvgPool, x, std::move(id));
  node.global = true;
  return push(std::move(node), "gap");
}

std::string GraphBuilder::add(const std::string& a, const std::string& b, std::string id) {
  Node node;
  node.id = std::move(id);
  node.kind = NodeKind::kAdd;
  node.inputs = {a, b};
  return push(std::move(node), "add");
}

std::string GraphBuilder::flatten(const std::string& x, std::string id) {
  return push(unary(NodeKind::kFlatten, x, std::move(id)), "flatten");
}

std::string GraphBuilder::dense(const std::string& x, Tensor4 weights, std::vector<float> bias,
                                std::string id) {
  Node node = unary(NodeKind::kDense, x, std::move(id));
  node.weights = std::move(weights);
  node.bias = std::move(bias);
  return push(std::move(node), "dense");
}

std::string GraphBuilder::softmax(const std::string& x, std::string id) {
  return push(unary(NodeKind::kSoftmax, x, std::move(id)), "softmax");
}

LayerGraph GraphBuilder::finish(const std::string& output) && {
  return LayerGraph(std::move(nodes_), output);
}

Tensor4 random_filters(std::int64_t kh, std::int64_t kw, std::int64_t cin, std::int64_t cout,
                       std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(kh * kw * cin)));
  Tensor4 f({kh, kw, cin, cout}, Layout::kHWCN);
  for (float& v : f.data()) v = dist(rng);
  return f;
}

namespace {

std::vector<float> small_bias(std::int64_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> dist(-0.05f, 0.05f);
  std::vector<float> b(static_cast<std::size_t>(n));
  for (float& v : b) v = dist(rng);
  return b;
}

std::string classifier(GraphBuilder& b, const std::string& x, std::int64_t width,
                       std::int64_t classes, std::mt19937_64& rng) {
  const auto pooled = b.global_avg_pool(x, "gap");
  const auto flat = b.flatten(pooled, "flatten");
  const auto logits = b.dense(flat, random_filters(1, 1, width, classes, rng),
                              small_bias(classes, rng), "logits");
  return b.softmax(logits, "probs");
}

}  // namespace

LayerGraph make_resnet8_style(std::int64_t width, std::uint64_t seed, std::int64_t classes) {
  std::mt19937_64 rng(seed);
  GraphBuilder b;
  const ConvGeometry same{{1, 1}, {1, 1}, Padding::same()};
  const ConvGeometry down{{2, 2}, {1, 1}, Padding::same()};

  auto x = b.input(32, 32, 3);
  x = b.relu(b.conv(x, random_filters(3, 3, 3, width, rng), small_bias(width, rng), same, "conv0"),
             "relu0");
  for (int stage = 1; stage <= 3; ++stage) {
    const std::string s = std::to_string(stage);
    const ConvGeometry& first = stage == 1 ? same : down;
    auto y = b.conv(x, random_filters(3, 3, width, width, rng), small_bias(width, rng), first,
                    "conv" + s + "a");
    y = b.relu(y, "relu" + s + "a");
    y = b.conv(y, random_filters(3, 3, width, width, rng), small_bias(width, rng), same,
               "conv" + s + "b");
    const auto shortcut = stage == 1 ? x : b.max_pool(x, 1, 2, "skip" + s);
    x = b.relu(b.add(y, shortcut, "add" + s), "relu" + s + "b");
  }
  const auto out = classifier(b, x, width, classes, rng);
  return std::move(b).finish(out);
}

LayerGraph make_conv_stack(int layers, std::int64_t width, std::uint64_t seed, std::int64_t classes) {
  std::mt19937_64 rng(seed);
  GraphBuilder b;
  const ConvGeometry same{{1, 1}, {1, 1}, Padding::same()};
  auto x = b.input(32, 32, 3);
  x = b.relu(b.conv(x, random_filters(1, 1, 3, width, rng), small_bias(width, rng), same, "stem"));
  for (int i = 0; i < layers; ++i)
    x = b.relu(b.conv(x, random_filters(3, 3, width, width, rng), small_bias(width, rng), same,
                      "conv" + std::to_string(i + 1)));
  const auto out = classifier(b, x, width, classes, rng);
  return std::move(b).finish(out);
}

LayerGraph make_single_conv(std::int64_t h, std::int64_t w, std::int64_t cin, std::int64_t cout,
                            std::int64_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GraphBuilder b;
  const auto x = b.input(h, w, cin);
  const auto y = b.conv(x, random_filters(k, k, cin, cout, rng), {},
                        ConvGeometry{{1, 1}, {1, 1}, Padding::same()}, "conv");
  return std::move(b).finish(y);
}

}  // namespace axemu
