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

#ifndef AXEMU_ZOO_HPP_
#define AXEMU_ZOO_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "axemu/graph.hpp"

namespace axemu {

/// Appends nodes in order and returns their ids; finish() validates.
class GraphBuilder {
 public:
  std::string input(std::int64_t h, std::int64_t w, std::int64_t c, std::string id = "input");
  std::string conv(const std::string& x, Tensor4 filters, std::vector<float> bias,
                   ConvGeometry geometry, std::string id = {});
  std::string relu(const std::string& x, std::string id = {});
  std::string max_pool(const std::string& x, std::int64_t window, std::int64_t stride,
                       std::string id = {});
  std::string global_avg_pool(const std::string& x, std::string id = {});
  std::string add(const std::string& a, const std::string& b, std::string id = {});
  std::string flatten(const std::string& x, std::string id = {});
  std::string dense(const std::string& x, Tensor4 weights, std::vector<float> bias,
                    std::string id = {});
  std::string softmax(const std::string& x, std::string id = {});

  LayerGraph finish(const std::string& output) &&;

 private:
  std::string push(Node node, const char* prefix);
  std::vector<Node> nodes_;
  int counter_ = 0;
};

/// He-normal HWCN filters drawn from `rng`.
Tensor4 random_filters(std::int64_t kh, std::int64_t kw, std::int64_t cin, std::int64_t cout,
                       std::mt19937_64& rng);

/// ResNet-8-style CIFAR net: 3x3 stem, three single-block stages (the last two
/// downsample by 2), global average pool, dense classifier. Seven convolutions;
/// shortcuts are identity or stride-2 subsampling so the width stays constant.
LayerGraph make_resnet8_style(std::int64_t width, std::uint64_t seed, std::int64_t classes = 10);

/// 1x1 stem followed by `layers` identical 3x3 width->width convolutions at
/// full resolution, then a classifier. Conv MACs grow linearly with `layers`.
LayerGraph make_conv_stack(int layers, std::int64_t width, std::uint64_t seed,
                           std::int64_t classes = 10);

/// Input -> Conv2D (-> output), the smallest graph the transform applies to.
LayerGraph make_single_conv(std::int64_t h, std::int64_t w, std::int64_t cin, std::int64_t cout,
                            std::int64_t k, std::uint64_t seed);

}  // namespace axemu

#endif  // AXEMU_ZOO_HPP_
