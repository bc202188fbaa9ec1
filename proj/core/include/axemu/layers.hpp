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

#ifndef AXEMU_LAYERS_HPP_
#define AXEMU_LAYERS_HPP_

#include <array>
#include <cstdint>
#include <span>

#include "axemu/tensor.hpp"

// Accurate float32 kernels used by the non-approximated graph nodes.
namespace axemu::layers {

/// im2col + float GEMM convolution; `bias` may be empty.
Tensor4 conv2d(const Tensor4& input, const Tensor4& filters, std::span<const float> bias,
               const ConvGeometry& geometry, int workers = 1);

void add_bias(Tensor4& t, std::span<const float> bias);

Tensor4 relu(const Tensor4& x);
Tensor4 max_pool(const Tensor4& x, std::array<std::int64_t, 2> window,
                 std::array<std::int64_t, 2> strides);
Tensor4 avg_pool(const Tensor4& x, std::array<std::int64_t, 2> window,
                 std::array<std::int64_t, 2> strides);
Tensor4 global_avg_pool(const Tensor4& x);
Tensor4 add(const Tensor4& a, const Tensor4& b);
/// (n, h, w, c) -> (n, 1, 1, h*w*c)
Tensor4 flatten(const Tensor4& x);
/// x is (n, 1, 1, in); weights are HWCN (1, 1, in, out).
Tensor4 dense(const Tensor4& x, const Tensor4& weights, std::span<const float> bias);
/// Softmax along the channel axis.
Tensor4 softmax(const Tensor4& x);

/// Index of the largest channel value per image of an (n, 1, 1, c) tensor.
std::vector<int> argmax_rows(const Tensor4& x);

}  // namespace axemu::layers

#endif  // AXEMU_LAYERS_HPP_
