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

#include "axemu/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "axemu/error.hpp"
#include "axemu/parallel.hpp"

namespace axemu::layers {

Tensor4 conv2d(const Tensor4& input, const Tensor4& filters, std::span<const float> bias,
               const ConvGeometry& geometry, int workers) {
  if (input.layout() != Layout::kNHWC || filters.layout() != Layout::kHWCN)
    fail(ErrorCode::kShapeMismatch, "conv2d expects NHWC input and HWCN filters");
  const ConvPlan plan = plan_conv(input.shape(), filters.shape(), geometry);
  if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != plan.out_c)
    fail(ErrorCode::kShapeMismatch, "conv bias length differs from filter count");

  Tensor4 out(plan.output_shape(), Layout::kNHWC);
  const std::int64_t k_len = plan.patch_len();
  const std::int64_t cout = plan.out_c;
  const std::int64_t cin = plan.in_c;
  const float* w = filters.data().data();

  parallel_for(plan.batch * plan.out_h, workers, [&](std::int64_t task) {
    const std::int64_t n = task / plan.out_h;
    const std::int64_t oh = task % plan.out_h;
    std::vector<float> patch(static_cast<std::size_t>(k_len));
    for (std::int64_t ow = 0; ow < plan.out_w; ++ow) {
      float* dst = patch.data();
      for (std::int64_t kh = 0; kh < plan.k_h; ++kh) {
        const std::int64_t ih = oh * plan.stride_h - plan.pad_top + kh * plan.dil_h;
        for (std::int64_t kw = 0; kw < plan.k_w; ++kw, dst += cin) {
          const std::int64_t iw = ow * plan.stride_w - plan.pad_left + kw * plan.dil_w;
          if (ih >= 0 && ih < plan.in_h && iw >= 0 && iw < plan.in_w) {
            const float* src = input.data().data() + input.offset(n, ih, iw, 0);
            std::copy(src, src + cin, dst);
          } else {
            std::fill(dst, dst + cin, 0.0f);
          }
        }
      }
      float* acc = &out.at(n, oh, ow, 0);
      for (std::int64_t k = 0; k < k_len; ++k) {
        const float x = patch[static_cast<std::size_t>(k)];
        const float* wrow = w + k * cout;
        for (std::int64_t c = 0; c < cout; ++c) acc[c] += x * wrow[c];
      }
      for (std::size_t c = 0; c < bias.size(); ++c) acc[c] += bias[c];
    }
  });
  return out;
}

void add_bias(Tensor4& t, std::span<const float> bias) {
  if (bias.empty()) return;
  if (static_cast<std::int64_t>(bias.size()) != t.dim(3))
    fail(ErrorCode::kShapeMismatch, "bias length differs from channel count");
  auto data = t.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += bias[i % bias.size()];
}

Tensor4 relu(const Tensor4& x) {
  Tensor4 out = x;
  for (float& v : out.data()) v = std::max(v, 0.0f);
  return out;
}

namespace {

template <typename Reduce, typename Finish>
Tensor4 pool(const Tensor4& x, std::array<std::int64_t, 2> window,
             std::array<std::int64_t, 2> strides, float init, Reduce reduce, Finish finish) {
  if (window[0] < 1 || window[1] < 1 || strides[0] < 1 || strides[1] < 1)
    fail(ErrorCode::kInvalidArgument, "pool window and strides must be positive");
  if (window[0] > x.dim(1) || window[1] > x.dim(2))
    fail(ErrorCode::kShapeMismatch, "pool window larger than input " + shape_to_string(x.shape()));
  const std::int64_t out_h = (x.dim(1) - window[0]) / strides[0] + 1;
  const std::int64_t out_w = (x.dim(2) - window[1]) / strides[1] + 1;
  Tensor4 out({x.dim(0), out_h, out_w, x.dim(3)}, Layout::kNHWC);
  for (std::int64_t n = 0; n < x.dim(0); ++n)
    for (std::int64_t oh = 0; oh < out_h; ++oh)
      for (std::int64_t ow = 0; ow < out_w; ++ow)
        for (std::int64_t c = 0; c < x.dim(3); ++c) {
          float acc = init;
          for (std::int64_t i = 0; i < window[0]; ++i)
            for (std::int64_t j = 0; j < window[1]; ++j)
              acc = reduce(acc, x.at(n, oh * strides[0] + i, ow * strides[1] + j, c));
          out.at(n, oh, ow, c) = finish(acc);
        }
  return out;
}

}  // namespace

Tensor4 max_pool(const Tensor4& x, std::array<std::int64_t, 2> window,
                 std::array<std::int64_t, 2> strides) {
  return pool(
      x, window, strides, -std::numeric_limits<float>::infinity(),
      [](float a, float b) { return std::max(a, b); }, [](float a) { return a; });
}

Tensor4 avg_pool(const Tensor4& x, std::array<std::int64_t, 2> window,
                 std::array<std::int64_t, 2> strides) {
  const float inv = 1.0f / static_cast<float>(window[0] * window[1]);
  return pool(
      x, window, strides, 0.0f, [](float a, float b) { return a + b; },
      [inv](float a) { return a * inv; });
}

Tensor4 global_avg_pool(const Tensor4& x) { return avg_pool(x, {x.dim(1), x.dim(2)}, {1, 1}); }

Tensor4 add(const Tensor4& a, const Tensor4& b) {
  if (a.shape() != b.shape())
    fail(ErrorCode::kShapeMismatch,
         "add operands differ: " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  Tensor4 out = a;
  auto dst = out.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

Tensor4 flatten(const Tensor4& x) {
  std::vector<float> data(x.data().begin(), x.data().end());
  return Tensor4({x.dim(0), 1, 1, x.dim(1) * x.dim(2) * x.dim(3)}, Layout::kNHWC, std::move(data));
}

Tensor4 dense(const Tensor4& x, const Tensor4& weights, std::span<const float> bias) {
  const std::int64_t in = weights.dim(2);
  const std::int64_t out_c = weights.dim(3);
  if (x.dim(1) != 1 || x.dim(2) != 1 || x.dim(3) != in)
    fail(ErrorCode::kShapeMismatch, "dense expects (n,1,1," + std::to_string(in) + "), got " +
                                        shape_to_string(x.shape()));
  if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != out_c)
    fail(ErrorCode::kShapeMismatch, "dense bias length differs from output width");
  Tensor4 out({x.dim(0), 1, 1, out_c}, Layout::kNHWC);
  for (std::int64_t n = 0; n < x.dim(0); ++n) {
    float* acc = &out.at(n, 0, 0, 0);
    for (std::int64_t k = 0; k < in; ++k) {
      const float v = x.at(n, 0, 0, k);
      for (std::int64_t c = 0; c < out_c; ++c) acc[c] += v * weights.at(0, 0, k, c);
    }
    for (std::size_t c = 0; c < bias.size(); ++c) acc[c] += bias[c];
  }
  return out;
}

Tensor4 softmax(const Tensor4& x) {
  Tensor4 out = x;
  const std::int64_t c = x.dim(3);
  if (c == 0) return out;
  auto data = out.data();
  for (std::size_t base = 0; base < data.size(); base += static_cast<std::size_t>(c)) {
    auto row = data.subspan(base, static_cast<std::size_t>(c));
    const float peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (float& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (float& v : row) v = static_cast<float>(v / total);
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor4& x) {
  const std::int64_t per_image = x.dim(1) * x.dim(2) * x.dim(3);
  std::vector<int> labels(static_cast<std::size_t>(x.dim(0)));
  for (std::int64_t n = 0; n < x.dim(0); ++n) {
    auto row = x.data().subspan(static_cast<std::size_t>(n * per_image), static_cast<std::size_t>(per_image));
    labels[static_cast<std::size_t>(n)] =
        static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return labels;
}

}  // namespace axemu::layers
