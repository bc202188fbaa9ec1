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

#ifndef AXEMU_TENSOR_HPP_
#define AXEMU_TENSOR_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace axemu {

/// NHWC: Batch x Height x Width x Channels (activations).
/// HWCN: Height x Width x Channels x Count (convolution filters).
enum class Layout : std::uint8_t { kNHWC = 0, kHWCN = 1 };

std::string_view layout_name(Layout layout) noexcept;

using Shape4 = std::array<std::int64_t, 4>;

std::string shape_to_string(const Shape4& shape);

/// Product of the extents; throws if an extent is negative or the count
/// overflows 64 bits.
std::int64_t element_count(const Shape4& shape);

/// Dense row-major 4D tensor of 32-bit reals, last index fastest.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(Shape4 shape, Layout layout);
  Tensor4(Shape4 shape, Layout layout, std::vector<float> data);

  const Shape4& shape() const noexcept { return shape_; }
  std::int64_t dim(int axis) const noexcept { return shape_[axis]; }
  Layout layout() const noexcept { return layout_; }
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  std::int64_t offset(std::int64_t i0, std::int64_t i1, std::int64_t i2,
                      std::int64_t i3) const noexcept {
    return ((i0 * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3;
  }
  Shape4 unflatten(std::int64_t offset) const noexcept;

  float at(std::int64_t i0, std::int64_t i1, std::int64_t i2, std::int64_t i3) const noexcept {
    return data_[static_cast<std::size_t>(offset(i0, i1, i2, i3))];
  }
  float& at(std::int64_t i0, std::int64_t i1, std::int64_t i2, std::int64_t i3) noexcept {
    return data_[static_cast<std::size_t>(offset(i0, i1, i2, i3))];
  }

  /// Images [first, first + count) of an NHWC tensor, copied.
  Tensor4 slice_batch(std::int64_t first, std::int64_t count) const;

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_{0, 0, 0, 0};
  Layout layout_ = Layout::kNHWC;
  std::vector<float> data_;
};

/// Concatenates NHWC tensors along the batch axis.
Tensor4 concat_batch(std::span<const Tensor4> parts);

/// Closed interval of finite reals.
struct Range {
  double min = 0.0;
  double max = 0.0;

  void validate() const;
  friend bool operator==(const Range&, const Range&) = default;
};

enum class PaddingKind : std::uint8_t { kValid, kSame, kExplicit };

struct Padding {
  PaddingKind kind = PaddingKind::kValid;
  // Only meaningful for kExplicit.
  std::int64_t top = 0;
  std::int64_t bottom = 0;
  std::int64_t left = 0;
  std::int64_t right = 0;

  static Padding valid() { return {}; }
  static Padding same() { return {PaddingKind::kSame, 0, 0, 0, 0}; }
  static Padding explicit_pad(std::int64_t top, std::int64_t bottom, std::int64_t left,
                              std::int64_t right) {
    return {PaddingKind::kExplicit, top, bottom, left, right};
  }
  friend bool operator==(const Padding&, const Padding&) = default;
};

struct ConvGeometry {
  std::array<std::int64_t, 2> strides{1, 1};
  std::array<std::int64_t, 2> dilations{1, 1};
  Padding padding;

  void validate() const;
  friend bool operator==(const ConvGeometry&, const ConvGeometry&) = default;
};

/// Fully resolved convolution geometry for one (input, filter) pair.
/// Same padding puts the odd cell on the bottom/right.
struct ConvPlan {
  std::int64_t batch = 0;
  std::int64_t in_h = 0, in_w = 0, in_c = 0;
  std::int64_t k_h = 0, k_w = 0, out_c = 0;
  std::int64_t out_h = 0, out_w = 0;
  std::int64_t stride_h = 1, stride_w = 1;
  std::int64_t dil_h = 1, dil_w = 1;
  std::int64_t pad_top = 0, pad_bottom = 0, pad_left = 0, pad_right = 0;

  /// Patch length kh * kw * cin.
  std::int64_t patch_len() const noexcept { return k_h * k_w * in_c; }
  std::int64_t positions_per_image() const noexcept { return out_h * out_w; }
  Shape4 output_shape() const noexcept { return {batch, out_h, out_w, out_c}; }
};

ConvPlan plan_conv(const Shape4& input_shape, const Shape4& filter_shape,
                   const ConvGeometry& geometry);

/// NHWC output shape of convolving `input_shape` (NHWC) with `filter_shape` (HWCN).
Shape4 output_shape(const Shape4& input_shape, const Shape4& filter_shape,
                    const ConvGeometry& geometry);

/// Exact elementwise min and max. Rejects empty tensors and non-finite values.
Range tensor_min_max(const Tensor4& t);
Range min_max(std::span<const float> values);

}  // namespace axemu

#endif  // AXEMU_TENSOR_HPP_
