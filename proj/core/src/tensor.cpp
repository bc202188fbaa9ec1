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

#include "axemu/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "axemu/error.hpp"

namespace axemu {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kModeMismatch: return "mode_mismatch";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kGraph: return "graph";
  }
  return "unknown";
}

std::string_view layout_name(Layout layout) noexcept {
  return layout == Layout::kNHWC ? "NHWC" : "HWCN";
}

std::string shape_to_string(const Shape4& shape) {
  std::ostringstream os;
  os << '(' << shape[0] << ',' << shape[1] << ',' << shape[2] << ',' << shape[3] << ')';
  return os.str();
}

std::int64_t element_count(const Shape4& shape) {
  std::int64_t count = 1;
  for (auto extent : shape) {
    if (extent < 0) fail(ErrorCode::kShapeMismatch, "negative extent in " + shape_to_string(shape));
    if (extent != 0 && count > std::numeric_limits<std::int64_t>::max() / extent)
      fail(ErrorCode::kShapeMismatch, "element count overflows 64 bits: " + shape_to_string(shape));
    count *= extent;
  }
  return count;
}

Tensor4::Tensor4(Shape4 shape, Layout layout)
    : shape_(shape), layout_(layout),
      data_(static_cast<std::size_t>(element_count(shape)), 0.0f) {}

Tensor4::Tensor4(Shape4 shape, Layout layout, std::vector<float> data)
    : shape_(shape), layout_(layout), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != element_count(shape_)) {
    std::ostringstream os;
    os << "tensor data length " << data_.size() << " does not match shape "
       << shape_to_string(shape_);
    fail(ErrorCode::kShapeMismatch, os.str());
  }
}

Shape4 Tensor4::unflatten(std::int64_t offset) const noexcept {
  Shape4 index{};
  for (int axis = 3; axis >= 0; --axis) {
    const auto extent = std::max<std::int64_t>(shape_[axis], 1);
    index[axis] = offset % extent;
    offset /= extent;
  }
  return index;
}

Tensor4 Tensor4::slice_batch(std::int64_t first, std::int64_t count) const {
  if (first < 0 || count < 0 || first + count > shape_[0])
    fail(ErrorCode::kShapeMismatch, "batch slice out of range");
  const std::int64_t image = shape_[1] * shape_[2] * shape_[3];
  std::vector<float> data(data_.begin() + first * image, data_.begin() + (first + count) * image);
  return Tensor4({count, shape_[1], shape_[2], shape_[3]}, layout_, std::move(data));
}

Tensor4 concat_batch(std::span<const Tensor4> parts) {
  if (parts.empty()) fail(ErrorCode::kInvalidArgument, "concat_batch of zero tensors");
  Shape4 shape = parts.front().shape();
  shape[0] = 0;
  for (const auto& part : parts) {
    if (part.dim(1) != shape[1] || part.dim(2) != shape[2] || part.dim(3) != shape[3])
      fail(ErrorCode::kShapeMismatch, "concat_batch: inner extents differ");
    shape[0] += part.dim(0);
  }
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(element_count(shape)));
  for (const auto& part : parts) data.insert(data.end(), part.data().begin(), part.data().end());
  return Tensor4(shape, parts.front().layout(), std::move(data));
}

void Range::validate() const {
  if (!std::isfinite(min) || !std::isfinite(max))
    fail(ErrorCode::kNonFinite, "range bounds must be finite");
  if (min > max) fail(ErrorCode::kInvalidArgument, "range min exceeds max");
}

void ConvGeometry::validate() const {
  for (auto s : strides)
    if (s < 1) fail(ErrorCode::kInvalidArgument, "strides must be positive");
  for (auto d : dilations)
    if (d < 1) fail(ErrorCode::kInvalidArgument, "dilations must be positive");
  if (padding.kind == PaddingKind::kExplicit &&
      (padding.top < 0 || padding.bottom < 0 || padding.left < 0 || padding.right < 0))
    fail(ErrorCode::kInvalidArgument, "explicit padding must be non-negative");
}

namespace {

struct AxisPlan {
  std::int64_t out = 0;
  std::int64_t before = 0;
  std::int64_t after = 0;
};

AxisPlan plan_axis(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                   std::int64_t dilation, PaddingKind kind, std::int64_t before,
                   std::int64_t after) {
  const std::int64_t dilated = (kernel - 1) * dilation + 1;
  AxisPlan plan;
  if (kind == PaddingKind::kSame) {
    const std::int64_t out = (in + stride - 1) / stride;
    const std::int64_t total = std::max<std::int64_t>((out - 1) * stride + dilated - in, 0);
    plan.before = total / 2;
    plan.after = total - plan.before;
  } else if (kind == PaddingKind::kExplicit) {
    plan.before = before;
    plan.after = after;
  }
  const std::int64_t span = in + plan.before + plan.after - dilated;
  if (span < 0 || in <= 0) {
    std::ostringstream os;
    os << "kernel extent " << dilated << " exceeds padded input extent "
       << in + plan.before + plan.after;
    fail(ErrorCode::kShapeMismatch, os.str());
  }
  plan.out = span / stride + 1;
  return plan;
}

}  // namespace

ConvPlan plan_conv(const Shape4& input_shape, const Shape4& filter_shape,
                   const ConvGeometry& geometry) {
  geometry.validate();
  element_count(input_shape);
  element_count(filter_shape);
  if (filter_shape[2] != input_shape[3]) {
    fail(ErrorCode::kShapeMismatch, "filter channels " + std::to_string(filter_shape[2]) +
                                        " != input channels " + std::to_string(input_shape[3]));
  }
  if (filter_shape[0] < 1 || filter_shape[1] < 1 || filter_shape[3] < 1)
    fail(ErrorCode::kShapeMismatch, "filter extents must be positive");

  const auto& pad = geometry.padding;
  const auto rows = plan_axis(input_shape[1], filter_shape[0], geometry.strides[0],
                              geometry.dilations[0], pad.kind, pad.top, pad.bottom);
  const auto cols = plan_axis(input_shape[2], filter_shape[1], geometry.strides[1],
                              geometry.dilations[1], pad.kind, pad.left, pad.right);
  ConvPlan plan;
  plan.batch = input_shape[0];
  plan.in_h = input_shape[1];
  plan.in_w = input_shape[2];
  plan.in_c = input_shape[3];
  plan.k_h = filter_shape[0];
  plan.k_w = filter_shape[1];
  plan.out_c = filter_shape[3];
  plan.out_h = rows.out;
  plan.out_w = cols.out;
  plan.stride_h = geometry.strides[0];
  plan.stride_w = geometry.strides[1];
  plan.dil_h = geometry.dilations[0];
  plan.dil_w = geometry.dilations[1];
  plan.pad_top = rows.before;
  plan.pad_bottom = rows.after;
  plan.pad_left = cols.before;
  plan.pad_right = cols.after;
  return plan;
}

Shape4 output_shape(const Shape4& input_shape, const Shape4& filter_shape,
                    const ConvGeometry& geometry) {
  return plan_conv(input_shape, filter_shape, geometry).output_shape();
}

Range min_max(std::span<const float> values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "min/max of an empty tensor");
  float lo = values[0];
  float hi = values[0];
  for (float v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "tensor contains a non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

Range tensor_min_max(const Tensor4& t) { return min_max(t.data()); }

}  // namespace axemu
