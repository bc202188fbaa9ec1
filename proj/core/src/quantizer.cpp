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

#include "axemu/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "axemu/error.hpp"

namespace axemu {

std::string_view signedness_name(Signedness mode) noexcept {
  return mode == Signedness::kSigned ? "signed" : "unsigned";
}

std::string_view round_mode_name(RoundMode mode) noexcept {
  switch (mode) {
    case RoundMode::kHalfAwayFromZero: return "half_away_from_zero";
    case RoundMode::kHalfToEven: return "half_to_even";
    case RoundMode::kHalfTowardZero: return "half_toward_zero";
  }
  return "half_away_from_zero";
}

Signedness parse_signedness(std::string_view name) {
  if (name == "unsigned") return Signedness::kUnsigned;
  if (name == "signed") return Signedness::kSigned;
  fail(ErrorCode::kInvalidArgument, "unknown signedness '" + std::string(name) + "'");
}

RoundMode parse_round_mode(std::string_view name) {
  if (name == "half_away_from_zero") return RoundMode::kHalfAwayFromZero;
  if (name == "half_to_even") return RoundMode::kHalfToEven;
  if (name == "half_toward_zero" || name == "toward_zero") return RoundMode::kHalfTowardZero;
  fail(ErrorCode::kInvalidArgument, "unknown round mode '" + std::string(name) + "'");
}

double round_with(RoundMode mode, double x) noexcept {
  switch (mode) {
    case RoundMode::kHalfAwayFromZero:
      return std::round(x);
    case RoundMode::kHalfToEven: {
      const double down = std::floor(x);
      const double frac = x - down;
      if (frac < 0.5) return down;
      if (frac > 0.5) return down + 1.0;
      return std::fmod(down, 2.0) == 0.0 ? down : down + 1.0;
    }
    case RoundMode::kHalfTowardZero:
      return x >= 0.0 ? std::ceil(x - 0.5) : std::floor(x + 0.5);
  }
  return std::round(x);
}

void QuantParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::kInvalidArgument, "quantization scale must be positive and finite");
  if (beta < lo() || beta > hi())
    fail(ErrorCode::kInvalidArgument,
         "zero-point " + std::to_string(beta) + " outside the " +
             std::string(signedness_name(mode)) + " code range");
}

int QuantParams::quantize(double r) const {
  if (!std::isfinite(r)) fail(ErrorCode::kNonFinite, "cannot quantize a non-finite value");
  const double shifted = round_with(round, r / alpha) + beta;
  return static_cast<int>(std::clamp(shifted, static_cast<double>(lo()), static_cast<double>(hi())));
}

QuantParams compute_coeffs(const Range& range, Signedness mode, RoundMode round) {
  range.validate();
  const double lo_real = std::min(range.min, 0.0);
  const double hi_real = std::max(range.max, 0.0);
  constexpr double kSteps = 255.0;

  QuantParams p;
  p.mode = mode;
  p.round = round;
  p.alpha = hi_real == lo_real ? 1.0 : (hi_real - lo_real) / kSteps;
  if (!std::isfinite(p.alpha) || !(p.alpha > 0.0))
    fail(ErrorCode::kNonFinite, "range too wide or too narrow to quantize");
  const double zero = round_with(round, p.lo() - lo_real / p.alpha);
  p.beta = static_cast<int>(
      std::clamp(zero, static_cast<double>(p.lo()), static_cast<double>(p.hi())));
  return p;
}

void quantize_into(std::span<const float> values, const QuantParams& p,
                   std::span<std::uint8_t> out) {
  if (values.size() != out.size()) fail(ErrorCode::kShapeMismatch, "quantize_into size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = code_byte(p.quantize(values[i]));
}

QuantTensor quantize(const Tensor4& t, const QuantParams& p) {
  p.validate();
  QuantTensor q;
  q.shape = t.shape();
  q.layout = t.layout();
  q.params = p;
  q.codes.resize(static_cast<std::size_t>(t.size()));
  quantize_into(t.data(), p, q.codes);
  return q;
}

Tensor4 dequantize(const QuantTensor& q) {
  q.params.validate();
  std::vector<float> data(q.codes.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = static_cast<float>(q.params.dequantize(q.value(i)));
  return Tensor4(q.shape, q.layout, std::move(data));
}

}  // namespace axemu
