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

#ifndef AXEMU_QUANTIZER_HPP_
#define AXEMU_QUANTIZER_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "axemu/tensor.hpp"

namespace axemu {

/// Interpretation of an 8-bit code word: [0, 255] or two's complement [-128, 127].
enum class Signedness : std::uint8_t { kUnsigned = 0, kSigned = 1 };

/// Round-to-nearest variants that differ only in how exact halves break.
enum class RoundMode : std::uint8_t { kHalfAwayFromZero, kHalfToEven, kHalfTowardZero };

std::string_view signedness_name(Signedness mode) noexcept;
std::string_view round_mode_name(RoundMode mode) noexcept;
Signedness parse_signedness(std::string_view name);
RoundMode parse_round_mode(std::string_view name);

constexpr int code_min(Signedness mode) noexcept { return mode == Signedness::kSigned ? -128 : 0; }
constexpr int code_max(Signedness mode) noexcept { return mode == Signedness::kSigned ? 127 : 255; }

/// Integer value of a raw code byte under `mode`.
constexpr int code_value(std::uint8_t raw, Signedness mode) noexcept {
  return mode == Signedness::kSigned ? static_cast<int>(static_cast<std::int8_t>(raw))
                                     : static_cast<int>(raw);
}

/// Raw hardware byte of an in-range code value.
constexpr std::uint8_t code_byte(int value) noexcept { return static_cast<std::uint8_t>(value & 0xFF); }

/// Rounds a finite real to an integral real.
double round_with(RoundMode mode, double x) noexcept;

/// Affine map r = alpha * (code - beta).
struct QuantParams {
  double alpha = 1.0;
  int beta = 0;
  Signedness mode = Signedness::kUnsigned;
  RoundMode round = RoundMode::kHalfAwayFromZero;

  int lo() const noexcept { return code_min(mode); }
  int hi() const noexcept { return code_max(mode); }

  /// Throws unless alpha is positive and finite and beta is representable.
  void validate() const;

  /// clamp(round(r / alpha) + beta, lo, hi). `r` must be finite.
  int quantize(double r) const;
  double dequantize(int code) const noexcept { return alpha * static_cast<double>(code - beta); }

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

/// Derives scale and zero-point from a batch range. The range is first widened
/// to contain 0 so that real zero maps exactly onto the zero-point.
QuantParams compute_coeffs(const Range& range, Signedness mode,
                           RoundMode round = RoundMode::kHalfAwayFromZero);

/// 8-bit codes (raw bytes) with the tensor's shape and layout.
struct QuantTensor {
  Shape4 shape{0, 0, 0, 0};
  Layout layout = Layout::kNHWC;
  std::vector<std::uint8_t> codes;
  QuantParams params;

  int value(std::size_t i) const noexcept { return code_value(codes[i], params.mode); }
};

QuantTensor quantize(const Tensor4& t, const QuantParams& p);
Tensor4 dequantize(const QuantTensor& q);

/// Quantizes `values` into `out` (same length); returns nothing, throws on non-finite input.
void quantize_into(std::span<const float> values, const QuantParams& p,
                   std::span<std::uint8_t> out);

}  // namespace axemu

#endif  // AXEMU_QUANTIZER_HPP_
