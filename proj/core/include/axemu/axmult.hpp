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

#ifndef AXEMU_AXMULT_HPP_
#define AXEMU_AXMULT_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "axemu/quantizer.hpp"

namespace axemu {

inline constexpr std::size_t kLutEntries = 256 * 256;
inline constexpr std::size_t kLutBytes = kLutEntries * sizeof(std::uint16_t);

/// Operand a in the high byte, operand b in the low byte. Raw bytes are the
/// hardware bit patterns, so signed -128 indexes row 0x80.
constexpr std::uint16_t stitch_index(std::uint8_t a, std::uint8_t b) noexcept {
  return static_cast<std::uint16_t>((static_cast<unsigned>(a) << 8) | b);
}

/// Truth table of an 8x8 -> 16 bit multiplier. Immutable once built.
class MultLut {
 public:
  MultLut(Signedness mode, std::vector<std::uint16_t> entries);

  Signedness mode() const noexcept { return mode_; }
  std::span<const std::uint16_t> entries() const noexcept { return entries_; }

  /// Raw 16-bit word for the operand bytes.
  std::uint16_t raw(std::uint8_t a, std::uint8_t b) const noexcept {
    return entries_[stitch_index(a, b)];
  }

  /// Product interpreted per mode: int16 for signed tables, uint16 otherwise.
  std::int32_t lookup(std::uint8_t a, std::uint8_t b) const noexcept {
    const std::uint16_t word = raw(a, b);
    return mode_ == Signedness::kSigned ? static_cast<std::int32_t>(static_cast<std::int16_t>(word))
                                        : static_cast<std::int32_t>(word);
  }

  friend bool operator==(const MultLut&, const MultLut&) = default;

 private:
  Signedness mode_;
  std::vector<std::uint16_t> entries_;
};

MultLut exact_lut(Signedness mode);

/// Zeroes the `drop_bits` low bits of each operand's magnitude before an
/// exact multiply. drop_bits = 0 reproduces exact_lut.
MultLut truncated_lut(Signedness mode, int drop_bits);

struct LutErrorStats {
  std::int64_t max_abs_error = 0;
  double mean_abs_error = 0.0;
  /// Mean of |approx - exact| / |exact| over pairs whose exact product is nonzero.
  double mean_rel_error = 0.0;
  std::int64_t error_count = 0;

  friend bool operator==(const LutErrorStats&, const LutErrorStats&) = default;
};

LutErrorStats error_stats(const MultLut& lut);

}  // namespace axemu

#endif  // AXEMU_AXMULT_HPP_
