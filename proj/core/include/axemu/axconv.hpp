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

#ifndef AXEMU_AXCONV_HPP_
#define AXEMU_AXCONV_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "axemu/axmult.hpp"
#include "axemu/quantizer.hpp"
#include "axemu/tensor.hpp"

namespace axemu {

/// How the sum of LUT products is held. Exact64 never overflows for patch
/// lengths up to 2^24; the 32-bit modes emulate a narrow hardware accumulator
/// and are applied to the exact sum, so they stay schedule-independent.
enum class Accumulator : std::uint8_t { kExact64, kWrap32, kSaturate32 };

enum class ConvEngine : std::uint8_t { kGemm, kDirect };

std::string_view accumulator_name(Accumulator acc) noexcept;
Accumulator parse_accumulator(std::string_view name);
std::string_view engine_name(ConvEngine engine) noexcept;
ConvEngine parse_engine(std::string_view name);

struct ConvConfig {
  ConvGeometry geometry;
  /// Images per chunk; further capped so one patch matrix stays under max_patch_bytes.
  std::int64_t chunk_size = 64;
  Accumulator accumulator = Accumulator::kExact64;
  RoundMode round = RoundMode::kHalfAwayFromZero;
  int workers = 1;
  std::int64_t tile_rows = 64;
  std::int64_t tile_cols = 64;
  std::int64_t max_patch_bytes = std::int64_t{64} << 20;

  void validate() const;
};

/// Counters and phase timings filled in by the engines when requested.
struct ConvStats {
  bool collect_timing = false;
  std::int64_t mac_count = 0;
  std::int64_t chunks = 0;
  double quantize_seconds = 0.0;
  double im2cols_seconds = 0.0;
  double lut_seconds = 0.0;
  double dequantize_seconds = 0.0;
  double direct_seconds = 0.0;

  ConvStats& operator+=(const ConvStats& other);
};

/// Quantized im2col matrix for one chunk: one row per output position,
/// K = kh * kw * cin columns, padding taps hold the zero-point code.
struct PatchMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  Signedness mode = Signedness::kUnsigned;
  std::vector<std::uint8_t> codes;
  std::vector<std::int64_t> patch_sums;

  int value(std::int64_t r, std::int64_t k) const noexcept {
    return code_value(codes[static_cast<std::size_t>(r * cols + k)], mode);
  }
};

/// K x Cout filter codes (the HWCN tensor read as a matrix) and per-column sums.
struct QuantFilters {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  Signedness mode = Signedness::kUnsigned;
  std::vector<std::uint8_t> codes;
  std::vector<std::int64_t> filter_sums;

  int value(std::int64_t k, std::int64_t c) const noexcept {
    return code_value(codes[static_cast<std::size_t>(k * cols + c)], mode);
  }
};

/// Applies the configured accumulator width to an exact sum of LUT products.
std::int64_t apply_accumulator(Accumulator acc, std::int64_t exact_sum) noexcept;

/// alpha1 * alpha2 * corrected, evaluated in double and narrowed to float.
inline float dequantize_accumulator(std::int64_t corrected, double scale) noexcept {
  return static_cast<float>(static_cast<double>(corrected) * scale);
}

/// Reference semantics: nested loops over every output element and tap,
/// quantizing operands on the fly and accumulating
///   lut(i, f) - beta2 * i - beta1 * f + beta1 * beta2
/// in 64-bit integers. Single-threaded; every other path must match it bit for bit.
Tensor4 direct_conv(const Tensor4& input, const Tensor4& filters, const Range& in_range,
                    const Range& f_range, const MultLut& lut, const ConvConfig& cfg,
                    ConvStats* stats = nullptr);

QuantFilters quantize_filters(const Tensor4& filters, const QuantParams& p2);

PatchMatrix im2cols(const Tensor4& chunk, const QuantParams& p1, const Shape4& filter_shape,
                    const ConvGeometry& geometry, int workers = 1, ConvStats* stats = nullptr);

/// Same, for a chunk that has already been quantized with p1.
PatchMatrix im2cols(const QuantTensor& chunk, const Shape4& filter_shape,
                    const ConvGeometry& geometry, int workers = 1);

/// Tiled LUT GEMM with dequantization corrections. Returns rows x Cout reals:
///   alpha1 * alpha2 * (acc(A) - beta2 * S_p[r] - beta1 * S_f[c] + K * beta1 * beta2)
std::vector<float> approx_gemm(const PatchMatrix& mp, const QuantFilters& qf,
                               const QuantParams& p1, const QuantParams& p2, const MultLut& lut,
                               const ConvConfig& cfg, ConvStats* stats = nullptr);

/// Chunked Im2Cols + ApproxGEMM pipeline. Bit-identical to direct_conv.
Tensor4 axconv2d(const Tensor4& input, const Tensor4& filters, const Range& in_range,
                 const Range& f_range, const MultLut& lut, const ConvConfig& cfg,
                 ConvStats* stats = nullptr);

/// Dispatches to axconv2d or direct_conv.
Tensor4 approx_conv2d(ConvEngine engine, const Tensor4& input, const Tensor4& filters,
                      const Range& in_range, const Range& f_range, const MultLut& lut,
                      const ConvConfig& cfg, ConvStats* stats = nullptr);

/// Images per chunk after applying the patch-matrix memory cap.
std::int64_t effective_chunk_size(const ConvPlan& plan, const ConvConfig& cfg) noexcept;

}  // namespace axemu

#endif  // AXEMU_AXCONV_HPP_
