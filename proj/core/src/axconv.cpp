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

#include "axemu/axconv.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

#include "axemu/error.hpp"
#include "axemu/parallel.hpp"
#include "axemu/stopwatch.hpp"

namespace axemu {

std::string_view accumulator_name(Accumulator acc) noexcept {
  switch (acc) {
    case Accumulator::kExact64: return "exact64";
    case Accumulator::kWrap32: return "wrap32";
    case Accumulator::kSaturate32: return "saturate32";
  }
  return "exact64";
}

Accumulator parse_accumulator(std::string_view name) {
  if (name == "exact64") return Accumulator::kExact64;
  if (name == "wrap32") return Accumulator::kWrap32;
  if (name == "saturate32") return Accumulator::kSaturate32;
  fail(ErrorCode::kInvalidArgument, "unknown accumulator '" + std::string(name) + "'");
}

std::string_view engine_name(ConvEngine engine) noexcept {
  return engine == ConvEngine::kGemm ? "gemm" : "direct";
}

ConvEngine parse_engine(std::string_view name) {
  if (name == "gemm") return ConvEngine::kGemm;
  if (name == "direct") return ConvEngine::kDirect;
  fail(ErrorCode::kInvalidArgument, "unknown engine '" + std::string(name) + "'");
}

void ConvConfig::validate() const {
  geometry.validate();
  if (chunk_size < 1) fail(ErrorCode::kInvalidArgument, "chunk_size must be at least 1");
  if (workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be at least 1");
  if (tile_rows < 1 || tile_cols < 1) fail(ErrorCode::kInvalidArgument, "tile sizes must be positive");
  if (max_patch_bytes < 1) fail(ErrorCode::kInvalidArgument, "max_patch_bytes must be positive");
}

ConvStats& ConvStats::operator+=(const ConvStats& other) {
  mac_count += other.mac_count;
  chunks += other.chunks;
  quantize_seconds += other.quantize_seconds;
  im2cols_seconds += other.im2cols_seconds;
  lut_seconds += other.lut_seconds;
  dequantize_seconds += other.dequantize_seconds;
  direct_seconds += other.direct_seconds;
  return *this;
}

std::int64_t apply_accumulator(Accumulator acc, std::int64_t exact_sum) noexcept {
  switch (acc) {
    case Accumulator::kExact64:
      return exact_sum;
    case Accumulator::kWrap32:
      return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(exact_sum)));
    case Accumulator::kSaturate32:
      return std::clamp<std::int64_t>(exact_sum, std::numeric_limits<std::int32_t>::min(),
                                      std::numeric_limits<std::int32_t>::max());
  }
  return exact_sum;
}

std::int64_t effective_chunk_size(const ConvPlan& plan, const ConvConfig& cfg) noexcept {
  const std::int64_t per_image = std::max<std::int64_t>(plan.positions_per_image() * plan.patch_len(), 1);
  const std::int64_t cap = std::max<std::int64_t>(cfg.max_patch_bytes / per_image, 1);
  return std::clamp<std::int64_t>(cfg.chunk_size, 1, cap);
}

namespace {

double* timer_sink(ConvStats* stats, double ConvStats::*field) {
  return stats && stats->collect_timing ? &(stats->*field) : nullptr;
}

void check_modes(const MultLut& lut, const QuantParams& p1, const QuantParams& p2) {
  if (p1.mode != lut.mode() || p2.mode != lut.mode())
    fail(ErrorCode::kModeMismatch, "quantization mode does not match the multiplier table (" +
                                       std::string(signedness_name(lut.mode())) + ")");
}

void check_conv_inputs(const Tensor4& input, const Tensor4& filters) {
  if (input.layout() != Layout::kNHWC) fail(ErrorCode::kShapeMismatch, "convolution input must be NHWC");
  if (filters.layout() != Layout::kHWCN) fail(ErrorCode::kShapeMismatch, "convolution filters must be HWCN");
}

}  // namespace

Tensor4 direct_conv(const Tensor4& input, const Tensor4& filters, const Range& in_range,
                    const Range& f_range, const MultLut& lut, const ConvConfig& cfg,
                    ConvStats* stats) {
  ScopedTimer timer(timer_sink(stats, &ConvStats::direct_seconds));
  cfg.validate();
  check_conv_inputs(input, filters);
  const ConvPlan plan = plan_conv(input.shape(), filters.shape(), cfg.geometry);
  const QuantParams p1 = compute_coeffs(in_range, lut.mode(), cfg.round);
  const QuantParams p2 = compute_coeffs(f_range, lut.mode(), cfg.round);
  const double scale = p1.alpha * p2.alpha;
  const std::int64_t b1 = p1.beta;
  const std::int64_t b2 = p2.beta;

  Tensor4 out(plan.output_shape(), Layout::kNHWC);
  for (std::int64_t n = 0; n < plan.batch; ++n) {
    for (std::int64_t oh = 0; oh < plan.out_h; ++oh) {
      for (std::int64_t ow = 0; ow < plan.out_w; ++ow) {
        for (std::int64_t co = 0; co < plan.out_c; ++co) {
          std::int64_t total = 0;
          std::int64_t products = 0;
          for (std::int64_t kh = 0; kh < plan.k_h; ++kh) {
            const std::int64_t ih = oh * plan.stride_h - plan.pad_top + kh * plan.dil_h;
            for (std::int64_t kw = 0; kw < plan.k_w; ++kw) {
              const std::int64_t iw = ow * plan.stride_w - plan.pad_left + kw * plan.dil_w;
              const bool inside = ih >= 0 && ih < plan.in_h && iw >= 0 && iw < plan.in_w;
              for (std::int64_t ci = 0; ci < plan.in_c; ++ci) {
                const std::int64_t xi = inside ? p1.quantize(input.at(n, ih, iw, ci)) : b1;
                const std::int64_t fi = p2.quantize(filters.at(kh, kw, ci, co));
                const std::int64_t product =
                    lut.lookup(code_byte(static_cast<int>(xi)), code_byte(static_cast<int>(fi)));
                total += product - b2 * xi - b1 * fi + b1 * b2;
                products += product;
              }
            }
          }
          const std::int64_t corrected = total - products + apply_accumulator(cfg.accumulator, products);
          out.at(n, oh, ow, co) = dequantize_accumulator(corrected, scale);
        }
      }
    }
  }
  if (stats) stats->mac_count += plan.batch * plan.positions_per_image() * plan.patch_len() * plan.out_c;
  return out;
}

QuantFilters quantize_filters(const Tensor4& filters, const QuantParams& p2) {
  if (filters.layout() != Layout::kHWCN) fail(ErrorCode::kShapeMismatch, "filters must be HWCN");
  p2.validate();
  QuantFilters qf;
  qf.rows = filters.dim(0) * filters.dim(1) * filters.dim(2);
  qf.cols = filters.dim(3);
  qf.mode = p2.mode;
  qf.codes.resize(static_cast<std::size_t>(filters.size()));
  quantize_into(filters.data(), p2, qf.codes);
  qf.filter_sums.assign(static_cast<std::size_t>(qf.cols), 0);
  for (std::int64_t k = 0; k < qf.rows; ++k)
    for (std::int64_t c = 0; c < qf.cols; ++c) qf.filter_sums[static_cast<std::size_t>(c)] += qf.value(k, c);
  return qf;
}

PatchMatrix im2cols(const QuantTensor& chunk, const Shape4& filter_shape,
                    const ConvGeometry& geometry, int workers) {
  if (chunk.layout != Layout::kNHWC) fail(ErrorCode::kShapeMismatch, "im2cols expects an NHWC chunk");
  const ConvPlan plan = plan_conv(chunk.shape, filter_shape, geometry);
  PatchMatrix mp;
  mp.rows = plan.batch * plan.positions_per_image();
  mp.cols = plan.patch_len();
  mp.mode = chunk.params.mode;
  if (mp.rows == 0) return mp;
  mp.codes.resize(static_cast<std::size_t>(mp.rows * mp.cols));
  mp.patch_sums.assign(static_cast<std::size_t>(mp.rows), 0);

  const std::uint8_t pad_code = code_byte(chunk.params.beta);
  const std::int64_t cin = plan.in_c;
  const std::int64_t row_stride = plan.in_w * cin;
  const std::int64_t image_stride = plan.in_h * row_stride;

  // One task per (image, output row).
  parallel_for(plan.batch * plan.out_h, workers, [&](std::int64_t task) {
    const std::int64_t n = task / plan.out_h;
    const std::int64_t oh = task % plan.out_h;
    const std::uint8_t* image = chunk.codes.data() + n * image_stride;
    for (std::int64_t ow = 0; ow < plan.out_w; ++ow) {
      const std::int64_t r = (n * plan.out_h + oh) * plan.out_w + ow;
      std::uint8_t* dst = mp.codes.data() + r * mp.cols;
      for (std::int64_t kh = 0; kh < plan.k_h; ++kh) {
        const std::int64_t ih = oh * plan.stride_h - plan.pad_top + kh * plan.dil_h;
        for (std::int64_t kw = 0; kw < plan.k_w; ++kw, dst += cin) {
          const std::int64_t iw = ow * plan.stride_w - plan.pad_left + kw * plan.dil_w;
          if (ih >= 0 && ih < plan.in_h && iw >= 0 && iw < plan.in_w)
            std::memcpy(dst, image + ih * row_stride + iw * cin, static_cast<std::size_t>(cin));
          else
            std::memset(dst, pad_code, static_cast<std::size_t>(cin));
        }
      }
      std::int64_t sum = 0;
      const std::uint8_t* row = mp.codes.data() + r * mp.cols;
      for (std::int64_t k = 0; k < mp.cols; ++k) sum += code_value(row[k], mp.mode);
      mp.patch_sums[static_cast<std::size_t>(r)] = sum;
    }
  });
  return mp;
}

PatchMatrix im2cols(const Tensor4& chunk, const QuantParams& p1, const Shape4& filter_shape,
                    const ConvGeometry& geometry, int workers, ConvStats* stats) {
  p1.validate();
  QuantTensor quantized{chunk.shape(), chunk.layout(), {}, p1};
  {
    ScopedTimer timer(timer_sink(stats, &ConvStats::quantize_seconds));
    quantized.codes.resize(static_cast<std::size_t>(chunk.size()));
    const std::int64_t image = chunk.dim(1) * chunk.dim(2) * chunk.dim(3);
    parallel_for(chunk.dim(0), workers, [&](std::int64_t n) {
      quantize_into(chunk.data().subspan(static_cast<std::size_t>(n * image), static_cast<std::size_t>(image)),
                    p1, std::span(quantized.codes).subspan(static_cast<std::size_t>(n * image),
                                                           static_cast<std::size_t>(image)));
    });
  }
  ScopedTimer timer(timer_sink(stats, &ConvStats::im2cols_seconds));
  return im2cols(quantized, filter_shape, geometry, workers);
}

namespace {

// Sums of LUT products for rows [r0, r1) into sums (rows x cols, row-major).
template <typename Entry>
void lut_gemm_rows(const PatchMatrix& mp, const QuantFilters& qf, const Entry* table,
                   std::int64_t r0, std::int64_t r1, std::int64_t tile_cols, std::int64_t* sums) {
  const std::int64_t k_len = mp.cols;
  const std::int64_t n_cols = qf.cols;
  for (std::int64_t c0 = 0; c0 < n_cols; c0 += tile_cols) {
    const std::int64_t c1 = std::min(c0 + tile_cols, n_cols);
    for (std::int64_t r = r0; r < r1; ++r) {
      const std::uint8_t* a = mp.codes.data() + r * k_len;
      std::int64_t* acc = sums + r * n_cols;
      for (std::int64_t k = 0; k < k_len; ++k) {
        const Entry* lut_row = table + (static_cast<std::size_t>(a[k]) << 8);
        const std::uint8_t* b = qf.codes.data() + k * n_cols;
        for (std::int64_t c = c0; c < c1; ++c) acc[c] += lut_row[b[c]];
      }
    }
  }
}

}  // namespace

std::vector<float> approx_gemm(const PatchMatrix& mp, const QuantFilters& qf,
                               const QuantParams& p1, const QuantParams& p2, const MultLut& lut,
                               const ConvConfig& cfg, ConvStats* stats) {
  cfg.validate();
  check_modes(lut, p1, p2);
  if (mp.mode != p1.mode || qf.mode != p2.mode)
    fail(ErrorCode::kModeMismatch, "operand codes were quantized in a different mode");
  if (mp.cols != qf.rows)
    fail(ErrorCode::kShapeMismatch, "patch length " + std::to_string(mp.cols) +
                                        " != filter rows " + std::to_string(qf.rows));

  const std::int64_t rows = mp.rows;
  const std::int64_t cols = qf.cols;
  std::vector<std::int64_t> sums(static_cast<std::size_t>(rows * cols), 0);
  const std::int64_t row_tiles = (rows + cfg.tile_rows - 1) / cfg.tile_rows;
  {
    ScopedTimer timer(timer_sink(stats, &ConvStats::lut_seconds));
    parallel_for(row_tiles, cfg.workers, [&](std::int64_t tile) {
      const std::int64_t r0 = tile * cfg.tile_rows;
      const std::int64_t r1 = std::min(r0 + cfg.tile_rows, rows);
      if (lut.mode() == Signedness::kSigned) {
        const auto* table = reinterpret_cast<const std::int16_t*>(lut.entries().data());
        lut_gemm_rows(mp, qf, table, r0, r1, cfg.tile_cols, sums.data());
      } else {
        lut_gemm_rows(mp, qf, lut.entries().data(), r0, r1, cfg.tile_cols, sums.data());
      }
    });
  }

  ScopedTimer timer(timer_sink(stats, &ConvStats::dequantize_seconds));
  std::vector<float> out(sums.size());
  const double scale = p1.alpha * p2.alpha;
  const std::int64_t b1 = p1.beta;
  const std::int64_t b2 = p2.beta;
  const std::int64_t constant = mp.cols * b1 * b2;
  parallel_for(row_tiles, cfg.workers, [&](std::int64_t tile) {
    const std::int64_t r0 = tile * cfg.tile_rows;
    const std::int64_t r1 = std::min(r0 + cfg.tile_rows, rows);
    for (std::int64_t r = r0; r < r1; ++r) {
      const std::int64_t row_term = b2 * mp.patch_sums[static_cast<std::size_t>(r)];
      for (std::int64_t c = 0; c < cols; ++c) {
        const auto idx = static_cast<std::size_t>(r * cols + c);
        const std::int64_t corrected = apply_accumulator(cfg.accumulator, sums[idx]) - row_term -
                                       b1 * qf.filter_sums[static_cast<std::size_t>(c)] + constant;
        out[idx] = dequantize_accumulator(corrected, scale);
      }
    }
  });
  if (stats) stats->mac_count += rows * mp.cols * cols;
  return out;
}

Tensor4 axconv2d(const Tensor4& input, const Tensor4& filters, const Range& in_range,
                 const Range& f_range, const MultLut& lut, const ConvConfig& cfg,
                 ConvStats* stats) {
  cfg.validate();
  check_conv_inputs(input, filters);
  const ConvPlan plan = plan_conv(input.shape(), filters.shape(), cfg.geometry);

  QuantParams p1;
  QuantParams p2;
  QuantFilters qf;
  {
    ScopedTimer timer(timer_sink(stats, &ConvStats::quantize_seconds));
    p1 = compute_coeffs(in_range, lut.mode(), cfg.round);
    p2 = compute_coeffs(f_range, lut.mode(), cfg.round);
    qf = quantize_filters(filters, p2);
  }

  Tensor4 out(plan.output_shape(), Layout::kNHWC);
  const std::int64_t chunk = effective_chunk_size(plan, cfg);
  const std::int64_t out_image = plan.positions_per_image() * plan.out_c;
  for (std::int64_t first = 0; first < plan.batch; first += chunk) {
    const std::int64_t count = std::min(chunk, plan.batch - first);
    const Tensor4 images = input.slice_batch(first, count);
    const PatchMatrix mp = im2cols(images, p1, filters.shape(), cfg.geometry, cfg.workers, stats);
    const std::vector<float> block = approx_gemm(mp, qf, p1, p2, lut, cfg, stats);
    std::copy(block.begin(), block.end(), out.data().begin() + first * out_image);
    if (stats) ++stats->chunks;
  }
  return out;
}

Tensor4 approx_conv2d(ConvEngine engine, const Tensor4& input, const Tensor4& filters,
                      const Range& in_range, const Range& f_range, const MultLut& lut,
                      const ConvConfig& cfg, ConvStats* stats) {
  return engine == ConvEngine::kGemm ? axconv2d(input, filters, in_range, f_range, lut, cfg, stats)
                                     : direct_conv(input, filters, in_range, f_range, lut, cfg, stats);
}

}  // namespace axemu
