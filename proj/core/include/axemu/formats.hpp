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

#ifndef AXEMU_FORMATS_HPP_
#define AXEMU_FORMATS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "axemu/axmult.hpp"
#include "axemu/graph.hpp"
#include "axemu/tensor.hpp"

namespace axemu {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Raw tensor file
// ---------------
// 24-byte header: "AXT1", layout byte (0 = NHWC, 1 = HWCN), 3 zero bytes,
// four uint32 LE extents; then float32 LE values in layout order.
inline constexpr std::size_t kTensorHeaderBytes = 24;

Bytes encode_tensor(const Tensor4& t);
Tensor4 decode_tensor(std::span<const std::uint8_t> bytes);
void save_tensor(const std::filesystem::path& path, const Tensor4& t);
Tensor4 load_tensor(const std::filesystem::path& path);

// Multiplier table file
// ---------------------
// 16-byte header: "AXM1", mode byte (0 = unsigned, 1 = signed), operand order
// byte (0 = a in the high index byte), 10 zero bytes; then 65,536 uint16 LE
// entries in index order. Raw tables are the bare 131,072-byte entry block.
inline constexpr std::size_t kLutHeaderBytes = 16;
inline constexpr std::size_t kLutFileBytes = kLutHeaderBytes + kLutBytes;

Bytes encode_lut(const MultLut& lut);
MultLut decode_lut(std::span<const std::uint8_t> bytes);
Bytes encode_lut_raw(const MultLut& lut);
MultLut decode_lut_raw(std::span<const std::uint8_t> bytes, Signedness mode);
void save_lut(const std::filesystem::path& path, const MultLut& lut);
MultLut load_lut(const std::filesystem::path& path);
void save_lut_raw(const std::filesystem::path& path, const MultLut& lut);
MultLut load_lut_raw(const std::filesystem::path& path, Signedness mode);

// Model file
// ----------
// JSON document plus a sidecar blob of float32 LE values. See docs/model_format.md.
struct ModelFiles {
  std::string json;
  Bytes weights;
};

/// `weights_name` is recorded in the document as the sidecar file name.
ModelFiles encode_model(const LayerGraph& g, const std::string& weights_name);
/// AxConv2D nodes come back with lut_name set and no bound table.
LayerGraph decode_model(std::string_view json, std::span<const std::uint8_t> weights);
/// Writes `path` and the sidecar `path` with extension ".bin".
void save_model(const std::filesystem::path& path, const LayerGraph& g);
LayerGraph load_model(const std::filesystem::path& path);

// CIFAR-10 binary batches
// -----------------------
// Records of 1 label byte and 3072 channel-planar pixel bytes (R, G, B planes
// of 32x32). Images come back NHWC scaled to [0, 1].
inline constexpr std::size_t kCifarRecordBytes = 3073;

struct Cifar10Batch {
  Tensor4 images;
  std::vector<int> labels;
};

Cifar10Batch decode_cifar10(std::span<const std::uint8_t> bytes, std::int64_t max_images = -1);
Cifar10Batch load_cifar10(const std::filesystem::path& path, std::int64_t max_images = -1);
/// Pixels are rounded from [0, 1] to bytes.
Bytes encode_cifar10(const Cifar10Batch& batch);

// Run reports
// -----------
inline constexpr std::string_view kPhaseLutLookup = "lut_lookup";
inline constexpr std::string_view kPhaseQuantDequantMinMax = "quant_dequant_minmax";
inline constexpr std::string_view kPhaseInit = "init";
inline constexpr std::string_view kPhaseOther = "im2cols_gemm_other";

struct PhaseTime {
  double seconds = 0.0;
  double percent = 0.0;
  friend bool operator==(const PhaseTime&, const PhaseTime&) = default;
};

struct LayerTiming {
  std::string id;
  std::string kind;
  double seconds = 0.0;
  friend bool operator==(const LayerTiming&, const LayerTiming&) = default;
};

struct RunReport {
  std::string model;
  std::string engine;
  std::string lut;
  std::int64_t images = 0;
  std::int64_t batches = 0;
  int workers = 1;
  double t_init = 0.0;
  double t_comp = 0.0;
  std::map<std::string, PhaseTime> phase_breakdown;
  std::int64_t mac_count = 0;
  std::vector<LayerTiming> per_layer;

  double total() const noexcept { return t_init + t_comp; }
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

std::string save_report(const RunReport& report);
RunReport load_report(std::string_view text);
void save_report_file(const std::filesystem::path& path, const RunReport& report);
RunReport load_report_file(const std::filesystem::path& path);
/// Comma-separated export: one row per phase and per layer.
std::string report_csv(const RunReport& report);
/// "t_init + t_comp = 0.3 + 15.5 = 15.8 s" style one-line summary.
std::string report_summary(const RunReport& report);

}  // namespace axemu

#endif  // AXEMU_FORMATS_HPP_
