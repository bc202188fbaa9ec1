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

#include "axemu/axmult.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "axemu/error.hpp"

namespace axemu {

MultLut::MultLut(Signedness mode, std::vector<std::uint16_t> entries)
    : mode_(mode), entries_(std::move(entries)) {
  if (entries_.size() != kLutEntries)
    fail(ErrorCode::kFormat, "multiplier table needs " + std::to_string(kLutEntries) +
                                 " entries, got " + std::to_string(entries_.size()));
}

namespace {

template <typename Product>
MultLut build_lut(Signedness mode, Product product) {
  std::vector<std::uint16_t> entries(kLutEntries);
  for (unsigned a = 0; a < 256; ++a) {
    for (unsigned b = 0; b < 256; ++b) {
      const int va = code_value(static_cast<std::uint8_t>(a), mode);
      const int vb = code_value(static_cast<std::uint8_t>(b), mode);
      entries[stitch_index(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b))] =
          static_cast<std::uint16_t>(product(va, vb) & 0xFFFF);
    }
  }
  return MultLut(mode, std::move(entries));
}

}  // namespace

MultLut exact_lut(Signedness mode) {
  return build_lut(mode, [](int a, int b) { return a * b; });
}

MultLut truncated_lut(Signedness mode, int drop_bits) {
  if (drop_bits < 0 || drop_bits > 7)
    fail(ErrorCode::kInvalidArgument, "drop_bits must be in [0, 7]");
  const int mask = ~((1 << drop_bits) - 1);
  auto truncate = [mask](int v) { return v < 0 ? -((-v) & mask) : (v & mask); };
  return build_lut(mode, [&](int a, int b) { return truncate(a) * truncate(b); });
}

LutErrorStats error_stats(const MultLut& lut) {
  LutErrorStats stats;
  double abs_sum = 0.0;
  double rel_sum = 0.0;
  std::int64_t rel_count = 0;
  for (unsigned a = 0; a < 256; ++a) {
    for (unsigned b = 0; b < 256; ++b) {
      const auto ra = static_cast<std::uint8_t>(a);
      const auto rb = static_cast<std::uint8_t>(b);
      const std::int64_t exact =
          static_cast<std::int64_t>(code_value(ra, lut.mode())) * code_value(rb, lut.mode());
      const std::int64_t err = std::llabs(lut.lookup(ra, rb) - exact);
      if (err != 0) ++stats.error_count;
      stats.max_abs_error = std::max(stats.max_abs_error, err);
      abs_sum += static_cast<double>(err);
      if (exact != 0) {
        rel_sum += static_cast<double>(err) / static_cast<double>(std::llabs(exact));
        ++rel_count;
      }
    }
  }
  stats.mean_abs_error = abs_sum / static_cast<double>(kLutEntries);
  stats.mean_rel_error = rel_count ? rel_sum / static_cast<double>(rel_count) : 0.0;
  return stats;
}

}  // namespace axemu
