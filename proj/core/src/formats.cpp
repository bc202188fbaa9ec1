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

#include "axemu/formats.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "axemu/error.hpp"

namespace axemu {

using nlohmann::json;

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_f32(Bytes& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

[[noreturn]] void size_error(std::string_view what, std::size_t expected, std::size_t actual) {
  std::ostringstream os;
  os << what << ": expected " << expected << " bytes, got " << actual;
  fail(ErrorCode::kFormat, os.str());
}

void check_magic(std::span<const std::uint8_t> bytes, std::string_view magic, std::string_view what) {
  if (bytes.size() < magic.size() || std::memcmp(bytes.data(), magic.data(), magic.size()) != 0)
    fail(ErrorCode::kFormat, std::string(what) + ": bad magic, expected \"" + std::string(magic) + "\"");
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "short write to '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Tensors

Bytes encode_tensor(const Tensor4& t) {
  Bytes out;
  out.reserve(kTensorHeaderBytes + static_cast<std::size_t>(t.size()) * 4);
  out.insert(out.end(), {'A', 'X', 'T', '1'});
  out.push_back(static_cast<std::uint8_t>(t.layout()));
  out.insert(out.end(), 3, 0);
  for (auto extent : t.shape()) {
    if (extent > 0xFFFFFFFFll) fail(ErrorCode::kFormat, "tensor extent does not fit 32 bits");
    put_u32(out, static_cast<std::uint32_t>(extent));
  }
  for (float v : t.data()) put_f32(out, v);
  return out;
}

Tensor4 decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kTensorHeaderBytes) size_error("tensor header", kTensorHeaderBytes, bytes.size());
  check_magic(bytes, "AXT1", "tensor file");
  if (bytes[4] > 1) fail(ErrorCode::kFormat, "tensor file: unknown layout byte " + std::to_string(bytes[4]));
  const auto layout = static_cast<Layout>(bytes[4]);
  Shape4 shape{};
  for (int i = 0; i < 4; ++i) shape[i] = get_u32(bytes.data() + 8 + 4 * i);
  const auto count = static_cast<std::size_t>(element_count(shape));
  const std::size_t expected = kTensorHeaderBytes + count * 4;
  if (bytes.size() != expected) size_error("tensor file " + shape_to_string(shape), expected, bytes.size());
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = get_f32(bytes.data() + kTensorHeaderBytes + 4 * i);
  return Tensor4(shape, layout, std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor4& t) { write_file(path, encode_tensor(t)); }
Tensor4 load_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

// ---------------------------------------------------------------------------
// Multiplier tables

Bytes encode_lut_raw(const MultLut& lut) {
  Bytes out;
  out.reserve(kLutBytes);
  for (auto word : lut.entries()) put_u16(out, word);
  return out;
}

Bytes encode_lut(const MultLut& lut) {
  Bytes out;
  out.reserve(kLutFileBytes);
  out.insert(out.end(), {'A', 'X', 'M', '1'});
  out.push_back(static_cast<std::uint8_t>(lut.mode()));
  out.push_back(0);  // operand a in the high byte
  out.insert(out.end(), 10, 0);
  const Bytes body = encode_lut_raw(lut);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

MultLut decode_lut_raw(std::span<const std::uint8_t> bytes, Signedness mode) {
  if (bytes.size() != kLutBytes) size_error("raw multiplier table", kLutBytes, bytes.size());
  std::vector<std::uint16_t> entries(kLutEntries);
  for (std::size_t i = 0; i < kLutEntries; ++i) entries[i] = get_u16(bytes.data() + 2 * i);
  return MultLut(mode, std::move(entries));
}

MultLut decode_lut(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kLutFileBytes) size_error("multiplier table file", kLutFileBytes, bytes.size());
  check_magic(bytes, "AXM1", "multiplier table file");
  if (bytes[4] > 1) fail(ErrorCode::kFormat, "multiplier table: unknown mode byte " + std::to_string(bytes[4]));
  if (bytes[5] != 0)
    fail(ErrorCode::kFormat, "multiplier table: unsupported operand order " + std::to_string(bytes[5]));
  return decode_lut_raw(bytes.subspan(kLutHeaderBytes), static_cast<Signedness>(bytes[4]));
}

void save_lut(const std::filesystem::path& path, const MultLut& lut) { write_file(path, encode_lut(lut)); }
MultLut load_lut(const std::filesystem::path& path) { return decode_lut(read_file(path)); }
void save_lut_raw(const std::filesystem::path& path, const MultLut& lut) {
  write_file(path, encode_lut_raw(lut));
}
MultLut load_lut_raw(const std::filesystem::path& path, Signedness mode) {
  return decode_lut_raw(read_file(path), mode);
}

// ---------------------------------------------------------------------------
// Models

namespace {

json blob_ref(Bytes& blob, std::span<const float> values) {
  const std::size_t offset = blob.size();
  for (float v : values) put_f32(blob, v);
  return json{{"offset", offset}, {"count", values.size()}};
}

json padding_to_json(const Padding& p) {
  switch (p.kind) {
    case PaddingKind::kValid: return "valid";
    case PaddingKind::kSame: return "same";
    case PaddingKind::kExplicit: return json::array({p.top, p.bottom, p.left, p.right});
  }
  return "valid";
}

Padding padding_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "valid") return Padding::valid();
    if (s == "same") return Padding::same();
    fail(ErrorCode::kFormat, "unknown padding '" + s + "'");
  }
  const auto v = j.get<std::vector<std::int64_t>>();
  if (v.size() != 4) fail(ErrorCode::kFormat, "explicit padding needs [top, bottom, left, right]");
  return Padding::explicit_pad(v[0], v[1], v[2], v[3]);
}

std::vector<float> read_blob(std::span<const std::uint8_t> blob, const json& ref, std::size_t expected) {
  const auto offset = ref.at("offset").get<std::size_t>();
  const auto count = ref.at("count").get<std::size_t>();
  if (count != expected) size_error("weight blob element count", expected, count);
  if (offset % 4 != 0) fail(ErrorCode::kFormat, "weight blob offset is not 4-byte aligned");
  if (offset + count * 4 > blob.size()) size_error("weight blob", offset + count * 4, blob.size());
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_f32(blob.data() + offset + 4 * i);
  return values;
}

Tensor4 read_tensor(std::span<const std::uint8_t> blob, const json& ref, Shape4 shape, Layout layout) {
  return Tensor4(shape, layout, read_blob(blob, ref, static_cast<std::size_t>(element_count(shape))));
}

}  // namespace

ModelFiles encode_model(const LayerGraph& g, const std::string& weights_name) {
  ModelFiles files;
  json nodes = json::array();
  for (const auto& node : g.nodes()) {
    json j{{"id", node.id}, {"kind", node_kind_name(node.kind)}, {"inputs", node.inputs}};
    switch (node.kind) {
      case NodeKind::kInput:
        j["shape"] = node.image_shape;
        break;
      case NodeKind::kConv2D:
      case NodeKind::kAxConv2D:
        j["strides"] = node.geometry.strides;
        j["dilations"] = node.geometry.dilations;
        j["padding"] = padding_to_json(node.geometry.padding);
        if (!node.filters.empty()) {
          j["filters"] = blob_ref(files.weights, node.filters.data());
          j["filters"]["shape"] = node.filters.shape();
        } else {
          j["filter_shape"] = node.filter_shape;
        }
        if (!node.bias.empty()) j["bias"] = blob_ref(files.weights, node.bias);
        if (node.kind == NodeKind::kAxConv2D) {
          j["filter_range"] = {node.filter_range.min, node.filter_range.max};
          j["lut"] = node.lut_name;
          j["round"] = round_mode_name(node.round);
        }
        break;
      case NodeKind::kMaxPool:
      case NodeKind::kAvgPool:
        if (node.global) {
          j["global"] = true;
        } else {
          j["window"] = node.window;
          j["strides"] = node.pool_strides;
        }
        break;
      case NodeKind::kDense:
        j["weights"] = blob_ref(files.weights, node.weights.data());
        j["weights"]["shape"] = {node.weights.dim(2), node.weights.dim(3)};
        if (!node.bias.empty()) j["bias"] = blob_ref(files.weights, node.bias);
        break;
      default:
        break;
    }
    nodes.push_back(std::move(j));
  }
  json doc{{"format", "axemu-model"},
           {"version", 1},
           {"weights", weights_name},
           {"output", g.output()},
           {"nodes", std::move(nodes)}};
  files.json = doc.dump(2) + "\n";
  return files;
}

LayerGraph decode_model(std::string_view text, std::span<const std::uint8_t> weights) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "axemu-model") fail(ErrorCode::kFormat, "not an axemu-model document");
    if (doc.value("version", 0) != 1) fail(ErrorCode::kFormat, "unsupported model version");

    std::vector<Node> nodes;
    for (const auto& j : doc.at("nodes")) {
      Node node;
      node.id = j.at("id").get<std::string>();
      node.kind = parse_node_kind(j.at("kind").get<std::string>());
      node.inputs = j.value("inputs", std::vector<std::string>{});
      switch (node.kind) {
        case NodeKind::kInput:
          node.image_shape = j.at("shape").get<std::array<std::int64_t, 3>>();
          break;
        case NodeKind::kConv2D:
        case NodeKind::kAxConv2D: {
          node.geometry.strides = j.value("strides", std::array<std::int64_t, 2>{1, 1});
          node.geometry.dilations = j.value("dilations", std::array<std::int64_t, 2>{1, 1});
          node.geometry.padding = padding_from_json(j.value("padding", json("valid")));
          if (j.contains("filters")) {
            const auto shape = j.at("filters").at("shape").get<Shape4>();
            node.filters = read_tensor(weights, j.at("filters"), shape, Layout::kHWCN);
            node.filter_shape = shape;
          } else {
            node.filter_shape = j.at("filter_shape").get<Shape4>();
          }
          if (j.contains("bias")) node.bias = read_blob(weights, j.at("bias"), static_cast<std::size_t>(node.filter_shape[3]));
          if (node.kind == NodeKind::kAxConv2D) {
            const auto r = j.at("filter_range").get<std::array<double, 2>>();
            node.filter_range = {r[0], r[1]};
            node.lut_name = j.at("lut").get<std::string>();
            node.round = parse_round_mode(j.value("round", "half_away_from_zero"));
          }
          break;
        }
        case NodeKind::kMaxPool:
        case NodeKind::kAvgPool:
          node.global = j.value("global", false);
          if (!node.global) {
            node.window = j.at("window").get<std::array<std::int64_t, 2>>();
            node.pool_strides = j.value("strides", node.window);
          }
          break;
        case NodeKind::kDense: {
          const auto wshape = j.at("weights").at("shape").get<std::array<std::int64_t, 2>>();
          node.weights = read_tensor(weights, j.at("weights"), {1, 1, wshape[0], wshape[1]}, Layout::kHWCN);
          if (j.contains("bias")) node.bias = read_blob(weights, j.at("bias"), static_cast<std::size_t>(wshape[1]));
          break;
        }
        default:
          break;
      }
      nodes.push_back(std::move(node));
    }
    return LayerGraph(std::move(nodes), doc.at("output").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const LayerGraph& g) {
  auto sidecar = path;
  sidecar.replace_extension(".bin");
  const ModelFiles files = encode_model(g, sidecar.filename().string());
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(files.json.data()), files.json.size()));
  write_file(sidecar, files.weights);
}

LayerGraph load_model(const std::filesystem::path& path) {
  const Bytes text = read_file(path);
  const std::string_view doc(reinterpret_cast<const char*>(text.data()), text.size());
  std::string weights_name;
  try {
    weights_name = json::parse(doc).at("weights").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, "model '" + path.string() + "': " + e.what());
  }
  const Bytes weights = read_file(path.parent_path() / weights_name);
  return decode_model(doc, weights);
}

// ---------------------------------------------------------------------------
// CIFAR-10

Cifar10Batch decode_cifar10(std::span<const std::uint8_t> bytes, std::int64_t max_images) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    const std::size_t records = bytes.size() / kCifarRecordBytes + 1;
    size_error("CIFAR-10 batch (multiple of 3073)", records * kCifarRecordBytes, bytes.size());
  }
  auto n = static_cast<std::int64_t>(bytes.size() / kCifarRecordBytes);
  if (n > 10000) fail(ErrorCode::kFormat, "CIFAR-10 batch holds more than 10000 records");
  if (max_images >= 0) n = std::min(n, max_images);

  Cifar10Batch batch;
  batch.images = Tensor4({n, 32, 32, 3}, Layout::kNHWC);
  batch.labels.resize(static_cast<std::size_t>(n));
  constexpr std::size_t kPlane = 32 * 32;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint8_t* record = bytes.data() + static_cast<std::size_t>(i) * kCifarRecordBytes;
    if (record[0] > 9) fail(ErrorCode::kFormat, "CIFAR-10 label out of range in record " + std::to_string(i));
    batch.labels[static_cast<std::size_t>(i)] = record[0];
    for (std::size_t p = 0; p < kPlane; ++p)
      for (std::size_t c = 0; c < 3; ++c)
        batch.images.at(i, static_cast<std::int64_t>(p / 32), static_cast<std::int64_t>(p % 32),
                        static_cast<std::int64_t>(c)) =
            static_cast<float>(record[1 + c * kPlane + p]) / 255.0f;
  }
  return batch;
}

Cifar10Batch load_cifar10(const std::filesystem::path& path, std::int64_t max_images) {
  return decode_cifar10(read_file(path), max_images);
}

Bytes encode_cifar10(const Cifar10Batch& batch) {
  const auto& img = batch.images;
  if (img.dim(1) != 32 || img.dim(2) != 32 || img.dim(3) != 3 ||
      static_cast<std::int64_t>(batch.labels.size()) != img.dim(0))
    fail(ErrorCode::kShapeMismatch, "CIFAR-10 batch must be (n,32,32,3) with n labels");
  Bytes out;
  out.reserve(static_cast<std::size_t>(img.dim(0)) * kCifarRecordBytes);
  for (std::int64_t i = 0; i < img.dim(0); ++i) {
    out.push_back(static_cast<std::uint8_t>(batch.labels[static_cast<std::size_t>(i)]));
    for (std::int64_t c = 0; c < 3; ++c)
      for (std::int64_t h = 0; h < 32; ++h)
        for (std::int64_t w = 0; w < 32; ++w) {
          const float v = std::clamp(img.at(i, h, w, c), 0.0f, 1.0f);
          out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
        }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string save_report(const RunReport& r) {
  json phases = json::object();
  for (const auto& [name, p] : r.phase_breakdown) phases[name] = {{"seconds", p.seconds}, {"percent", p.percent}};
  json layers = json::array();
  for (const auto& l : r.per_layer) layers.push_back({{"id", l.id}, {"kind", l.kind}, {"seconds", l.seconds}});
  json doc{{"format", "axemu-report"}, {"version", 1},        {"model", r.model},
           {"engine", r.engine},       {"lut", r.lut},        {"images", r.images},
           {"batches", r.batches},     {"workers", r.workers}, {"t_init", r.t_init},
           {"t_comp", r.t_comp},       {"total", r.total()},  {"mac_count", r.mac_count},
           {"phase_breakdown", std::move(phases)},            {"per_layer", std::move(layers)}};
  return doc.dump(2) + "\n";
}

RunReport load_report(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != "axemu-report") fail(ErrorCode::kFormat, "not an axemu-report document");
    RunReport r;
    r.model = doc.at("model").get<std::string>();
    r.engine = doc.at("engine").get<std::string>();
    r.lut = doc.at("lut").get<std::string>();
    r.images = doc.at("images").get<std::int64_t>();
    r.batches = doc.at("batches").get<std::int64_t>();
    r.workers = doc.at("workers").get<int>();
    r.t_init = doc.at("t_init").get<double>();
    r.t_comp = doc.at("t_comp").get<double>();
    r.mac_count = doc.at("mac_count").get<std::int64_t>();
    if (r.t_init < 0.0 || r.t_comp < 0.0) fail(ErrorCode::kFormat, "report times must be non-negative");
    double percent_total = 0.0;
    for (const auto& [name, p] : doc.at("phase_breakdown").items()) {
      r.phase_breakdown[name] = {p.at("seconds").get<double>(), p.at("percent").get<double>()};
      percent_total += r.phase_breakdown[name].percent;
    }
    if (!r.phase_breakdown.empty() && std::abs(percent_total - 100.0) > 0.5)
      fail(ErrorCode::kFormat, "phase percentages sum to " + std::to_string(percent_total));
    for (const auto& l : doc.at("per_layer"))
      r.per_layer.push_back({l.at("id").get<std::string>(), l.at("kind").get<std::string>(),
                             l.at("seconds").get<double>()});
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("malformed report: ") + e.what());
  }
}

void save_report_file(const std::filesystem::path& path, const RunReport& report) {
  const std::string text = save_report(report);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RunReport load_report_file(const std::filesystem::path& path) {
  const Bytes text = read_file(path);
  return load_report(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
}

std::string report_csv(const RunReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "section,name,seconds,percent\n";
  os << "summary,t_init," << r.t_init << ",\n";
  os << "summary,t_comp," << r.t_comp << ",\n";
  os << "summary,total," << r.total() << ",\n";
  os << "summary,mac_count," << r.mac_count << ",\n";
  for (const auto& [name, p] : r.phase_breakdown) os << "phase," << name << ',' << p.seconds << ',' << p.percent << '\n';
  for (const auto& l : r.per_layer) os << "layer," << l.id << ',' << l.seconds << ",\n";
  return os.str();
}

std::string report_summary(const RunReport& r) {
  std::ostringstream os;
  os << "t_init + t_comp = " << r.t_init << " + " << r.t_comp << " = " << r.total() << " s";
  return os.str();
}

}  // namespace axemu
