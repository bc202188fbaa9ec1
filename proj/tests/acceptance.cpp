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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
// Dataset: $AXEMU_CIFAR10 (a CIFAR-10 binary batch) when set, otherwise the
// synthetic CIFAR-format batch under data/.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "axemu/axconv.hpp"
#include "axemu/bench.hpp"
#include "axemu/error.hpp"
#include "axemu/formats.hpp"
#include "axemu/graph.hpp"
#include "axemu/layers.hpp"
#include "axemu/stopwatch.hpp"
#include "axemu/zoo.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace axemu;

namespace {

const fs::path kRoot = AXEMU_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int g_failures = 0;

void criterion(int id, const char* title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  Stopwatch watch;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  if (!o.pass) ++g_failures;
  std::printf("criterion %d %s: %s;%s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title,
              o.detail.str().c_str(), watch.seconds());
  std::fflush(stdout);
}

Cifar10Batch dataset(std::string* name) {
  if (const char* env = std::getenv("AXEMU_CIFAR10"); env && *env) {
    *name = env;
    return load_cifar10(env, 1000);
  }
  *name = "synthetic CIFAR-format batch";
  return load_cifar10(kRoot / "data" / "synthetic_test_batch.bin", 1000);
}

double agreement(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

void oracle_equivalence(Outcome& o) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> batch(1, 4), spatial(1, 8), chans(1, 4), kernel(1, 3), workers(1, 8),
      chunk(1, 5);
  std::uniform_real_distribution<double> scale(0.5, 2.0), shift(-0.5, 0.5);
  Stopwatch watch;
  int identical = 0, total = 0;
  while (total < 100) {
    const ConvGeometry g = testing::random_geometry(rng);
    const Shape4 in{batch(rng), spatial(rng), spatial(rng), chans(rng)};
    const Shape4 f{kernel(rng), kernel(rng), in[3], chans(rng)};
    try {
      plan_conv(in, f, g);
    } catch (const Error&) {
      continue;
    }
    const Tensor4 x = testing::random_tensor(in, Layout::kNHWC, rng, -1.0f, 1.5f);
    const Tensor4 w = testing::random_tensor(f, Layout::kHWCN, rng, -0.8f, 0.8f);
    // Ranges drawn independently of the data, so clamping is exercised too.
    const double a = shift(rng), b = a + scale(rng);
    const Range ir{a, b}, fr{-scale(rng) / 2, scale(rng) / 2};
    const MultLut lut = testing::random_lut(total % 2 ? Signedness::kSigned : Signedness::kUnsigned, rng);
    ConvConfig cfg;
    cfg.geometry = g;
    const Tensor4 want = direct_conv(x, w, ir, fr, lut, cfg);
    cfg.workers = workers(rng);
    cfg.chunk_size = chunk(rng);
    identical += axconv2d(x, w, ir, fr, lut, cfg) == want;
    ++total;
  }
  const double seconds = watch.seconds();
  o.detail << " " << identical << "/" << total << " instances bit-identical in " << seconds << " s";
  o.require(identical == total, "all instances identical");
  o.require(seconds < 60.0, "runtime < 60 s");
}

void regrouping(Outcome& o) {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int zero_zp = 0, nonzero_zp = 0;
  for (int i = 0; i < 20; ++i) {
    const Signedness mode = i % 2 ? Signedness::kSigned : Signedness::kUnsigned;
    // Non-negative operands put both zero-points at the lowest code; negative ones shift them.
    const bool shifted = i % 4 >= 2;
    const Tensor4 x = testing::random_tensor({2, 6, 6, 3}, Layout::kNHWC, rng, shifted ? -0.7f : 0.0f, 1.3f);
    const Tensor4 w = testing::random_tensor({3, 3, 3, 4}, Layout::kHWCN, rng, shifted ? -0.5f : 0.0f, 0.9f);
    const Range ir = tensor_min_max(x), fr = tensor_min_max(w);
    const auto c1 = testing::oracle_coeffs(ir.min, ir.max, mode);
    const auto c2 = testing::oracle_coeffs(fr.min, fr.max, mode);
    const long long base = mode == Signedness::kSigned ? -128 : 0;
    (c1.beta == base && c2.beta == base ? zero_zp : nonzero_zp)++;
    ConvConfig cfg;
    cfg.geometry = i % 3 ? ConvGeometry{} : ConvGeometry{{2, 1}, {1, 1}, Padding::same()};
    const auto ref = testing::reference_conv(
        x.shape(), w.shape(), cfg.geometry,
        [&](auto n, auto h, auto ww, auto c) { return testing::oracle_fake_quant(x.at(n, h, ww, c), c1); },
        [&](auto h, auto ww, auto c, auto k) { return testing::oracle_fake_quant(w.at(h, ww, c, k), c2); });
    const Tensor4 got = axconv2d(x, w, ir, fr, exact_lut(mode), cfg);
    double scale = 0.0;
    for (double v : ref.values) scale = std::max(scale, std::abs(v));
    for (std::int64_t k = 0; k < got.size(); ++k) {
      const auto idx = got.unflatten(k);
      worst = std::max(worst, testing::rel_error(got.data()[k], ref.at(idx[0], idx[1], idx[2], idx[3]), 1e-3 * scale));
    }
  }
  o.detail << " 20 instances (" << zero_zp << " at the mode's lowest zero-point, " << nonzero_zp
           << " shifted), worst relative error " << worst;
  o.require(worst <= 1e-3, "relative error <= 1e-3");
}

void quantizer_suite(Outcome& o) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> end(-20.0, 20.0);
  int combos = 0;
  long long checked = 0;
  for (Signedness mode : {Signedness::kUnsigned, Signedness::kSigned})
    for (RoundMode round : {RoundMode::kHalfAwayFromZero, RoundMode::kHalfToEven, RoundMode::kHalfTowardZero}) {
      bool zero_ok = true, idem_ok = true, mono_ok = true, bound_ok = true;
      for (int trial = 0; trial < 10; ++trial) {
        double a = end(rng), b = end(rng);
        if (a > b) std::swap(a, b);
        if (trial == 0) a = b = 0.0;
        const QuantParams p = compute_coeffs({a, b}, mode, round);
        const double z = p.dequantize(p.quantize(0.0));
        zero_ok &= z == 0.0 && !std::signbit(z);
        for (int c = p.lo(); c <= p.hi(); ++c) idem_ok &= p.quantize(p.dequantize(c)) == c;
        std::uniform_real_distribution<double> in(p.dequantize(p.lo()), p.dequantize(p.hi()));
        std::vector<double> v(10000);
        for (double& r : v) r = in(rng);
        std::sort(v.begin(), v.end());
        int prev = p.lo();
        for (double r : v) {
          const int c = p.quantize(r);
          mono_ok &= c >= prev;
          prev = c;
          bound_ok &= std::abs(p.dequantize(c) - r) <= p.alpha / 2 * (1 + 1e-12);
          ++checked;
        }
      }
      const std::string name = std::string(signedness_name(mode)) + "/" + std::string(round_mode_name(round));
      o.require(zero_ok, name + " zero-exactness");
      o.require(idem_ok, name + " idempotence");
      o.require(mono_ok, name + " monotonicity");
      o.require(bound_ok, name + " round-trip bound");
      ++combos;
    }
  o.detail << " " << combos << " mode/round combinations, " << checked
           << " random values, 256-code idempotence per range";
}

void lut_suite(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / "axemu_acceptance";
  fs::create_directories(dir);
  long long mismatches = 0;
  for (Signedness mode : {Signedness::kUnsigned, Signedness::kSigned}) {
    const MultLut lut = exact_lut(mode);
    for (int a = code_min(mode); a <= code_max(mode); ++a)
      for (int b = code_min(mode); b <= code_max(mode); ++b)
        mismatches += lut.lookup(code_byte(a), code_byte(b)) != a * b;
    const fs::path headered = dir / (std::string(signedness_name(mode)) + ".axm");
    const fs::path raw = dir / (std::string(signedness_name(mode)) + ".raw");
    save_lut(headered, lut);
    save_lut_raw(raw, lut);
    o.require(fs::file_size(headered) == 131088, "headered size 131088");
    o.require(fs::file_size(raw) == 131072, "raw size 131072");
    o.require(encode_lut(load_lut(headered)) == read_file(headered), "headered round-trip bytes");
    o.require(encode_lut_raw(load_lut_raw(raw, mode)) == read_file(raw), "raw round-trip bytes");
    o.require(load_lut(headered) == lut && load_lut_raw(raw, mode) == lut, "round-trip tables");
  }
  o.detail << " 2 x 65536 exact products checked, " << mismatches << " mismatches; file sizes 131088 / 131072";
  o.require(mismatches == 0, "exact products");
}

void determinism(Outcome& o) {
  std::mt19937_64 rng(5);
  const Tensor4 x = testing::random_tensor({16, 12, 12, 4}, Layout::kNHWC, rng, -0.3f, 1.0f);
  const Tensor4 w = testing::random_tensor({3, 3, 4, 6}, Layout::kHWCN, rng);
  const MultLut lut = testing::random_lut(Signedness::kSigned, rng);
  const auto graph = transform(make_resnet8_style(8, 11), std::make_shared<const MultLut>(truncated_lut(Signedness::kUnsigned, 2))).first;
  const Tensor4 images = testing::random_tensor({16, 32, 32, 3}, Layout::kNHWC, rng, 0.0f, 1.0f);
  ConvConfig cfg;
  cfg.geometry = {{1, 1}, {1, 1}, Padding::same()};
  const Tensor4 conv_ref = direct_conv(x, w, tensor_min_max(x), tensor_min_max(w), lut, cfg);
  RunOptions ropts;
  ropts.conv.chunk_size = 64;
  const Tensor4 graph_ref = run(graph, images, ropts);
  int configs = 0, identical = 0;
  for (int workers : {1, 2, 8})
    for (std::int64_t chunk : {1, 7, 64}) {
      cfg.workers = workers;
      cfg.chunk_size = chunk;
      ropts.conv.workers = workers;
      ropts.conv.chunk_size = chunk;
      ropts.workers = workers;
      const bool same = axconv2d(x, w, tensor_min_max(x), tensor_min_max(w), lut, cfg) == conv_ref &&
                        run(graph, images, ropts) == graph_ref;
      identical += same;
      ++configs;
    }
  o.detail << " " << identical << "/" << configs << " worker/chunk configurations bit-identical (conv and 7-conv graph)";
  o.require(identical == configs, "all configurations identical");
}

void graph_transform(Outcome& o, const Cifar10Batch& data) {
  const LayerGraph g = load_model(kRoot / "models" / "small_resnet8.json");
  const auto lut = std::make_shared<const MultLut>(exact_lut(Signedness::kUnsigned));
  const auto [t, report] = transform(g, lut);
  o.detail << " replaced_count=" << report.replaced_count << " inserted_min_max=" << report.inserted_min_max;
  o.require(report.replaced_count == 7, "replaced_count == 7");
  o.require(report.inserted_min_max == 14, "inserted_min_max == 14");

  const Tensor4 batch = data.images.slice_batch(0, 100);
  RunOptions opts;
  opts.keep_activations = true;
  RunTrace trace;
  run(g, batch, opts, &trace);
  double worst_ratio = 0.0;
  for (const Node& ax : t.nodes()) {
    if (ax.kind != NodeKind::kAxConv2D) continue;
    const Tensor4& x = trace.activations.at(ax.inputs[0]);
    const Tensor4& want = trace.activations.at(ax.id);
    const Range xr = tensor_min_max(x);
    const double a1 = compute_coeffs(xr, lut->mode()).alpha;
    const double a2 = compute_coeffs(ax.filter_range, lut->mode()).alpha;
    ConvConfig cfg;
    cfg.geometry = ax.geometry;
    Tensor4 got = axconv2d(x, ax.filters, xr, ax.filter_range, *lut, cfg);
    layers::add_bias(got, ax.bias);
    // Per output: sum over real taps of a1/2 |w| + a2/2 |x| + a1 a2 / 4, plus float32 slack.
    const auto x_term = testing::reference_conv(
        x.shape(), ax.filters.shape(), ax.geometry,
        [&](auto n, auto h, auto w, auto c) { return a2 / 2 * std::abs(x.at(n, h, w, c)); }, [](auto...) { return 1.0; });
    const auto w_term = testing::reference_conv(
        x.shape(), ax.filters.shape(), ax.geometry, [](auto...) { return 1.0; },
        [&](auto h, auto w, auto c, auto k) { return a1 / 2 * std::abs(ax.filters.at(h, w, c, k)) + a1 * a2 / 4; });
    const auto mag = testing::reference_conv(
        x.shape(), ax.filters.shape(), ax.geometry,
        [&](auto n, auto h, auto w, auto c) { return std::abs(static_cast<double>(x.at(n, h, w, c))); },
        [&](auto h, auto w, auto c, auto k) { return std::abs(static_cast<double>(ax.filters.at(h, w, c, k))); });
    for (std::int64_t i = 0; i < got.size(); ++i) {
      const auto ix = got.unflatten(i);
      const double bound = x_term.at(ix[0], ix[1], ix[2], ix[3]) + w_term.at(ix[0], ix[1], ix[2], ix[3]) +
                           1e-5 * mag.at(ix[0], ix[1], ix[2], ix[3]) + 1e-6;
      worst_ratio = std::max(worst_ratio, std::abs(static_cast<double>(got.data()[i]) - want.data()[i]) / bound);
    }
  }
  o.detail << "; per-layer error / propagated bound, worst " << worst_ratio << " over 100 images";
  o.require(worst_ratio <= 1.0, "per-layer bound");
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

void linear_scaling(Outcome& o, const Cifar10Batch& data) {
  const auto lut = std::make_shared<const MultLut>(exact_lut(Signedness::kUnsigned));
  BenchOptions opts;
  opts.workers = 8;
  opts.keep_outputs = false;
  std::vector<double> macs, tcomp;
  double phase_error = 0.0;
  RunReport smallest;
  for (int layers : {2, 4, 8}) {
    const LayerGraph g = make_conv_stack(layers, 8, 1);
    double best = 1e30;
    for (int rep = 0; rep < 2; ++rep) {
      const BenchResult r = bench(g, data.images, lut, opts);
      best = std::min(best, r.report.t_comp);
      double sum = 0.0;
      for (const auto& [name, p] : r.report.phase_breakdown) sum += p.percent;
      phase_error = std::max(phase_error, std::abs(sum - 100.0));
      if (layers == 2) smallest = r.report;
      macs.push_back(static_cast<double>(r.report.mac_count));
    }
    tcomp.push_back(best);
    macs.resize(tcomp.size());
  }
  const double r2 = r_squared(macs, tcomp);
  o.detail << " MACs " << macs[0] << " : " << macs[1] << " : " << macs[2] << " (ratio 1 : " << macs[1] / macs[0]
           << " : " << macs[2] / macs[0] << "), t_comp " << tcomp[0] << " / " << tcomp[1] << " / " << tcomp[2]
           << " s, R^2 = " << r2;
  o.require(r2 >= 0.95, "R^2 >= 0.95");

  BenchOptions direct = opts;
  direct.engine = ConvEngine::kDirect;
  direct.workers = 1;
  const BenchResult d = bench(make_conv_stack(2, 8, 1), data.images, lut, direct);
  const double gain = d.report.t_comp / tcomp[0];
  o.detail << "; gemm (8 workers, " << std::thread::hardware_concurrency() << " hardware threads) vs direct "
           << "(1 thread): " << tcomp[0] << " s vs " << d.report.t_comp << " s = " << gain << "x";
  o.require(gain >= 5.0, "gemm >= 5x direct");
  o.detail << "; phase breakdown sums to 100% within " << phase_error;
  o.require(phase_error < 1e-6, "phases sum to 100%");
}

void end_to_end(Outcome& o, const Cifar10Batch& data) {
  Stopwatch wall;
  const LayerGraph g = load_model(kRoot / "models" / "small_resnet8.json");
  BenchOptions opts;
  opts.workers = 8;
  const auto exact = std::make_shared<const MultLut>(exact_lut(Signedness::kUnsigned));
  const auto trunc = std::make_shared<const MultLut>(truncated_lut(Signedness::kUnsigned, 6));
  const auto transformed = transform(g, exact).first;
  const std::vector<int> ref = layers::argmax_rows(bench(g, data.images, nullptr, opts).outputs);
  const BenchResult ex = bench(transformed, data.images, exact, opts);
  const BenchResult tr = bench(g, data.images, trunc, opts);
  const double a_exact = agreement(layers::argmax_rows(ex.outputs), ref);
  const double a_trunc = agreement(layers::argmax_rows(tr.outputs), ref);
  const double seconds = wall.seconds();
  o.detail << " " << data.images.dim(0) << " images, exact-table top-1 agreement " << a_exact
           << ", truncated(6) agreement " << a_trunc << ", " << report_summary(ex.report)
           << ", wall " << seconds << " s";
  o.require(data.images.dim(0) == 1000, "1000 images");
  o.require(a_exact >= 0.99, "exact agreement >= 0.99");
  o.require(a_trunc < a_exact, "truncated agreement strictly lower");
  o.require(seconds < 300.0, "< 5 minutes");
}

}  // namespace

int main() {
  std::string name;
  const Cifar10Batch data = dataset(&name);
  std::printf("dataset: %s (%lld images)\n", name.c_str(), static_cast<long long>(data.images.dim(0)));

  criterion(1, "oracle equivalence (gemm vs direct, 100 random instances)", oracle_equivalence);
  criterion(2, "correction-term regrouping vs float64 conv (20 instances, 1e-3)", regrouping);
  criterion(3, "quantizer suite", quantizer_suite);
  criterion(4, "multiplier table suite", lut_suite);
  criterion(5, "determinism across workers {1,2,8} and chunk sizes {1,7,64}", determinism);
  criterion(6, "graph transform on the 7-conv model", [&](Outcome& o) { graph_transform(o, data); });
  criterion(7, "linear scaling and engine speedup", [&](Outcome& o) { linear_scaling(o, data); });
  criterion(8, "end-to-end smoke on the pretrained model", [&](Outcome& o) { end_to_end(o, data); });

  std::printf("%d of 8 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
