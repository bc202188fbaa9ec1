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

// axemu command-line front end.
//
//   axemu gen-lut    --mode unsigned --truncate 2 -o trunc2.axm
//   axemu lut-stats  trunc2.axm
//   axemu transform  model.json --lut trunc2.axm -o model_ax.json
//   axemu run        model.json --cifar test_batch.bin --lut trunc2.axm --compare-accurate
//   axemu bench      model.json --cifar test_batch.bin --lut trunc2.axm --report r.json
//
// Results go to stdout, progress to stderr. Failures print a single
// "axemu: error: code=<code> message=<quoted text>" line and exit nonzero.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "axemu/axmult.hpp"
#include "axemu/bench.hpp"
#include "axemu/error.hpp"
#include "axemu/formats.hpp"
#include "axemu/graph.hpp"
#include "axemu/layers.hpp"
#include "axemu/parallel.hpp"
#include "axemu/stopwatch.hpp"
#include "axemu/zoo.hpp"

namespace fs = std::filesystem;
using namespace axemu;

namespace {

bool g_quiet = false;

void log(const std::string& line) {
  if (!g_quiet) std::cerr << "axemu: " << line << '\n';
}

std::string quoted(const std::string& s) {
  std::ostringstream os;
  os << std::quoted(s);
  return os.str();
}

// "zoo:resnet8[:width]", "zoo:stack:<layers>[:width]" and "zoo:single" build
// graphs in memory; anything else is a model file.
LayerGraph resolve_model(const std::string& source, std::uint64_t seed) {
  if (source.rfind("zoo:", 0) != 0) return load_model(source);
  std::vector<std::string> parts;
  std::stringstream ss(source.substr(4));
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto num = [&](std::size_t i, std::int64_t fallback) {
    return i < parts.size() ? std::stoll(parts[i]) : fallback;
  };
  if (!parts.empty() && parts[0] == "resnet8") return make_resnet8_style(num(1, 16), seed);
  if (!parts.empty() && parts[0] == "stack") return make_conv_stack(static_cast<int>(num(1, 2)), num(2, 8), seed);
  if (!parts.empty() && parts[0] == "single") return make_single_conv(32, 32, 3, num(1, 8), 3, seed);
  fail(ErrorCode::kInvalidArgument, "unknown built-in model '" + source + "'");
}

// Headered file, raw file (needs `mode`), or "exact" / "truncated:<bits>".
std::shared_ptr<const MultLut> resolve_lut(const std::string& source, Signedness mode) {
  if (source == "exact") return std::make_shared<const MultLut>(exact_lut(mode));
  if (source.rfind("truncated:", 0) == 0)
    return std::make_shared<const MultLut>(truncated_lut(mode, std::stoi(source.substr(10))));
  if (fs::exists(source) && fs::file_size(source) == kLutBytes)
    return std::make_shared<const MultLut>(load_lut_raw(source, mode));
  return std::make_shared<const MultLut>(load_lut(source));
}

struct Dataset {
  Tensor4 images;
  std::vector<int> labels;
  std::string name;
};

Dataset resolve_dataset(const std::string& cifar, const std::string& input, std::int64_t limit,
                        std::int64_t synthetic, std::uint64_t seed, const LayerGraph& model) {
  if (!cifar.empty()) {
    Cifar10Batch b = load_cifar10(cifar, limit);
    return {std::move(b.images), std::move(b.labels), fs::path(cifar).filename().string()};
  }
  if (!input.empty()) {
    Tensor4 t = load_tensor(input);
    if (limit >= 0 && limit < t.dim(0)) t = t.slice_batch(0, limit);
    return {std::move(t), {}, fs::path(input).filename().string()};
  }
  const Node& in = model.nodes().front();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> pixel(0.0f, 1.0f);
  Tensor4 t({synthetic, in.image_shape[0], in.image_shape[1], in.image_shape[2]}, Layout::kNHWC);
  for (float& v : t.data()) v = pixel(rng);
  return {std::move(t), {}, "random(seed=" + std::to_string(seed) + ")"};
}

double agreement(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return a.empty() ? 0.0 : static_cast<double>(same) / static_cast<double>(a.size());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Options shared by run and bench.
struct ExecOptions {
  std::string model;
  std::string lut;
  std::string mode = "unsigned";
  std::string engine = "gemm";
  std::string accumulator = "exact64";
  std::string round = "half_away_from_zero";
  std::string cifar;
  std::string input;
  std::int64_t limit = -1;
  std::int64_t synthetic = 100;
  std::int64_t chunk_size = 64;
  std::int64_t batch_size = 100;
  int workers = default_workers();
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("model", model, "Model file or zoo:<name>")->required();
    app->add_option("--lut", lut, "Multiplier table file, 'exact' or 'truncated:<bits>'; omit for float");
    app->add_option("--mode", mode, "Signedness for raw or built-in tables")
        ->check(CLI::IsMember({"unsigned", "signed"}));
    app->add_option("--engine", engine, "Approximate convolution engine")
        ->check(CLI::IsMember({"gemm", "direct"}));
    app->add_option("--accumulator", accumulator, "Accumulator width")
        ->check(CLI::IsMember({"exact64", "wrap32", "saturate32"}));
    app->add_option("--round", round, "Round mode for transformed layers")
        ->check(CLI::IsMember({"half_away_from_zero", "half_to_even", "half_toward_zero"}));
    auto* cifar_opt = app->add_option("--cifar", cifar, "CIFAR-10 binary batch")->check(CLI::ExistingFile);
    app->add_option("--input", input, "Input tensor file (NHWC)")->check(CLI::ExistingFile)->excludes(cifar_opt);
    app->add_option("--limit", limit, "Use at most this many images");
    app->add_option("--images", synthetic, "Random images when no dataset is given")->check(CLI::PositiveNumber);
    app->add_option("--chunk-size", chunk_size, "Images per im2cols chunk")->check(CLI::PositiveNumber);
    app->add_option("--batch-size", batch_size, "Images per inference batch")->check(CLI::PositiveNumber);
    app->add_option("--workers", workers, "Worker threads (default: AXEMU_WORKERS or core count)")
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Seed for built-in models and random inputs");
  }

  std::shared_ptr<const MultLut> table() const {
    return lut.empty() ? nullptr : resolve_lut(lut, parse_signedness(mode));
  }

  BenchOptions bench_options() const {
    BenchOptions o;
    o.engine = parse_engine(engine);
    o.workers = workers;
    o.chunk_size = chunk_size;
    o.accumulator = parse_accumulator(accumulator);
    o.round = parse_round_mode(round);
    o.batch_size = batch_size;
    return o;
  }
};

int cmd_gen_lut(const std::string& mode, int truncate, bool raw, const std::string& out) {
  const Signedness m = parse_signedness(mode);
  const MultLut lut = truncate > 0 ? truncated_lut(m, truncate) : exact_lut(m);
  if (raw)
    save_lut_raw(out, lut);
  else
    save_lut(out, lut);
  std::cout << out << ": " << fs::file_size(out) << " bytes, " << mode << ", "
            << (truncate > 0 ? "truncated " + std::to_string(truncate) + " bits" : std::string("exact")) << '\n';
  return 0;
}

int cmd_lut_stats(const std::string& path, const std::string& mode) {
  const auto lut = resolve_lut(path, parse_signedness(mode));
  const LutErrorStats s = error_stats(*lut);
  std::cout << "mode=" << signedness_name(lut->mode()) << '\n'
            << "max_abs_error=" << s.max_abs_error << '\n'
            << "mean_abs_error=" << s.mean_abs_error << '\n'
            << "mean_rel_error=" << s.mean_rel_error << '\n'
            << "error_count=" << s.error_count << '\n';
  return 0;
}

int cmd_transform(const std::string& model_arg, const std::string& lut_arg, const std::string& mode,
                  const std::string& round, const std::string& out, std::uint64_t seed) {
  const LayerGraph g = resolve_model(model_arg, seed);
  TransformOptions opts;
  opts.round = parse_round_mode(round);
  opts.lut_name = lut_arg;
  const auto [t, report] = transform(g, resolve_lut(lut_arg, parse_signedness(mode)), opts);
  if (!out.empty()) save_model(out, t);
  std::cout << report.replaced_count << (report.replaced_count == 1 ? " layer" : " layers") << " replaced, "
            << report.inserted_min_max << (report.inserted_min_max == 1 ? " range node" : " range nodes")
            << " inserted\n";
  std::cout << "untouched kinds:";
  for (NodeKind k : report.untouched_kinds) std::cout << ' ' << node_kind_name(k);
  std::cout << '\n';
  return 0;
}

int cmd_run(const ExecOptions& o, const std::string& out, const std::string& labels_out, bool compare) {
  const LayerGraph model = resolve_model(o.model, o.seed);
  const Dataset data = resolve_dataset(o.cifar, o.input, o.limit, o.synthetic, o.seed, model);
  const auto lut = o.table();
  BenchOptions bo = o.bench_options();
  bo.collect_timing = false;
  log("running " + std::to_string(data.images.dim(0)) + " images from " + data.name);
  const BenchResult approx = bench(model, data.images, lut, bo);
  const std::vector<int> top1 = layers::argmax_rows(approx.outputs);
  if (!out.empty()) save_tensor(out, approx.outputs);

  std::ostringstream labels;
  for (int l : top1) labels << l << '\n';
  if (!labels_out.empty()) write_text(labels_out, labels.str());
  else if (top1.size() <= 20) std::cout << "top1:" << labels.str();

  std::cout << std::fixed << std::setprecision(4);
  if (!data.labels.empty())
    std::cout << "accuracy=" << agreement(top1, data.labels) << " (" << approx.report.engine << ")\n";
  if (compare && lut) {
    if (model.count(NodeKind::kAxConv2D) > 0)
      fail(ErrorCode::kInvalidArgument, "--compare-accurate needs an untransformed model");
    const BenchResult accurate = bench(model, data.images, nullptr, bo);
    const std::vector<int> ref = layers::argmax_rows(accurate.outputs);
    std::cout << "top1_agreement=" << agreement(top1, ref) << '\n';
    if (!data.labels.empty()) std::cout << "accuracy=" << agreement(ref, data.labels) << " (accurate)\n";
  }
  return 0;
}

int cmd_bench(const ExecOptions& o, const std::string& report_path, const std::string& csv_path,
              const std::string& baseline_path) {
  Stopwatch load;
  const LayerGraph model = resolve_model(o.model, o.seed);
  const auto lut = o.table();
  const Dataset data = resolve_dataset(o.cifar, o.input, o.limit, o.synthetic, o.seed, model);
  std::optional<RunReport> baseline;
  if (!baseline_path.empty()) baseline = load_report_file(baseline_path);
  const double preload = load.seconds();

  log("benchmarking " + std::to_string(data.images.dim(0)) + " images, engine " +
      (lut ? o.engine : std::string("accurate")) + ", " + std::to_string(o.workers) + " worker(s)");
  BenchResult r = bench(model, data.images, lut, o.bench_options(), preload);
  r.report.model = o.model;
  r.report.lut = lut ? o.lut : "none";
  if (!report_path.empty()) save_report_file(report_path, r.report);
  if (!csv_path.empty()) write_text(csv_path, report_csv(r.report));

  std::cout << report_summary(r.report) << '\n';
  std::cout << "mac_count=" << r.report.mac_count << '\n';
  for (const auto& [name, p] : r.report.phase_breakdown)
    std::cout << "phase " << name << ' ' << std::fixed << std::setprecision(4) << p.seconds << " s "
              << std::setprecision(1) << p.percent << "%\n";
  if (baseline)
    std::cout << "speedup=" << std::setprecision(2) << speedup(*baseline, r.report) << "x vs "
              << baseline->engine << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate-multiplier convolution emulator"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_quiet, "Suppress progress messages");

  auto* gen = app.add_subcommand("gen-lut", "Write a multiplier table");
  std::string gen_mode = "unsigned", gen_out;
  int truncate = 0;
  bool raw = false;
  gen->add_option("--mode", gen_mode)->check(CLI::IsMember({"unsigned", "signed"}));
  gen->add_option("--truncate", truncate, "Drop this many operand LSBs (0 = exact)")->check(CLI::Range(0, 7));
  gen->add_flag("--raw", raw, "Write the bare 131072-byte table without header");
  gen->add_option("-o,--output", gen_out)->required();

  auto* stats = app.add_subcommand("lut-stats", "Error statistics of a multiplier table");
  std::string stats_path, stats_mode = "unsigned";
  stats->add_option("lut", stats_path)->required();
  stats->add_option("--mode", stats_mode, "Signedness for raw tables")->check(CLI::IsMember({"unsigned", "signed"}));

  auto* tr = app.add_subcommand("transform", "Replace Conv2D layers by AxConv2D");
  std::string tr_model, tr_lut = "exact", tr_mode = "unsigned", tr_round = "half_away_from_zero", tr_out;
  std::uint64_t tr_seed = 0;
  tr->add_option("model", tr_model)->required();
  tr->add_option("--lut", tr_lut, "Table recorded in the model; bound again at run time");
  tr->add_option("--mode", tr_mode)->check(CLI::IsMember({"unsigned", "signed"}));
  tr->add_option("--round", tr_round)
      ->check(CLI::IsMember({"half_away_from_zero", "half_to_even", "half_toward_zero"}));
  tr->add_option("-o,--output", tr_out);
  tr->add_option("--seed", tr_seed);

  auto* run_cmd = app.add_subcommand("run", "Single forward pass over a dataset or tensor");
  ExecOptions run_opts;
  run_opts.attach(run_cmd);
  std::string run_out, run_labels;
  bool compare = false;
  run_cmd->add_option("-o,--output", run_out, "Write graph outputs as a tensor file");
  run_cmd->add_option("--labels", run_labels, "Write top-1 labels, one per line");
  run_cmd->add_flag("--compare-accurate", compare, "Also run the float graph and report top-1 agreement");

  auto* bench_cmd = app.add_subcommand("bench", "Time t_init and t_comp with a phase breakdown");
  ExecOptions bench_opts;
  bench_opts.attach(bench_cmd);
  std::string report_path, csv_path, baseline_path;
  bench_cmd->add_option("--report", report_path, "Write the JSON report");
  bench_cmd->add_option("--csv", csv_path, "Write the CSV export");
  bench_cmd->add_option("--baseline", baseline_path, "Report to compute the speedup against")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "axemu: error: code=usage message=" << quoted(e.what()) << '\n';
    return 2;
  }

  try {
    if (*gen) return cmd_gen_lut(gen_mode, truncate, raw, gen_out);
    if (*stats) return cmd_lut_stats(stats_path, stats_mode);
    if (*tr) return cmd_transform(tr_model, tr_lut, tr_mode, tr_round, tr_out, tr_seed);
    if (*run_cmd) return cmd_run(run_opts, run_out, run_labels, compare);
    if (*bench_cmd) return cmd_bench(bench_opts, report_path, csv_path, baseline_path);
  } catch (const Error& e) {
    std::cerr << "axemu: error: code=" << error_code_name(e.code()) << " message=" << quoted(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "axemu: error: code=internal message=" << quoted(e.what()) << '\n';
    return 1;
  }
  return 1;
}
