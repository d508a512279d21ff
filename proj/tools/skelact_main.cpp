// skelact: dataset conversion, synthetic data, training and evaluation.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "skelact/classifier.hpp"
#include "skelact/convert.hpp"
#include "skelact/dataset.hpp"
#include "skelact/engine.hpp"
#include "skelact/error.hpp"
#include "skelact/evaluation.hpp"
#include "skelact/features.hpp"
#include "skelact/stream.hpp"
#include "skelact/synthetic.hpp"

namespace fs = std::filesystem;
using namespace skelact;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

fs::path schema_sidecar(const fs::path& model) {
  fs::path p = model;
  p.replace_extension(".schema.json");
  return p;
}

FeatureSchema resolve_schema(const std::string& schema_path, const fs::path& model_path) {
  if (!schema_path.empty()) return load_schema(schema_path);
  const auto sidecar = schema_sidecar(model_path);
  if (!fs::exists(sidecar)) {
    throw Error(ErrorCode::kIoError, "no --schema given and " + sidecar.string() + " is missing");
  }
  return load_schema(sidecar);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

void print_report(const EvalReport& r) {
  std::printf("%s: accuracy %.4f, mean class rate %.4f over %zu sequences (%.1f frames/s)\n",
              std::string(to_string(r.mode)).c_str(), r.accuracy, r.mean_class_rate, r.sequences,
              r.frames_per_second);
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    std::printf("  %-16s %.4f (%zu)\n", r.class_names[c].c_str(), r.per_class_rate[c],
                r.per_class_count[c]);
  }
  if (!r.short_sequences.empty()) {
    std::printf("  %zu sequences were shorter than n and produced no prediction\n",
                r.short_sequences.size());
  }
}

void emit_report(const EvalReport& r, const std::string& report_path, const std::string& csv_path) {
  print_report(r);
  if (!report_path.empty()) write_text(report_path, report_to_json(r) + "\n");
  if (!csv_path.empty()) write_text(csv_path, r.confusion.to_csv(r.class_names));
}

struct EvalArgs {
  std::string manifest;
  std::string model;
  std::string schema;
  std::size_t n = 16;
  bool root_center = false;
  std::string report;
  std::string csv;
};

void add_eval_options(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--manifest", a.manifest, "Dataset manifest")->required();
  cmd->add_option("--model", a.model, "Trained model file")->required();
  cmd->add_option("--schema", a.schema, "Feature schema (default: <model>.schema.json)");
  cmd->add_option("--n", a.n, "Frames per classifier input")->capture_default_str();
  cmd->add_flag("--root-center", a.root_center, "Subtract the root joint from every frame");
  cmd->add_option("--report", a.report, "Write the JSON report here");
  cmd->add_option("--confusion", a.csv, "Write the CSV confusion matrix here");
}

int run_convert(const std::string& format, const std::string& src, const std::string& out,
                double train_fraction, std::uint64_t seed) {
  auto ds = convert_dataset(parse_source_format(format), src);
  ds.manifest.split.train_fraction = train_fraction;
  ds.manifest.split.seed = seed;
  validate_manifest(ds.manifest);
  write_dataset(ds, out);
  std::printf("wrote %zu sequences in %zu classes to %s\n", ds.sequences.size(),
              ds.manifest.class_names.size(), out.c_str());
  return 0;
}

int run_synth(const SynthConfig& cfg, const std::string& out) {
  const auto ds = generate_synthetic(cfg);
  write_dataset(ds, out);
  std::printf("wrote %zu synthetic sequences to %s\n", ds.sequences.size(), out.c_str());
  return 0;
}

struct TrainArgs {
  std::string manifest;
  std::string model;
  std::string schema;
  std::size_t n = 16;
  bool root_center = false;
  bool quiet = false;
  std::string log;
};

int run_train(const TrainArgs& a, ModelConfig mc, const TrainConfig& tc) {
  const auto ds = load_dataset(a.manifest);
  const FeatureSchema schema = a.schema.empty() ? build_schema(ds.topology) : load_schema(a.schema);
  const auto split = split_dataset(ds.manifest);
  if (split.first.empty()) throw Error(ErrorCode::kDegenerateDataset, "training split is empty");
  const auto tensors = make_offline_tensors(ds, split.first, schema, a.n, a.root_center);

  mc.input_frames = a.n;
  mc.input_channels = schema.channels();
  mc.num_classes = ds.manifest.class_names.size();
  const bool quiet = a.quiet;
  auto result = train(tensors, mc, tc, [quiet](int epoch, double tl, double vl, double lr) {
    if (!quiet) std::fprintf(stderr, "epoch %4d  train %.5f  val %.5f  lr %.2e\n", epoch, tl, vl, lr);
  });
  result.model.class_names = ds.manifest.class_names;
  save_model(result.model, a.model);
  save_schema(schema, schema_sidecar(a.model));
  if (!a.log.empty()) {
    std::ofstream log(a.log);
    log << "epoch,train_loss,validation_loss,learning_rate\n";
    for (std::size_t e = 0; e < result.report.train_loss.size(); ++e) {
      log << e + 1 << ',' << result.report.train_loss[e] << ',' << result.report.validation_loss[e]
          << ',' << result.report.learning_rate[e] << '\n';
    }
  }
  std::printf("trained %d epochs (best %d) in %.1f s on %zu sequences; saved %s\n",
              result.report.final_epoch, result.report.best_epoch, result.report.wall_seconds,
              tensors.size(), a.model.c_str());
  return 0;
}

int run_eval_offline(const EvalArgs& a) {
  const auto model = load_model(a.model);
  const auto schema = resolve_schema(a.schema, a.model);
  const auto ds = load_dataset(a.manifest);
  const auto split = split_dataset(ds.manifest);
  emit_report(eval_offline(model, schema, ds, split.second, a.n, a.root_center), a.report, a.csv);
  return 0;
}

int run_eval_online(const EvalArgs& a, const std::string& method, const std::string& averaging) {
  const auto m = parse_sampling_method(method);
  const auto avg = parse_averaging(averaging);
  auto model = std::make_shared<const Model>(load_model(a.model));
  const auto schema = resolve_schema(a.schema, a.model);
  const auto ds = load_dataset(a.manifest);
  const auto split = split_dataset(ds.manifest);
  emit_report(eval_online(model, schema, ds, split.second, a.n, m, avg, a.root_center), a.report,
              a.csv);
  return 0;
}

struct ReplayArgs {
  std::string input = "-";
  std::string topology = "utkinect20";
  std::string model;
  std::string schema;
  std::string method = "memory-group";
  std::string averaging = "pairwise";
  std::size_t n = 16;
  bool realtime = false;
  double fps = 30.0;
  bool root_center = false;
};

int run_replay(const ReplayArgs& a) {
  std::optional<Engine> engine;
  Topology topology;
  if (!a.model.empty()) {
    EngineConfig cfg;
    cfg.n = a.n;
    cfg.schema = resolve_schema(a.schema, a.model);
    cfg.model = std::make_shared<const Model>(load_model(a.model));
    cfg.method = parse_sampling_method(a.method);
    cfg.averaging = parse_averaging(a.averaging);
    cfg.reset_on_end = true;
    cfg.root_center = a.root_center;
    topology = cfg.schema.topology;
    engine.emplace(std::move(cfg));
  } else {
    topology = builtin_topology(a.topology);
  }
  if (!(a.fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--fps must be positive");

  std::ifstream file;
  if (a.input != "-") {
    file.open(a.input);
    if (!file) throw Error(ErrorCode::kIoError, "cannot open " + a.input);
  }
  std::istream& in = a.input == "-" ? std::cin : file;
  const auto period = std::chrono::duration<double>(1.0 / a.fps);
  auto next_tick = std::chrono::steady_clock::now();
  std::string line;
  std::int64_t last_index = -1;
  bool have_frame = false;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto event = parse_stream_line(line, topology);
    if (const auto* f = std::get_if<SkeletonFrame>(&event)) {
      if (have_frame && f->index <= last_index) {
        throw Error(ErrorCode::kOutOfOrderFrame, "frame " + std::to_string(f->index) +
                                                     " after " + std::to_string(last_index));
      }
      last_index = f->index;
      have_frame = true;
      if (a.realtime) {
        std::this_thread::sleep_until(next_tick);
        next_tick += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
      }
    } else {
      have_frame = false;
    }
    if (!engine) {
      std::cout << (std::holds_alternative<EndOfStream>(event) ? serialize_end_of_stream()
                                                               : serialize_frame(std::get<SkeletonFrame>(event)))
                << '\n';
      std::cout.flush();
      continue;
    }
    if (auto p = engine->handle(event)) {
      std::cout << prediction_to_json(*p, engine->config().model->class_names) << '\n';
      std::cout.flush();
    }
  }
  return 0;
}

int run_gradcheck(std::uint64_t seed, const std::string& report) {
  GradCheckOptions opt;
  opt.seed = seed;
  const auto r = numeric_gradient_check(tiny_model_config(), opt);
  std::string json = "{\n  \"step\": " + std::to_string(r.step) + ",\n  \"blocks\": [\n";
  for (std::size_t i = 0; i < r.blocks.size(); ++i) {
    const auto& b = r.blocks[i];
    std::printf("%-10s max rel err %.3e  (%zu checked, %zu skipped at kinks)\n", b.name.c_str(),
                b.max_relative_error, b.checked, b.skipped_kinks);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "    {\"name\": \"%s\", \"max_relative_error\": %.6e, \"checked\": %zu, "
                  "\"skipped_kinks\": %zu}%s\n",
                  b.name.c_str(), b.max_relative_error, b.checked, b.skipped_kinks,
                  i + 1 < r.blocks.size() ? "," : "");
    json += buf;
  }
  char tail[256];
  std::snprintf(tail, sizeof tail,
                "  ],\n  \"max_conv_error\": %.6e,\n  \"max_dense_error\": %.6e,\n"
                "  \"max_batchnorm_error\": %.6e,\n  \"passed\": %s\n}\n",
                r.max_conv_error, r.max_dense_error, r.max_batchnorm_error,
                r.passed ? "true" : "false");
  json += tail;
  if (!report.empty()) write_text(report, json);
  std::printf("conv %.3e  dense %.3e  batchnorm %.3e  -> %s\n", r.max_conv_error, r.max_dense_error,
              r.max_batchnorm_error, r.passed ? "ok" : "FAILED");
  return r.passed ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skeleton-based online action recognition"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();

  auto* convert = app.add_subcommand("convert", "Convert UT-Kinect or JHMDB data to JSON-lines");
  std::string conv_format = "auto";
  std::string conv_src;
  std::string conv_out;
  double conv_fraction = 0.5;
  convert->add_option("--format", conv_format, "auto, utkinect or jhmdb")->capture_default_str();
  convert->add_option("--src", conv_src, "Source directory")->required();
  convert->add_option("--out", conv_out, "Output directory")->required();
  convert->add_option("--train-fraction", conv_fraction, "Training share of each class")
      ->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  SynthConfig sc;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--topology", sc.topology, "Topology name or file")->capture_default_str();
  synth->add_option("--classes", sc.num_classes)->capture_default_str();
  synth->add_option("--per-class", sc.sequences_per_class)->capture_default_str();
  synth->add_option("--min-frames", sc.min_frames)->capture_default_str();
  synth->add_option("--max-frames", sc.max_frames)->capture_default_str();
  synth->add_option("--noise", sc.noise)->capture_default_str();
  synth->add_flag("--long-action", sc.long_action, "Class motion only in the first third");

  auto* train_cmd = app.add_subcommand("train", "Train a classifier on the manifest's training split");
  TrainArgs ta;
  ModelConfig mc;
  TrainConfig tc;
  train_cmd->add_option("--manifest", ta.manifest)->required();
  train_cmd->add_option("--model", ta.model, "Output model file")->required();
  train_cmd->add_option("--schema", ta.schema, "Feature schema (default: built from the topology)");
  train_cmd->add_option("--n", ta.n)->capture_default_str();
  train_cmd->add_flag("--root-center", ta.root_center);
  train_cmd->add_flag("--quiet", ta.quiet);
  train_cmd->add_option("--log", ta.log, "Write per-epoch losses as CSV");
  train_cmd->add_option("--epochs", tc.max_epochs)->capture_default_str();
  train_cmd->add_option("--batch", tc.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", tc.initial_lr)->capture_default_str();
  train_cmd->add_option("--filters", mc.base_filters)->capture_default_str();
  train_cmd->add_option("--fc", mc.fc_width)->capture_default_str();
  train_cmd->add_option("--dropout", mc.spatial_dropout)->capture_default_str();

  auto* eval_off = app.add_subcommand("eval-offline", "Classify each test sequence once");
  EvalArgs off;
  add_eval_options(eval_off, off);

  auto* eval_on = app.add_subcommand("eval-online", "Replay test sequences through the online engine");
  EvalArgs on;
  std::string on_method = "memory-group";
  std::string on_averaging = "pairwise";
  add_eval_options(eval_on, on);
  eval_on->add_option("--method", on_method, "memory-group or sliding-window")->capture_default_str();
  eval_on->add_option("--averaging", on_averaging, "pairwise or cumulative")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Stream a sequence as JSON-lines, optionally predicting");
  ReplayArgs ra;
  replay->add_option("input", ra.input, "Sequence file, or - for stdin")->capture_default_str();
  replay->add_option("--topology", ra.topology)->capture_default_str();
  replay->add_option("--model", ra.model, "Emit predictions instead of frames");
  replay->add_option("--schema", ra.schema);
  replay->add_option("--method", ra.method)->capture_default_str();
  replay->add_option("--averaging", ra.averaging)->capture_default_str();
  replay->add_option("--n", ra.n)->capture_default_str();
  replay->add_flag("--realtime", ra.realtime, "Pace frames at --fps");
  replay->add_option("--fps", ra.fps)->capture_default_str();
  replay->add_flag("--root-center", ra.root_center);

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of backpropagation");
  std::string grad_report;
  grad->add_option("--report", grad_report, "Write a JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*convert) return run_convert(conv_format, conv_src, conv_out, conv_fraction, seed);
    if (*synth) {
      sc.seed = seed;
      return run_synth(sc, synth_out);
    }
    if (*train_cmd) {
      mc.seed = seed;
      tc.seed = seed;
      return run_train(ta, mc, tc);
    }
    if (*eval_off) return run_eval_offline(off);
    if (*eval_on) return run_eval_online(on, on_method, on_averaging);
    if (*replay) return run_replay(ra);
    if (*grad) return run_gradcheck(seed == 0 ? GradCheckOptions{}.seed : seed, grad_report);
  } catch (const Error& e) {
    std::fprintf(stderr, "skelact: %s\n", e.what());
    switch (e.code()) {
      case ErrorCode::kInvalidArgument: return kExitUsage;
      case ErrorCode::kNumericFailure: return kExitNumeric;
      default: return kExitData;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "skelact: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
