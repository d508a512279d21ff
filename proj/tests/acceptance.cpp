// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "skelact/classifier.hpp"
#include "skelact/dataset.hpp"
#include "skelact/engine.hpp"
#include "skelact/evaluation.hpp"
#include "skelact/features.hpp"
#include "skelact/geometry.hpp"
#include "skelact/sampler.hpp"
#include "skelact/synthetic.hpp"
#include "test_util.hpp"

namespace skelact {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kOracleTolerance = 1e-9;
constexpr double kIsometryRelTolerance = 1e-6;
constexpr double kConvDenseGradTolerance = 1e-4;
constexpr double kBatchNormGradTolerance = 1e-3;
constexpr double kSyntheticAccuracy = 0.95;
constexpr int kSyntheticMaxEpochs = 200;
constexpr int kSyntheticEpochs = 100;
constexpr int kLongActionEpochs = 60;
constexpr double kLongActionMarginPoints = 10.0;
constexpr double kMinFramesPerSecond = 30.0;
constexpr std::size_t kWindow = 16;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome geometric_oracles() {
  Rng rng(20240611);
  double worst = 0.0;
  int cases = 0;
  while (cases < 1000) {
    const Vec3 g = testing::random_point(rng), a = testing::random_point(rng),
               b = testing::random_point(rng), c = testing::random_point(rng),
               d = testing::random_point(rng), e = testing::random_point(rng);
    if (!oracle::good_line(a, b) || !oracle::good_line(c, d) || !oracle::good_plane(a, b, c) ||
        !oracle::good_plane(d, e, g)) {
      continue;
    }
    ++cases;
    const Vec3 o = joint_orientation(a, b);
    const Vec3 ro = oracle::orientation(a, b);
    const double diffs[] = {
        std::abs(o.x - static_cast<double>(ro.x)),
        std::abs(o.y - static_cast<double>(ro.y)),
        std::abs(o.z - static_cast<double>(ro.z)),
        std::abs(joint_line_distance(g, a, b) - oracle::line_distance(g, a, b)),
        std::abs(line_line_angle(a, b, c, d) - oracle::line_line_angle(a, b, c, d)),
        std::abs(joint_plane_distance(g, a, b, c) - oracle::plane_distance(g, a, b, c)),
        std::abs(line_plane_angle(c, d, a, b, e) - oracle::line_plane_angle(c, d, a, b, e)),
        std::abs(plane_plane_angle(a, b, c, d, e, g) - oracle::plane_plane_angle(a, b, c, d, e, g)),
    };
    for (double v : diffs) worst = std::max(worst, static_cast<double>(v));
  }
  return {worst <= kOracleTolerance, fmt("1000 inputs, max abs error %.3g (tol %.0e)", worst, kOracleTolerance)};
}

Outcome isometry_invariance() {
  const auto schema = build_schema(builtin_topology("utkinect20"));
  const std::size_t orient = schema.jcd_dim();
  const std::size_t pairs = orient + 3 * schema.lines.size();
  const std::size_t motion = schema.per_frame_dim();
  Rng rng(77);
  const auto frames = testing::random_frames(rng, kWindow, 20);
  const auto base = assemble_sequence_tensor(frames, schema, kWindow);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Mat3 r = testing::random_rotation(rng);
    const Vec3 shift = testing::random_point(rng, 5.0);
    std::vector<SkeletonFrame> moved;
    for (const auto& f : frames) moved.push_back(apply_rigid_transform(f, r, shift));
    const auto t = assemble_sequence_tensor(moved, schema, kWindow);
    for (std::size_t k = 0; k < kWindow; ++k) {
      for (std::size_t c = 0; c < motion; ++c) {
        if (c >= orient && c < pairs) continue;  // orientations rotate with the body
        const double ref = base.at(k, c);
        worst = std::max(worst, std::abs(t.at(k, c) - ref) / std::max(1.0, std::abs(ref)));
      }
    }
  }
  return {worst <= kIsometryRelTolerance,
          fmt("100 transforms, max relative error %.3g (tol %.0e)", worst, kIsometryRelTolerance)};
}

// Hand-traced expectations for n = 16: per-epoch counts (oldest first) in the
// batch emitted at T, and the full index list at T = 2.
Outcome sampler_exactness() {
  const std::vector<std::vector<int>> expected_counts = {
      {16}, {8, 8}, {4, 4, 8}, {2, 2, 4, 8}, {1, 1, 2, 4, 8}};
  const std::vector<std::int64_t> expected_t2 = {0,  4,  8,  12, 16, 20, 24, 28,
                                                 32, 34, 36, 38, 40, 42, 44, 46};
  MemoryGroupSampler s(kWindow);
  std::vector<SampleBatch> batches;
  for (std::int64_t i = 0; i < 5 * static_cast<std::int64_t>(kWindow); ++i) {
    SkeletonFrame f;
    f.index = i;
    f.joints = {{static_cast<double>(i), 0.0, 0.0}};
    if (auto b = s.push(f)) batches.push_back(std::move(*b));
  }
  if (batches.size() != 5) return {false, "expected 5 batches"};
  for (std::size_t t = 0; t < batches.size(); ++t) {
    const auto& b = batches[t];
    if (b.frames.size() != kWindow || b.step != static_cast<int>(t)) {
      return {false, fmt("batch %.0f has wrong length or step", static_cast<double>(t))};
    }
    std::vector<int> counts(t + 1, 0);
    for (const auto& f : b.frames) ++counts[static_cast<std::size_t>(f.index) / kWindow];
    if (counts != expected_counts[t]) return {false, fmt("epoch counts differ at T=%.0f", static_cast<double>(t))};
  }
  std::vector<std::int64_t> t2;
  for (const auto& f : batches[2].frames) t2.push_back(f.index);
  if (t2 != expected_t2) return {false, "T=2 batch composition differs"};
  return {true, "T=0..4 counts 16 | 8,8 | 4,4,8 | 2,2,4,8 | 1,1,2,4,8; T=2 is 25%/25%/50%"};
}

Outcome gradient_check() {
  GradCheckOptions opts;
  opts.tolerance = kConvDenseGradTolerance;
  opts.batchnorm_tolerance = kBatchNormGradTolerance;
  const auto r = numeric_gradient_check(tiny_model_config(), opts);
  const bool pass = r.max_conv_error < kConvDenseGradTolerance &&
                    r.max_dense_error < kConvDenseGradTolerance &&
                    r.max_batchnorm_error < kBatchNormGradTolerance;
  return {pass, fmt("max relative error conv %.3g, dense %.3g, batchnorm %.3g", r.max_conv_error,
                    r.max_dense_error, r.max_batchnorm_error)};
}

struct Trained {
  Dataset dataset;
  FeatureSchema schema;
  SplitIndices split;
  std::shared_ptr<Model> model;
};

Trained train_on(const SynthConfig& sc, int epochs) {
  Trained t;
  t.dataset = generate_synthetic(sc);
  t.schema = build_schema(t.dataset.topology);
  t.split = split_dataset(t.dataset.manifest);
  const auto data = make_offline_tensors(t.dataset, t.split.first, t.schema, kWindow);
  ModelConfig mc;
  mc.num_classes = sc.num_classes;
  mc.seed = sc.seed;
  TrainConfig tc;
  tc.max_epochs = epochs;
  tc.seed = sc.seed;
  auto result = train(data, mc, tc);
  t.model = std::make_shared<Model>(std::move(result.model));
  t.model->class_names = t.dataset.manifest.class_names;
  return t;
}

std::shared_ptr<Model> g_default_model;
FeatureSchema g_default_schema;

Outcome synthetic_end_to_end() {
  static_assert(kSyntheticEpochs <= kSyntheticMaxEpochs);
  SynthConfig sc;  // 5 classes, 40 sequences per class, noise on
  sc.seed = 1;
  const auto t = train_on(sc, kSyntheticEpochs);
  const auto r = eval_offline(*t.model, t.schema, t.dataset, t.split.second, kWindow);
  g_default_model = t.model;
  g_default_schema = t.schema;
  return {r.accuracy >= kSyntheticAccuracy,
          fmt("held-out accuracy %.4f on %.0f sequences after %.0f epochs", r.accuracy,
              static_cast<double>(r.sequences), kSyntheticEpochs)};
}

Outcome long_action_superiority() {
  SynthConfig sc;
  sc.long_action = true;
  sc.seed = 2;
  const auto t = train_on(sc, kLongActionEpochs);
  const auto mg = eval_online(t.model, t.schema, t.dataset, t.split.second, kWindow,
                              SamplingMethod::kMemoryGroup, Averaging::kPairwise);
  const auto sw = eval_online(t.model, t.schema, t.dataset, t.split.second, kWindow,
                              SamplingMethod::kSlidingWindow, Averaging::kPairwise);
  const double gap = 100.0 * (mg.mean_class_rate - sw.mean_class_rate);
  return {gap >= kLongActionMarginPoints,
          fmt("mean class rate memory-group %.4f, sliding-window %.4f, gap %.1f pp",
              mg.mean_class_rate, sw.mean_class_rate, gap)};
}

Outcome latency_budget() {
  auto schema = g_default_schema;
  auto model = g_default_model;
  if (!model) {
    schema = build_schema(builtin_topology("utkinect20"));
    ModelConfig mc;
    mc.input_channels = schema.channels();
    mc.num_classes = 5;
    model = std::make_shared<Model>(mc);
  }
  EngineConfig cfg;
  cfg.n = kWindow;
  cfg.schema = schema;
  cfg.model = model;
  Engine engine(cfg);
  Rng rng(5);
  const auto frames = testing::random_frames(rng, 20 * kWindow, 20);
  const auto start = Clock::now();
  std::size_t emitted = 0;
  for (const auto& f : frames) emitted += engine.step(f).has_value();
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const double fps = static_cast<double>(frames.size()) / secs;
  return {fps >= kMinFramesPerSecond && emitted == 20,
          fmt("%.0f frames/s over %.0f frames with the default model (need %.0f)", fps,
              static_cast<double>(frames.size()), kMinFramesPerSecond)};
}

}  // namespace
}  // namespace skelact

int main() {
  using namespace skelact;
  const std::vector<Criterion> criteria = {
      {"geometric-oracle-equivalence", 5.0, geometric_oracles},
      {"isometry-invariance", 5.0, isometry_invariance},
      {"sampler-exactness", 1.0, sampler_exactness},
      {"gradient-correctness", 60.0, gradient_check},
      {"synthetic-end-to-end", 300.0, synthetic_end_to_end},
      {"long-action-superiority", 300.0, long_action_superiority},
      {"latency-budget", 60.0, latency_budget},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = Clock::now();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.name.c_str(),
                out.detail.c_str(), secs, c.budget_seconds, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
