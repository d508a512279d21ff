#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <nlohmann/json.hpp>

#include "skelact/engine.hpp"
#include "skelact/error.hpp"
#include "test_util.hpp"

namespace skelact {
namespace {

struct Fixture {
  FeatureSchema schema;
  std::shared_ptr<Model> model;
};

Fixture make_fixture(std::size_t n = 16, std::size_t classes = 3) {
  Fixture f;
  f.schema = build_schema(builtin_topology("utkinect20"));
  ModelConfig mc;
  mc.input_frames = n;
  mc.input_channels = f.schema.channels();
  mc.num_classes = classes;
  mc.base_filters = 4;
  mc.fc_width = 8;
  mc.seed = 2;
  f.model = std::make_shared<Model>(mc);
  Rng rng(9);
  for (auto* p : f.model->parameters()) {
    if (p->name.rfind("classes", 0) == 0) {
      for (auto& v : p->value) v = rng.uniform(-1.0, 1.0);
    }
  }
  f.model->class_names = {"x", "y", "z"};
  return f;
}

EngineConfig engine_config(const Fixture& f, std::size_t n = 16) {
  EngineConfig c;
  c.n = n;
  c.schema = f.schema;
  c.model = f.model;
  return c;
}

TEST(Averaging, Examples) {
  const std::vector<double> prior = {1.0, 0.0};
  const std::vector<double> p = {0.0, 1.0};
  EXPECT_EQ(average_probabilities(&prior, p, Averaging::kPairwise), (std::vector<double>{0.5, 0.5}));
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_EQ(average_probabilities(&half, p, Averaging::kPairwise), (std::vector<double>{0.25, 0.75}));
  const auto cum = average_probabilities(&prior, p, Averaging::kCumulative, 2);
  EXPECT_NEAR(cum[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(cum[1], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(average_probabilities(nullptr, p, Averaging::kCumulative), p);
}

TEST(Averaging, PairwiseWeightsHalveWithAge) {
  // After k updates the i-th prediction (0-based) carries 2^-(k-i), the first 2^-k.
  const std::vector<std::vector<double>> preds = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  std::vector<double> avg = preds[0];
  for (std::size_t i = 1; i < preds.size(); ++i) {
    avg = average_probabilities(&avg, preds[i], Averaging::kPairwise);
  }
  EXPECT_EQ(avg, (std::vector<double>{0.125, 0.125, 0.25, 0.5}));
}

TEST(Averaging, CumulativeIsArithmeticMean) {
  Rng rng(3);
  std::vector<std::vector<double>> preds;
  for (int i = 0; i < 7; ++i) preds.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
  std::vector<double> avg = preds[0];
  for (std::size_t i = 1; i < preds.size(); ++i) {
    avg = average_probabilities(&avg, preds[i], Averaging::kCumulative, i);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0.0;
    for (const auto& p : preds) mean += p[c];
    EXPECT_NEAR(avg[c], mean / 7.0, 1e-14);
  }
}

TEST(Averaging, FixedPointAndLengthMismatch) {
  const std::vector<double> p = {0.2, 0.3, 0.5};
  auto avg = p;
  for (int i = 0; i < 10; ++i) avg = average_probabilities(&avg, p, Averaging::kPairwise);
  EXPECT_EQ(avg, p);
  const std::vector<double> short_p = {0.5, 0.5};
  EXPECT_THROW(average_probabilities(&avg, short_p, Averaging::kPairwise), Error);
}

TEST(Argmax, TiesPickSmallestIndex) {
  bool tie = false;
  EXPECT_EQ(argmax_with_ties(std::vector<double>{0.2, 0.4, 0.4}, &tie), 1);
  EXPECT_TRUE(tie);
  EXPECT_EQ(argmax_with_ties(std::vector<double>{0.5, 0.3, 0.2}, &tie), 0);
  EXPECT_FALSE(tie);
  EXPECT_EQ(argmax_with_ties(std::vector<double>{0.25, 0.25, 0.25, 0.25}, &tie), 0);
  EXPECT_TRUE(tie);
}

TEST(Parse, NamesRoundTrip) {
  EXPECT_EQ(parse_averaging("pairwise"), Averaging::kPairwise);
  EXPECT_EQ(parse_averaging(to_string(Averaging::kCumulative)), Averaging::kCumulative);
  EXPECT_EQ(parse_sampling_method("sliding-window"), SamplingMethod::kSlidingWindow);
  EXPECT_EQ(parse_sampling_method(to_string(SamplingMethod::kMemoryGroup)), SamplingMethod::kMemoryGroup);
  EXPECT_THROW(parse_averaging("mean"), Error);
  EXPECT_THROW(parse_sampling_method("window"), Error);
}

TEST(Engine, EmitsEveryNFrames) {
  const auto f = make_fixture();
  Engine engine(engine_config(f));
  Rng rng(1);
  std::vector<int> steps;
  for (int j = 1; j <= 48; ++j) {
    auto pred = engine.step(testing::random_frame(rng, 20, j - 1));
    if (pred) steps.push_back(pred->step);
    EXPECT_EQ(engine.emissions(), static_cast<std::size_t>(j / 16));
  }
  EXPECT_EQ(steps, (std::vector<int>{0, 1, 2}));
}

TEST(Engine, FirstPredictionIsInstant) {
  const auto f = make_fixture();
  Engine engine(engine_config(f));
  Rng rng(2);
  std::optional<Prediction> pred;
  for (int j = 0; j < 16; ++j) pred = engine.step(testing::random_frame(rng, 20, j));
  ASSERT_TRUE(pred);
  EXPECT_EQ(pred->probs_averaged, pred->probs_instant);
  double sum = 0.0;
  for (double v : pred->probs_instant) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Engine, MatchesOfflinePipelineOnFirstBatch) {
  const auto f = make_fixture();
  Engine engine(engine_config(f));
  Rng rng(3);
  const auto frames = testing::random_frames(rng, 16, 20);
  std::optional<Prediction> pred;
  for (const auto& fr : frames) pred = engine.step(fr);
  ASSERT_TRUE(pred);
  const auto tensor = assemble_sequence_tensor(frames, f.schema, 16);
  EXPECT_EQ(pred->probs_instant, forward(*f.model, tensor));
}

TEST(Engine, ConstantStreamIsFixedPoint) {
  const auto f = make_fixture();
  for (auto mode : {Averaging::kPairwise, Averaging::kCumulative}) {
    auto cfg = engine_config(f);
    cfg.averaging = mode;
    Engine engine(cfg);
    Rng rng(4);
    const auto frame = testing::random_frame(rng, 20);
    std::vector<double> first;
    for (int j = 0; j < 80; ++j) {
      auto fr = frame;
      fr.index = j;
      auto pred = engine.step(fr);
      if (!pred) continue;
      if (first.empty()) first = pred->probs_averaged;
      for (std::size_t c = 0; c < first.size(); ++c) {
        EXPECT_NEAR(pred->probs_averaged[c], first[c], 1e-12);
      }
    }
  }
}

TEST(Engine, ResetAndReplayDeterminism) {
  const auto f = make_fixture();
  auto cfg = engine_config(f);
  cfg.reset_on_end = true;
  Engine engine(cfg);
  Rng rng(5);
  const auto frames = testing::random_frames(rng, 40, 20);
  auto run = [&] {
    std::vector<Prediction> out;
    for (const auto& fr : frames) {
      if (auto p = engine.handle(fr)) out.push_back(*p);
    }
    engine.handle(EndOfStream{});
    return out;
  };
  const auto a = run();
  EXPECT_EQ(engine.emissions(), 0u);
  EXPECT_FALSE(engine.averaged());
  const auto b = run();
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].step, b[i].step);
    EXPECT_EQ(a[i].probs_averaged, b[i].probs_averaged);
  }
  engine.reset();
  engine.reset();
  EXPECT_EQ(engine.emissions(), 0u);
}

TEST(Engine, EndWithoutResetKeepsState) {
  const auto f = make_fixture();
  Engine engine(engine_config(f));
  Rng rng(6);
  for (int j = 0; j < 16; ++j) engine.step(testing::random_frame(rng, 20, j));
  engine.handle(EndOfStream{});
  EXPECT_EQ(engine.emissions(), 1u);
}

TEST(Engine, SlidingWindowCadence) {
  const auto f = make_fixture();
  auto cfg = engine_config(f);
  cfg.method = SamplingMethod::kSlidingWindow;
  Engine engine(cfg);
  Rng rng(7);
  int emitted = 0;
  for (int j = 0; j < 50; ++j) {
    if (engine.step(testing::random_frame(rng, 20, j))) ++emitted;
  }
  EXPECT_EQ(emitted, 3);
}

TEST(Engine, RejectsMismatchedModel) {
  const auto f = make_fixture(16);
  auto cfg = engine_config(f, 8);
  EXPECT_THROW({ Engine e(cfg); }, Error);
  auto other = engine_config(f);
  other.schema = build_schema(builtin_topology("jhmdb15"));
  try {
    Engine e(other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  other.model = nullptr;
  EXPECT_THROW({ Engine e(other); }, Error);
}

TEST(Engine, RejectsBadFrames) {
  const auto f = make_fixture();
  Engine engine(engine_config(f));
  Rng rng(8);
  try {
    engine.step(testing::random_frame(rng, 15));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kJointCountMismatch);
  }
  auto fr = testing::random_frame(rng, 20);
  fr.joints[4].y = std::nan("");
  EXPECT_THROW(engine.step(fr), Error);
}

TEST(Engine, RootCenterIgnoresTranslation) {
  const auto f = make_fixture();
  auto cfg = engine_config(f);
  cfg.root_center = true;
  Engine a(cfg), b(cfg);
  Rng rng(10);
  const auto frames = testing::random_frames(rng, 16, 20);
  std::optional<Prediction> pa, pb;
  for (const auto& fr : frames) {
    pa = a.step(fr);
    auto shifted = fr;
    for (auto& j : shifted.joints) j = j + Vec3{3.0, -2.0, 1.5};
    pb = b.step(shifted);
  }
  ASSERT_TRUE(pa && pb);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(pa->probs_instant[c], pb->probs_instant[c], 1e-9);
}

TEST(PredictionJson, Fields) {
  Prediction p;
  p.step = 4;
  p.probs_instant = {0.1, 0.9};
  p.probs_averaged = {0.3, 0.7};
  p.argmax = 1;
  const std::vector<std::string> names = {"a", "b"};
  const auto rec = nlohmann::json::parse(prediction_to_json(p, names));
  EXPECT_EQ(rec.at("step"), 4);
  EXPECT_EQ(rec.at("class"), "b");
  EXPECT_EQ(rec.at("argmax"), 1);
  EXPECT_EQ(rec.at("tie"), false);
  EXPECT_EQ(rec.at("p_avg").get<std::vector<double>>(), p.probs_averaged);
  EXPECT_EQ(rec.at("p").get<std::vector<double>>(), p.probs_instant);
  EXPECT_TRUE(nlohmann::json::parse(prediction_to_json(p, {})).at("class").is_null());
}

}  // namespace
}  // namespace skelact
