#include <benchmark/benchmark.h>

#include <memory>

#include "skelact/classifier.hpp"
#include "skelact/engine.hpp"
#include "skelact/features.hpp"
#include "skelact/random.hpp"

namespace {

using namespace skelact;

std::vector<SkeletonFrame> random_frames(std::size_t count, std::size_t joints, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SkeletonFrame> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].index = static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < joints; ++j) {
      out[i].joints.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    }
  }
  return out;
}

std::shared_ptr<Model> default_model(const FeatureSchema& schema) {
  ModelConfig mc;
  mc.input_channels = schema.channels();
  mc.num_classes = 10;
  return std::make_shared<Model>(mc);
}

void BM_AssembleTensor(benchmark::State& state) {
  const auto schema = build_schema(builtin_topology("utkinect20"));
  const auto frames = random_frames(16, 20, 1);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_sequence_tensor(frames, schema, 16));
}
BENCHMARK(BM_AssembleTensor);

void BM_ForwardInfer(benchmark::State& state) {
  const auto schema = build_schema(builtin_topology("utkinect20"));
  const auto model = default_model(schema);
  const auto tensor = assemble_sequence_tensor(random_frames(16, 20, 2), schema, 16);
  for (auto _ : state) benchmark::DoNotOptimize(forward(*model, tensor));
}
BENCHMARK(BM_ForwardInfer);

// Amortized cost per frame, emission steps included.
void BM_EngineStep(benchmark::State& state) {
  const auto schema = build_schema(builtin_topology("utkinect20"));
  EngineConfig cfg;
  cfg.schema = schema;
  cfg.model = default_model(schema);
  cfg.method = state.range(0) == 0 ? SamplingMethod::kMemoryGroup : SamplingMethod::kSlidingWindow;
  Engine engine(cfg);
  auto frames = random_frames(64, 20, 3);
  std::int64_t next = 0;
  for (auto _ : state) {
    auto f = frames[static_cast<std::size_t>(next) % frames.size()];
    f.index = next++;
    benchmark::DoNotOptimize(engine.step(f));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EngineStep)->Arg(0)->Arg(1);

void BM_TrainStep(benchmark::State& state) {
  const auto schema = build_schema(builtin_topology("utkinect20"));
  Model model(*default_model(schema));
  Rng rng(4);
  std::vector<LabeledTensor> batch;
  for (int i = 0; i < 32; ++i) {
    batch.push_back({assemble_sequence_tensor(random_frames(16, 20, 10 + i), schema, 16), i % 10});
  }
  for (auto _ : state) benchmark::DoNotOptimize(backward_and_step(model, batch, 1e-3, rng));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
