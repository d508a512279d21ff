#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skelact/classifier.hpp"
#include "skelact/features.hpp"
#include "skelact/sampler.hpp"
#include "skelact/stream.hpp"

namespace skelact {

enum class Averaging { kPairwise, kCumulative };

std::string_view to_string(Averaging mode);
Averaging parse_averaging(std::string_view text);
std::string_view to_string(SamplingMethod method);
SamplingMethod parse_sampling_method(std::string_view text);

// Combines the running average with a new instant prediction.
//   prior absent -> p
//   pairwise     -> (prior + p) / 2
//   cumulative   -> (prior * steps_so_far + p) / (steps_so_far + 1)
std::vector<double> average_probabilities(const std::vector<double>* prior,
                                          std::span<const double> p, Averaging mode,
                                          std::size_t steps_so_far = 0);

struct Prediction {
  int step = 0;
  std::vector<double> probs_instant;
  std::vector<double> probs_averaged;
  int argmax = 0;
  bool tie_broken = false;
};

// Smallest index attaining the maximum; `tie` set when the maximum is
// attained more than once (within 1e-12).
int argmax_with_ties(std::span<const double> p, bool* tie);

struct EngineConfig {
  std::size_t n = 16;
  FeatureSchema schema;
  std::shared_ptr<const Model> model;
  Averaging averaging = Averaging::kPairwise;
  SamplingMethod method = SamplingMethod::kMemoryGroup;
  bool reset_on_end = false;
  bool root_center = false;
};

// Online recognizer for one stream: sampler -> features -> classifier ->
// probability averaging. Single writer; several engines may share a model.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  std::optional<Prediction> step(const SkeletonFrame& frame);
  // Frames go to step(); EndOfStream resets when reset_on_end is set.
  std::optional<Prediction> handle(const StreamEvent& event);
  void reset();

  const EngineConfig& config() const { return config_; }
  const std::optional<std::vector<double>>& averaged() const { return averaged_; }
  std::size_t emissions() const { return emissions_; }

 private:
  EngineConfig config_;
  FrameSampler sampler_;
  std::optional<std::vector<double>> averaged_;
  std::size_t emissions_ = 0;
};

// One JSON-lines record of the prediction log.
std::string prediction_to_json(const Prediction& prediction,
                               std::span<const std::string> class_names);

}  // namespace skelact
