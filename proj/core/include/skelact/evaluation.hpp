#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "skelact/classifier.hpp"
#include "skelact/dataset.hpp"
#include "skelact/engine.hpp"
#include "skelact/features.hpp"

namespace skelact {

// Rows are ground truth, columns predictions. Sequences that produced no
// prediction (too short to emit online) are tallied in a per-class
// `no_prediction` column so row sums still equal per-class test counts.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes);

  void add(int truth, int predicted);
  void add_no_prediction(int truth);

  std::size_t classes() const { return classes_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  std::uint64_t no_prediction(std::size_t truth) const { return missing_[truth]; }
  std::uint64_t row_total(std::size_t truth) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;
  double accuracy() const;

  std::string to_csv(std::span<const std::string> class_names) const;

 private:
  std::size_t classes_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> missing_;
};

enum class EvalMode { kOffline, kOnlineMemoryGroup, kOnlineSlidingWindow };
std::string_view to_string(EvalMode mode);

struct EvalReport {
  EvalMode mode = EvalMode::kOffline;
  Averaging averaging = Averaging::kPairwise;
  std::vector<std::string> class_names;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  // Per-class recognition rate; NaN-free, classes without test samples get 0
  // and are left out of mean_class_rate.
  std::vector<double> per_class_rate;
  std::vector<std::size_t> per_class_count;
  double mean_class_rate = 0.0;
  std::size_t sequences = 0;
  // Test entries that were too short to produce any online prediction.
  std::vector<std::size_t> short_sequences;
  double wall_seconds = 0.0;
  std::uint64_t frames_processed = 0;
  double frames_per_second = 0.0;
};

std::string report_to_json(const EvalReport& report);

// Classifies each test sequence once after resampling it to n frames.
EvalReport eval_offline(const Model& model, const FeatureSchema& schema, const Dataset& dataset,
                        std::span<const std::size_t> test, std::size_t n,
                        bool root_center = false);

// Replays each test sequence frame by frame through a fresh engine; the final
// averaged prediction decides whether the sequence counts as positive.
EvalReport eval_online(std::shared_ptr<const Model> model, const FeatureSchema& schema,
                       const Dataset& dataset, std::span<const std::size_t> test, std::size_t n,
                       SamplingMethod method, Averaging averaging, bool root_center = false);

}  // namespace skelact
