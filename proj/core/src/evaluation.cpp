#include "skelact/evaluation.hpp"

#include <chrono>
#include <numeric>

#include <nlohmann/json.hpp>

#include "skelact/error.hpp"

namespace skelact {
namespace {

void check_classes(const Model& model, const Dataset& dataset) {
  if (model.config().num_classes != dataset.manifest.class_names.size()) {
    throw Error(ErrorCode::kClassCountMismatch,
                "model has " + std::to_string(model.config().num_classes) +
                    " classes, dataset has " +
                    std::to_string(dataset.manifest.class_names.size()));
  }
}

void finish_rates(EvalReport& r) {
  const std::size_t k = r.confusion.classes();
  r.per_class_rate.assign(k, 0.0);
  r.per_class_count.assign(k, 0);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto total = r.confusion.row_total(c);
    r.per_class_count[c] = static_cast<std::size_t>(total);
    if (total == 0) continue;
    r.per_class_rate[c] = static_cast<double>(r.confusion.at(c, c)) / static_cast<double>(total);
    sum += r.per_class_rate[c];
    ++present;
  }
  r.mean_class_rate = present ? sum / static_cast<double>(present) : 0.0;
  r.accuracy = r.confusion.accuracy();
  r.sequences = static_cast<std::size_t>(r.confusion.total());
  r.frames_per_second =
      r.wall_seconds > 0.0 ? static_cast<double>(r.frames_processed) / r.wall_seconds : 0.0;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0), missing_(classes, 0) {}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= classes_ ||
      static_cast<std::size_t>(predicted) >= classes_) {
    throw Error(ErrorCode::kLabelOutOfRange, "confusion matrix index");
  }
  ++counts_[static_cast<std::size_t>(truth) * classes_ + static_cast<std::size_t>(predicted)];
}

void ConfusionMatrix::add_no_prediction(int truth) {
  if (truth < 0 || static_cast<std::size_t>(truth) >= classes_) {
    throw Error(ErrorCode::kLabelOutOfRange, "confusion matrix index");
  }
  ++missing_[static_cast<std::size_t>(truth)];
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::uint64_t s = missing_[truth];
  for (std::size_t p = 0; p < classes_; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}) +
         std::accumulate(missing_.begin(), missing_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < classes_; ++c) s += at(c, c);
  return s;
}

double ConfusionMatrix::accuracy() const {
  const auto t = total();
  return t ? static_cast<double>(trace()) / static_cast<double>(t) : 0.0;
}

std::string ConfusionMatrix::to_csv(std::span<const std::string> names) const {
  auto name = [&names](std::size_t c) {
    return c < names.size() ? names[c] : std::to_string(c);
  };
  std::string out = "truth\\predicted";
  for (std::size_t c = 0; c < classes_; ++c) out += "," + name(c);
  out += ",none\n";
  for (std::size_t t = 0; t < classes_; ++t) {
    out += name(t);
    for (std::size_t p = 0; p < classes_; ++p) out += "," + std::to_string(at(t, p));
    out += "," + std::to_string(missing_[t]) + "\n";
  }
  return out;
}

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kOffline: return "offline";
    case EvalMode::kOnlineMemoryGroup: return "online-memory-group";
    case EvalMode::kOnlineSlidingWindow: return "online-sliding-window";
  }
  return "unknown";
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::json doc;
  doc["mode"] = to_string(r.mode);
  doc["averaging"] = to_string(r.averaging);
  doc["class_names"] = r.class_names;
  doc["accuracy"] = r.accuracy;
  doc["per_class_rate"] = r.per_class_rate;
  doc["per_class_count"] = r.per_class_count;
  doc["mean_class_rate"] = r.mean_class_rate;
  doc["sequences"] = r.sequences;
  doc["short_sequences"] = r.short_sequences;
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t t = 0; t < r.confusion.classes(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) row.push_back(r.confusion.at(t, p));
    matrix.push_back(std::move(row));
  }
  doc["confusion"] = std::move(matrix);
  nlohmann::json missing = nlohmann::json::array();
  for (std::size_t t = 0; t < r.confusion.classes(); ++t) missing.push_back(r.confusion.no_prediction(t));
  doc["no_prediction"] = std::move(missing);
  doc["timing"] = {{"wall_seconds", r.wall_seconds},
                   {"frames_processed", r.frames_processed},
                   {"frames_per_second", r.frames_per_second}};
  return doc.dump(2);
}

EvalReport eval_offline(const Model& model, const FeatureSchema& schema, const Dataset& dataset,
                        std::span<const std::size_t> test, std::size_t n, bool root_center) {
  check_classes(model, dataset);
  if (test.empty()) throw Error(ErrorCode::kDegenerateDataset, "empty test split");
  const auto started = std::chrono::steady_clock::now();
  EvalReport r;
  r.mode = EvalMode::kOffline;
  r.class_names = dataset.manifest.class_names;
  r.confusion = ConfusionMatrix(r.class_names.size());
  for (std::size_t i : test) {
    const std::size_t one[] = {i};
    const auto tensors = make_offline_tensors(dataset, one, schema, n, root_center);
    const auto p = forward(model, tensors.front().tensor, Mode::kInfer);
    r.confusion.add(tensors.front().label, argmax_with_ties(p, nullptr));
    r.frames_processed += dataset.sequences[i].frames.size();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  finish_rates(r);
  return r;
}

EvalReport eval_online(std::shared_ptr<const Model> model, const FeatureSchema& schema,
                       const Dataset& dataset, std::span<const std::size_t> test, std::size_t n,
                       SamplingMethod method, Averaging averaging, bool root_center) {
  check_classes(*model, dataset);
  if (test.empty()) throw Error(ErrorCode::kDegenerateDataset, "empty test split");
  EvalReport r;
  r.mode = method == SamplingMethod::kMemoryGroup ? EvalMode::kOnlineMemoryGroup
                                                  : EvalMode::kOnlineSlidingWindow;
  r.averaging = averaging;
  r.class_names = dataset.manifest.class_names;
  r.confusion = ConfusionMatrix(r.class_names.size());

  EngineConfig cfg;
  cfg.n = n;
  cfg.schema = schema;
  cfg.model = std::move(model);
  cfg.averaging = averaging;
  cfg.method = method;
  cfg.root_center = root_center;
  Engine engine(std::move(cfg));

  const auto started = std::chrono::steady_clock::now();
  for (std::size_t i : test) {
    engine.reset();
    std::optional<Prediction> last;
    for (const auto& frame : dataset.sequences[i].frames) {
      if (auto p = engine.step(frame)) last = std::move(p);
    }
    r.frames_processed += dataset.sequences[i].frames.size();
    const int truth = dataset.manifest.entries[i].label;
    if (last) {
      r.confusion.add(truth, last->argmax);
    } else {
      r.confusion.add_no_prediction(truth);
      r.short_sequences.push_back(i);
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  finish_rates(r);
  return r;
}

}  // namespace skelact
