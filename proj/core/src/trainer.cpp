#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "skelact/classifier.hpp"
#include "skelact/error.hpp"

namespace skelact {

SplitIndices stratified_split(std::span<const int> labels, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split fraction must be in [0,1]");
  }
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::size_t> class_total;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::kLabelOutOfRange, "negative label");
    if (static_cast<std::size_t>(l) >= class_total.size()) class_total.resize(l + 1, 0);
    ++class_total[static_cast<std::size_t>(l)];
  }
  std::vector<std::size_t> quota(class_total.size());
  for (std::size_t c = 0; c < quota.size(); ++c) {
    quota[c] = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(class_total[c])));
  }
  SplitIndices out;
  std::vector<std::size_t> taken(class_total.size(), 0);
  for (std::size_t i : order) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (taken[c] < quota[c]) {
      ++taken[c];
      out.second.push_back(i);
    } else {
      out.first.push_back(i);
    }
  }
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

PlateauScheduler::PlateauScheduler(const TrainConfig& config)
    : lr_(config.initial_lr),
      factor_(config.plateau_factor),
      min_lr_(config.min_lr),
      min_improvement_(config.min_improvement),
      patience_(config.plateau_patience),
      best_(std::numeric_limits<double>::infinity()) {
  if (!(factor_ > 0.0 && factor_ < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "plateau factor must be in (0,1)");
  }
  if (!(config.min_lr < config.initial_lr)) {
    throw Error(ErrorCode::kInvalidArgument, "min_lr must be below initial_lr");
  }
  if (patience_ < 1) throw Error(ErrorCode::kInvalidArgument, "plateau patience must be >= 1");
}

bool PlateauScheduler::observe(double loss) {
  if (loss < best_ - min_improvement_) {
    best_ = loss;
    wait_ = 0;
    return true;
  }
  if (++wait_ >= patience_) {
    lr_ = std::max(lr_ * factor_, min_lr_);
    wait_ = 0;
  }
  return false;
}

double evaluate_loss(const Model& model, std::span<const LabeledTensor> data) {
  if (data.empty()) return 0.0;
  constexpr std::size_t kChunk = 64;
  double total = 0.0;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t end = std::min(data.size(), start + kChunk);
    std::vector<SequenceFeatureTensor> tensors;
    std::vector<int> labels;
    for (std::size_t i = start; i < end; ++i) {
      tensors.push_back(data[i].tensor);
      labels.push_back(data[i].label);
    }
    const auto logits = forward_logits(model, make_batch(tensors), Mode::kInfer, nullptr, nullptr);
    total += cross_entropy(logits, labels) * static_cast<double>(end - start);
  }
  return total / static_cast<double>(data.size());
}

TrainResult train(std::span<const LabeledTensor> dataset, const ModelConfig& model_config,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  const auto started = std::chrono::steady_clock::now();
  if (dataset.empty()) throw Error(ErrorCode::kDegenerateDataset, "empty dataset");
  if (cfg.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be positive");
  if (cfg.max_epochs < 1) throw Error(ErrorCode::kInvalidArgument, "max_epochs must be >= 1");

  ModelConfig mc = model_config;
  if (mc.input_channels == 0) mc.input_channels = dataset.front().tensor.channels;
  if (mc.input_frames == 0) mc.input_frames = dataset.front().tensor.frames;

  std::vector<int> labels;
  std::set<int> classes;
  for (const auto& item : dataset) {
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= mc.num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(item.label));
    }
    labels.push_back(item.label);
    classes.insert(item.label);
  }
  if (mc.num_classes < 2 || classes.size() < 2) {
    throw Error(ErrorCode::kDegenerateDataset, "training needs at least two classes");
  }

  const auto split = stratified_split(labels, cfg.validation_fraction, cfg.seed);
  std::vector<LabeledTensor> val;
  for (std::size_t i : split.second) val.push_back(dataset[i]);
  if (split.first.empty()) throw Error(ErrorCode::kDegenerateDataset, "no training examples left");

  TrainResult result{Model(mc), {}};
  Model& model = result.model;
  Model best = model;
  PlateauScheduler schedule(cfg);
  Rng rng(cfg.seed ^ 0x5DEECE66DULL);

  std::vector<LabeledTensor> train_set;
  for (std::size_t i : split.first) train_set.push_back(dataset[i]);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = schedule.lr();
    std::vector<std::size_t> perm(train_set.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);

    double loss_sum = 0.0;
    std::vector<LabeledTensor> batch;
    for (std::size_t start = 0; start < perm.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(perm.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[perm[i]]);
      loss_sum += backward_and_step(model, batch, lr, rng) * static_cast<double>(end - start);
    }
    const double train_loss = loss_sum / static_cast<double>(perm.size());
    const double val_loss = val.empty() ? train_loss : evaluate_loss(model, val);
    if (!std::isfinite(val_loss)) throw Error(ErrorCode::kNumericFailure, "non-finite validation loss");

    result.report.train_loss.push_back(train_loss);
    result.report.validation_loss.push_back(val_loss);
    result.report.learning_rate.push_back(lr);
    result.report.final_epoch = epoch + 1;
    if (schedule.observe(val_loss)) {
      best = model;
      result.report.best_epoch = epoch + 1;
    }
    if (on_epoch) on_epoch(epoch + 1, train_loss, val_loss, lr);
  }

  result.model = std::move(best);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace skelact
