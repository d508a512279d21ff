#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "skelact/layers.hpp"
#include "skelact/tensor.hpp"

namespace skelact {

using nn::Mode;

inline constexpr int kModelLayoutVersion = 1;

struct ModelConfig {
  std::size_t input_frames = 16;
  std::size_t input_channels = 0;
  std::size_t num_classes = 0;
  std::size_t base_filters = 64;
  std::size_t conv_kernel = 3;
  std::size_t pool_stride = 2;
  double spatial_dropout = 0.1;
  std::size_t fc_width = 128;
  std::string activation = "leaky_relu";
  double leaky_slope = 0.1;
  std::uint64_t seed = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Throws Error(kInvalidArgument) on inconsistent configuration.
void validate_model_config(const ModelConfig& config);

// 1D CNN over (frames x channels) input:
//   [conv-bn-act x2, maxpool] (f), [conv-bn-act x2, maxpool] (2f),
//   [conv-bn-act x2] (4f), spatial dropout, global average pooling,
//   dense(fc_width)-act, dense(num_classes), softmax.
// Parameters are seeded from config.seed; the class layer starts at zero.
class Model {
 public:
  Model() = default;
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  int layout_version() const { return layout_version_; }

  std::vector<nn::Layer>& layers() { return layers_; }
  const std::vector<nn::Layer>& layers() const { return layers_; }

  // Trainable blocks in fixed layer order.
  std::vector<nn::ParamBlock*> parameters();
  std::vector<const nn::ParamBlock*> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  std::uint64_t adam_step() const { return adam_step_; }
  void set_adam_step(std::uint64_t step) { adam_step_ = step; }

  std::vector<std::string> class_names;

 private:
  ModelConfig config_;
  std::vector<nn::Layer> layers_;
  std::uint64_t adam_step_ = 0;
  int layout_version_ = kModelLayoutVersion;
};

// Intermediate state of one batched forward pass, consumed by backward.
struct ForwardTape {
  std::vector<nn::LayerCache> caches;
  nn::Activations logits;
  // Active/inactive pattern of every piecewise-linear unit (activation signs,
  // pooling winners); used to spot finite differences that cross a kink.
  std::vector<std::uint32_t> kinks;
};

nn::Activations make_batch(std::span<const SequenceFeatureTensor> tensors);

// Batched logits. `tape` may be null (no caching); train mode needs `rng`.
nn::Activations forward_logits(const Model& model, const nn::Activations& input, Mode mode,
                               Rng* rng, ForwardTape* tape);

// Class probabilities for a single tensor. Infer mode is deterministic and
// safe to call concurrently on a shared model.
std::vector<double> forward(const Model& model, const SequenceFeatureTensor& tensor,
                            Mode mode = Mode::kInfer, Rng* rng = nullptr);

std::vector<double> softmax(std::span<const double> logits);

// Mean categorical cross-entropy of a logits batch.
double cross_entropy(const nn::Activations& logits, std::span<const int> labels);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Backpropagates mean cross-entropy through the tape, accumulating into
// parameter gradients (which are zeroed first).
void backward(Model& model, const ForwardTape& tape, std::span<const int> labels);

void adam_update(Model& model, double lr, const AdamConfig& adam = {});

// One train-mode step: forward, backward, running-stat update and one Adam
// update. Returns the loss before the update.
double backward_and_step(Model& model, std::span<const LabeledTensor> batch, double lr,
                         Rng& rng, const AdamConfig& adam = {});

struct TrainConfig {
  double initial_lr = 0.001;
  double plateau_factor = 0.5;
  int plateau_patience = 5;
  double min_lr = 0.00001;
  int max_epochs = 400;
  std::size_t batch_size = 32;
  double validation_fraction = 0.1;
  double min_improvement = 1e-6;
  std::uint64_t seed = 0;
};

// Reduce-on-plateau schedule: after `patience` consecutive epochs without a
// strict improvement of more than min_improvement, lr <- max(lr*factor, min_lr).
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const TrainConfig& config);

  // Feeds one epoch's monitored loss; returns true when it is a new best.
  bool observe(double loss);
  double lr() const { return lr_; }
  double best() const { return best_; }

 private:
  double lr_;
  double factor_;
  double min_lr_;
  double min_improvement_;
  int patience_;
  int wait_ = 0;
  double best_;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::vector<double> learning_rate;
  int final_epoch = 0;
  int best_epoch = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  Model model;
  TrainReport report;
};

using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss, double lr)>;

// Trains on the dataset with a stratified validation split and returns the
// weights of the epoch with the lowest validation loss.
TrainResult train(std::span<const LabeledTensor> dataset, const ModelConfig& model_config,
                  const TrainConfig& train_config, const EpochCallback& on_epoch = {});

// Mean loss of a dataset in infer mode.
double evaluate_loss(const Model& model, std::span<const LabeledTensor> data);

struct GradCheckBlock {
  std::string name;
  nn::ParamKind kind;
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_conv_error = 0.0;
  double max_dense_error = 0.0;
  double max_batchnorm_error = 0.0;
  double step = 1e-4;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  double batchnorm_tolerance = 1e-3;
  std::size_t batch = 4;
  std::uint64_t seed = 7;
};

// Central-difference check of every parameter against backward() in train
// mode on a fixed random batch.
GradCheckReport numeric_gradient_check(const ModelConfig& config,
                                       const GradCheckOptions& options = {});

// Small configuration suited to numeric_gradient_check.
ModelConfig tiny_model_config();

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);
std::string model_to_json(const Model& model);
Model model_from_json(std::string_view text);

}  // namespace skelact
