#include <algorithm>
#include <cmath>

#include "skelact/classifier.hpp"
#include "skelact/error.hpp"

namespace skelact {
namespace {

// Gradients smaller than this are compared on an absolute scale.
constexpr double kRelativeFloor = 1e-6;

struct Probe {
  const nn::Activations* input;
  std::span<const int> labels;
  std::uint64_t dropout_seed;

  double loss(const Model& model, std::vector<std::uint32_t>* kinks) const {
    Rng rng(dropout_seed);
    ForwardTape tape;
    forward_logits(model, *input, Mode::kTrain, &rng, &tape);
    if (kinks) *kinks = std::move(tape.kinks);
    return cross_entropy(tape.logits, labels);
  }
};

}  // namespace

ModelConfig tiny_model_config() {
  ModelConfig c;
  c.input_frames = 16;
  c.input_channels = 6;
  c.num_classes = 2;
  c.base_filters = 4;
  c.fc_width = 8;
  c.spatial_dropout = 0.1;
  c.seed = 11;
  return c;
}

GradCheckReport numeric_gradient_check(const ModelConfig& config,
                                       const GradCheckOptions& options) {
  Model model(config);
  Rng rng(options.seed);
  // Move every parameter off its initial value (the class layer starts at
  // zero, which would make downstream gradients vanish).
  for (auto* p : model.parameters()) {
    const bool is_gamma = p->name.ends_with(".gamma");
    for (auto& v : p->value) v = is_gamma ? rng.uniform(0.5, 1.5) : rng.uniform(-0.5, 0.5);
  }

  nn::Activations input(options.batch, config.input_frames, config.input_channels);
  for (auto& v : input.data) v = rng.normal();
  std::vector<int> labels(options.batch);
  for (std::size_t b = 0; b < labels.size(); ++b) {
    labels[b] = static_cast<int>(b % config.num_classes);
  }

  const Probe probe{&input, labels, options.seed ^ 0xD1B54A32D192ED03ULL};

  // Analytic gradients.
  {
    Rng dropout(probe.dropout_seed);
    ForwardTape tape;
    forward_logits(model, input, Mode::kTrain, &dropout, &tape);
    backward(model, tape, labels);
  }
  std::vector<std::uint32_t> base_kinks;
  probe.loss(model, &base_kinks);

  GradCheckReport report;
  report.step = options.step;
  const double h = options.step;
  std::vector<std::uint32_t> kinks_plus, kinks_minus;
  for (auto* block : model.parameters()) {
    GradCheckBlock result{block->name, block->kind, 0.0, 0, 0};
    for (std::size_t i = 0; i < block->size(); ++i) {
      const double saved = block->value[i];
      block->value[i] = saved + h;
      const double plus = probe.loss(model, &kinks_plus);
      block->value[i] = saved - h;
      const double minus = probe.loss(model, &kinks_minus);
      block->value[i] = saved;
      if (kinks_plus != base_kinks || kinks_minus != base_kinks) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = block->grad[i];
      const double denom =
          std::max({std::abs(numeric), std::abs(analytic), kRelativeFloor});
      result.max_relative_error = std::max(result.max_relative_error,
                                           std::abs(numeric - analytic) / denom);
      ++result.checked;
    }
    switch (block->kind) {
      case nn::ParamKind::kConv:
        report.max_conv_error = std::max(report.max_conv_error, result.max_relative_error);
        break;
      case nn::ParamKind::kDense:
        report.max_dense_error = std::max(report.max_dense_error, result.max_relative_error);
        break;
      case nn::ParamKind::kBatchNorm:
        report.max_batchnorm_error =
            std::max(report.max_batchnorm_error, result.max_relative_error);
        break;
    }
    report.blocks.push_back(std::move(result));
  }
  report.passed = report.max_conv_error < options.tolerance &&
                  report.max_dense_error < options.tolerance &&
                  report.max_batchnorm_error < options.batchnorm_tolerance;
  return report;
}

}  // namespace skelact
