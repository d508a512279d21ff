#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "skelact/classifier.hpp"
#include "skelact/error.hpp"

namespace skelact {
namespace {

using nn::Activations;
using nn::Layer;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate_model_config(const ModelConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (c.input_frames == 0 || c.input_channels == 0 || c.num_classes == 0 ||
      c.base_filters == 0 || c.fc_width == 0) {
    fail("model dimensions must be positive");
  }
  if (c.conv_kernel != 3) fail("conv_kernel must be 3");
  if (c.pool_stride != 2) fail("pool_stride must be 2");
  if (c.input_frames < c.pool_stride * c.pool_stride) fail("input_frames too small for two poolings");
  if (!(c.spatial_dropout >= 0.0 && c.spatial_dropout < 1.0)) fail("dropout must be in [0,1)");
  if (c.activation != "leaky_relu") fail("unsupported activation '" + c.activation + "'");
  if (!(c.leaky_slope >= 0.0 && c.leaky_slope < 1.0)) fail("leaky slope must be in [0,1)");
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  validate_model_config(config_);
  Rng rng(config_.seed);
  const double slope = config_.leaky_slope;
  auto he_limit = [slope](std::size_t fan_in) {
    return std::sqrt(6.0 / ((1.0 + slope * slope) * static_cast<double>(fan_in)));
  };

  const std::size_t f = config_.base_filters;
  const std::size_t widths[3] = {f, 2 * f, 4 * f};
  std::size_t in = config_.input_channels;
  int conv_id = 0;
  for (int block = 0; block < 3; ++block) {
    for (int rep = 0; rep < 2; ++rep) {
      const std::string name = "conv" + std::to_string(++conv_id);
      nn::Conv1d conv(name, in, widths[block], config_.conv_kernel,
                      he_limit(config_.conv_kernel * in), rng);
      conv.needs_input_grad = conv_id > 1;
      layers_.emplace_back(std::move(conv));
      layers_.emplace_back(nn::BatchNorm1d("bn" + std::to_string(conv_id), widths[block]));
      layers_.emplace_back(nn::LeakyRelu{slope});
      in = widths[block];
    }
    if (block < 2) layers_.emplace_back(nn::MaxPool1d{config_.pool_stride});
  }
  layers_.emplace_back(nn::SpatialDropout1d{config_.spatial_dropout});
  layers_.emplace_back(nn::GlobalAvgPool1d{});
  layers_.emplace_back(nn::Dense("fc", in, config_.fc_width, he_limit(in), rng));
  layers_.emplace_back(nn::LeakyRelu{slope});
  layers_.emplace_back(nn::Dense("classes", config_.fc_width, config_.num_classes, 0.0, rng));
}

std::vector<nn::ParamBlock*> Model::parameters() {
  std::vector<nn::ParamBlock*> out;
  for (auto& layer : layers_) {
    std::visit(overloaded{[&](nn::Conv1d& l) { out.push_back(&l.weight); },
                          [&](nn::BatchNorm1d& l) {
                            out.push_back(&l.gamma);
                            out.push_back(&l.beta);
                          },
                          [&](nn::Dense& l) {
                            out.push_back(&l.weight);
                            out.push_back(&l.bias);
                          },
                          [](auto&) {}},
               layer);
  }
  return out;
}

std::vector<const nn::ParamBlock*> Model::parameters() const {
  auto mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

void Model::zero_grad() {
  for (auto* p : parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

Activations make_batch(std::span<const SequenceFeatureTensor> tensors) {
  if (tensors.empty()) throw Error(ErrorCode::kEmptyBatch, "no tensors in batch");
  const auto& first = tensors.front();
  Activations x(tensors.size(), first.frames, first.channels);
  for (std::size_t b = 0; b < tensors.size(); ++b) {
    const auto& t = tensors[b];
    if (t.frames != first.frames || t.channels != first.channels) {
      throw Error(ErrorCode::kShapeMismatch, "tensors in a batch differ in shape");
    }
    std::copy(t.values.begin(), t.values.end(), x.row(b, 0));
  }
  return x;
}

Activations forward_logits(const Model& model, const Activations& input, Mode mode, Rng* rng,
                           ForwardTape* tape) {
  const auto& cfg = model.config();
  if (input.time != cfg.input_frames || input.channels != cfg.input_channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "input is " + std::to_string(input.time) + "x" + std::to_string(input.channels) +
                    ", model expects " + std::to_string(cfg.input_frames) + "x" +
                    std::to_string(cfg.input_channels));
  }
  for (double v : input.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, "non-finite model input");
  }
  if (tape) {
    tape->caches.assign(model.layers().size(), {});
    tape->kinks.clear();
  }
  Activations x = input;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    nn::LayerCache* cache = tape ? &tape->caches[i] : nullptr;
    x = std::visit([&](const auto& l) { return l.forward(x, mode, cache, rng); },
                   model.layers()[i]);
    if (tape && std::holds_alternative<nn::LeakyRelu>(model.layers()[i])) {
      for (double v : cache->input.data) tape->kinks.push_back(v > 0.0 ? 1u : 0u);
    } else if (tape && std::holds_alternative<nn::MaxPool1d>(model.layers()[i])) {
      tape->kinks.insert(tape->kinks.end(), cache->index.begin(), cache->index.end());
    }
  }
  if (tape) {
    tape->logits = x;
  }
  return x;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<double> forward(const Model& model, const SequenceFeatureTensor& tensor, Mode mode,
                            Rng* rng) {
  Activations x(1, tensor.frames, tensor.channels);
  if (tensor.values.size() != tensor.frames * tensor.channels) {
    throw Error(ErrorCode::kShapeMismatch, "tensor storage does not match its shape");
  }
  x.data = tensor.values;
  const Activations logits = forward_logits(model, x, mode, rng, nullptr);
  return softmax(logits.data);
}

double cross_entropy(const Activations& logits, std::span<const int> labels) {
  const std::size_t k = logits.channels;
  double total = 0.0;
  for (std::size_t b = 0; b < logits.batch; ++b) {
    const double* z = logits.row(b, 0);
    const double mx = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(z[c] - mx);
    total += mx + std::log(sum) - z[labels[b]];
  }
  return total / static_cast<double>(logits.batch);
}

void backward(Model& model, const ForwardTape& tape, std::span<const int> labels) {
  model.zero_grad();
  const Activations& logits = tape.logits;
  const std::size_t k = logits.channels;
  Activations grad(logits.batch, 1, k);
  const double inv_b = 1.0 / static_cast<double>(logits.batch);
  for (std::size_t b = 0; b < logits.batch; ++b) {
    const auto p = softmax(std::span<const double>(logits.row(b, 0), k));
    double* g = grad.row(b, 0);
    for (std::size_t c = 0; c < k; ++c) {
      g[c] = (p[c] - (static_cast<int>(c) == labels[b] ? 1.0 : 0.0)) * inv_b;
    }
  }
  auto& layers = model.layers();
  for (std::size_t i = layers.size(); i-- > 0;) {
    grad = std::visit([&](auto& l) { return l.backward(tape.caches[i], grad); }, layers[i]);
  }
}

void adam_update(Model& model, double lr, const AdamConfig& adam) {
  const std::uint64_t t = model.adam_step() + 1;
  model.set_adam_step(t);
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(t));
  for (auto* p : model.parameters()) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      p->adam_m[i] = adam.beta1 * p->adam_m[i] + (1.0 - adam.beta1) * g;
      p->adam_v[i] = adam.beta2 * p->adam_v[i] + (1.0 - adam.beta2) * g * g;
      const double mhat = p->adam_m[i] / c1;
      const double vhat = p->adam_v[i] / c2;
      p->value[i] -= lr * mhat / (std::sqrt(vhat) + adam.epsilon);
    }
  }
}

double backward_and_step(Model& model, std::span<const LabeledTensor> batch, double lr, Rng& rng,
                         const AdamConfig& adam) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "empty training batch");
  std::vector<SequenceFeatureTensor> tensors;
  std::vector<int> labels;
  tensors.reserve(batch.size());
  labels.reserve(batch.size());
  for (const auto& item : batch) {
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= model.config().num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(item.label));
    }
    tensors.push_back(item.tensor);
    labels.push_back(item.label);
  }
  ForwardTape tape;
  forward_logits(model, make_batch(tensors), Mode::kTrain, &rng, &tape);
  const double loss = cross_entropy(tape.logits, labels);
  if (!std::isfinite(loss)) throw Error(ErrorCode::kNumericFailure, "non-finite training loss");
  backward(model, tape, labels);
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    if (auto* bn = std::get_if<nn::BatchNorm1d>(&model.layers()[i])) {
      bn->commit_running_stats(tape.caches[i]);
    }
  }
  adam_update(model, lr, adam);
  return loss;
}

}  // namespace skelact
