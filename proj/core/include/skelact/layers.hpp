#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "skelact/random.hpp"

namespace skelact::nn {

enum class Mode { kTrain, kInfer };

// Dense (batch, time, channels) activations, channel fastest.
struct Activations {
  std::size_t batch = 0;
  std::size_t time = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  Activations() = default;
  Activations(std::size_t b, std::size_t t, std::size_t c)
      : batch(b), time(t), channels(c), data(b * t * c, 0.0) {}

  double* row(std::size_t b, std::size_t t) { return data.data() + (b * time + t) * channels; }
  const double* row(std::size_t b, std::size_t t) const {
    return data.data() + (b * time + t) * channels;
  }
};

enum class ParamKind { kConv, kBatchNorm, kDense };

// A trainable tensor together with its gradient and Adam moments.
struct ParamBlock {
  std::string name;
  ParamKind kind = ParamKind::kDense;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> adam_m;
  std::vector<double> adam_v;

  ParamBlock() = default;
  ParamBlock(std::string n, ParamKind k, std::vector<std::size_t> s);
  std::size_t size() const { return value.size(); }
};

// Per-layer record of what backward needs.
struct LayerCache {
  Activations input;
  std::vector<double> aux;
  std::vector<std::uint32_t> index;
};

// Same-padded 1D convolution without bias (a batch norm always follows).
// Weight layout [kernel][in][out].
struct Conv1d {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 3;
  bool needs_input_grad = true;
  ParamBlock weight;

  Conv1d() = default;
  Conv1d(std::string name, std::size_t in, std::size_t out, std::size_t kernel,
         double init_limit, Rng& rng);

  Activations forward(const Activations& x, Mode mode, LayerCache* cache, Rng* rng) const;
  Activations backward(const LayerCache& cache, const Activations& dy);
};

// Normalizes each channel over batch and time.
struct BatchNorm1d {
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.9;

  std::size_t channels = 0;
  ParamBlock gamma;
  ParamBlock beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;

  BatchNorm1d() = default;
  BatchNorm1d(std::string name, std::size_t channels);

  Activations forward(const Activations& x, Mode mode, LayerCache* cache, Rng* rng) const;
  Activations backward(const LayerCache& cache, const Activations& dy);
  // Folds the batch statistics recorded in a train-mode cache into the
  // running estimates.
  void commit_running_stats(const LayerCache& cache);
};

struct LeakyRelu {
  double slope = 0.1;

  Activations forward(const Activations& x, Mode mode, LayerCache* cache, Rng* rng) const;
  Activations backward(const LayerCache& cache, const Activations& dy);
};

// Max over non-overlapping windows of `stride` time steps (floor).
struct MaxPool1d {
  std::size_t stride = 2;

  Activations forward(const Activations& x, Mode mode, LayerCache* cache, Rng* rng) const;
  Activations backward(const LayerCache& cache, const Activations& dy);
};

// Zeroes whole channels of a sample; identity at inference.
struct SpatialDropout1d {
  double rate = 0.1;

  Activations forward(const Activations& x, Mode mode, LayerCache* cache, Rng* rng) const;
  Activations backward(const LayerCache& cache, const Activations& dy);
};

struct GlobalAvgPool1d {
  Activations forward(const Activations& x, Mode mode, LayerCache* cache, Rng* rng) const;
  Activations backward(const LayerCache& cache, const Activations& dy);
};

// Fully connected over channels; expects time == 1. Weight layout [in][out].
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
  ParamBlock weight;
  ParamBlock bias;

  Dense() = default;
  Dense(std::string name, std::size_t in, std::size_t out, double init_limit, Rng& rng);

  Activations forward(const Activations& x, Mode mode, LayerCache* cache, Rng* rng) const;
  Activations backward(const LayerCache& cache, const Activations& dy);
};

using Layer = std::variant<Conv1d, BatchNorm1d, LeakyRelu, MaxPool1d,
                           SpatialDropout1d, GlobalAvgPool1d, Dense>;

}  // namespace skelact::nn
