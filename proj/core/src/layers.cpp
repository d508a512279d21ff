#include "skelact/layers.hpp"

#include <algorithm>
#include <cmath>

#include "skelact/error.hpp"

namespace skelact::nn {
namespace {

void fill_uniform(std::vector<double>& v, double limit, Rng& rng) {
  for (auto& x : v) x = rng.uniform(-limit, limit);
}

void remember(LayerCache* cache, const Activations& x) {
  if (cache) cache->input = x;
}

}  // namespace

ParamBlock::ParamBlock(std::string n, ParamKind k, std::vector<std::size_t> s)
    : name(std::move(n)), kind(k), shape(std::move(s)) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  value.assign(count, 0.0);
  grad.assign(count, 0.0);
  adam_m.assign(count, 0.0);
  adam_v.assign(count, 0.0);
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t k,
               double init_limit, Rng& rng)
    : in(in_ch),
      out(out_ch),
      kernel(k),
      weight(std::move(name), ParamKind::kConv, {k, in_ch, out_ch}) {
  fill_uniform(weight.value, init_limit, rng);
}

Activations Conv1d::forward(const Activations& x, Mode, LayerCache* cache, Rng*) const {
  if (x.channels != in) throw Error(ErrorCode::kShapeMismatch, "conv input channels");
  remember(cache, x);
  Activations y(x.batch, x.time, out);
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const auto steps = static_cast<std::ptrdiff_t>(x.time);
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::ptrdiff_t t = 0; t < steps; ++t) {
      double* yr = y.row(b, static_cast<std::size_t>(t));
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - pad;
        if (src < 0 || src >= steps) continue;
        const double* xr = x.row(b, static_cast<std::size_t>(src));
        const double* wk = weight.value.data() + k * in * out;
        for (std::size_t i = 0; i < in; ++i) {
          const double xi = xr[i];
          const double* wr = wk + i * out;
          for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
        }
      }
    }
  }
  return y;
}

Activations Conv1d::backward(const LayerCache& cache, const Activations& dy) {
  const Activations& x = cache.input;
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const auto steps = static_cast<std::ptrdiff_t>(x.time);

  // dW[k][i][o] += x[src][i] * dy[t][o]
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::ptrdiff_t t = 0; t < steps; ++t) {
      const double* dyr = dy.row(b, static_cast<std::size_t>(t));
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - pad;
        if (src < 0 || src >= steps) continue;
        const double* xr = x.row(b, static_cast<std::size_t>(src));
        double* gk = weight.grad.data() + k * in * out;
        for (std::size_t i = 0; i < in; ++i) {
          const double xi = xr[i];
          double* gr = gk + i * out;
          for (std::size_t o = 0; o < out; ++o) gr[o] += xi * dyr[o];
        }
      }
    }
  }

  Activations dx(x.batch, x.time, in);
  if (!needs_input_grad) return dx;

  // Transposed copy [k][out][in] keeps the input-gradient loop contiguous.
  std::vector<double> wt(weight.value.size());
  for (std::size_t k = 0; k < kernel; ++k) {
    for (std::size_t i = 0; i < in; ++i) {
      for (std::size_t o = 0; o < out; ++o) {
        wt[(k * out + o) * in + i] = weight.value[(k * in + i) * out + o];
      }
    }
  }
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::ptrdiff_t t = 0; t < steps; ++t) {
      const double* dyr = dy.row(b, static_cast<std::size_t>(t));
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - pad;
        if (src < 0 || src >= steps) continue;
        double* dxr = dx.row(b, static_cast<std::size_t>(src));
        const double* wk = wt.data() + k * out * in;
        for (std::size_t o = 0; o < out; ++o) {
          const double g = dyr[o];
          const double* wr = wk + o * in;
          for (std::size_t i = 0; i < in; ++i) dxr[i] += g * wr[i];
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm1d

BatchNorm1d::BatchNorm1d(std::string name, std::size_t c)
    : channels(c),
      gamma(name + ".gamma", ParamKind::kBatchNorm, {c}),
      beta(name + ".beta", ParamKind::kBatchNorm, {c}),
      running_mean(c, 0.0),
      running_var(c, 1.0) {
  std::fill(gamma.value.begin(), gamma.value.end(), 1.0);
}

Activations BatchNorm1d::forward(const Activations& x, Mode mode, LayerCache* cache,
                                 Rng*) const {
  if (x.channels != channels) throw Error(ErrorCode::kShapeMismatch, "batch norm channels");
  Activations y(x.batch, x.time, channels);
  const std::size_t rows = x.batch * x.time;
  const std::size_t c = channels;

  if (mode == Mode::kInfer) {
    std::vector<double> scale(c), shift(c);
    for (std::size_t k = 0; k < c; ++k) {
      scale[k] = gamma.value[k] / std::sqrt(running_var[k] + kEpsilon);
      shift[k] = beta.value[k] - running_mean[k] * scale[k];
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = x.data.data() + r * c;
      double* yr = y.data.data() + r * c;
      for (std::size_t k = 0; k < c; ++k) yr[k] = xr[k] * scale[k] + shift[k];
    }
    remember(cache, x);
    return y;
  }

  std::vector<double> mean(c, 0.0), var(c, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * c;
    for (std::size_t k = 0; k < c; ++k) mean[k] += xr[k];
  }
  for (auto& m : mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * c;
    for (std::size_t k = 0; k < c; ++k) {
      const double d = xr[k] - mean[k];
      var[k] += d * d;
    }
  }
  for (auto& v : var) v /= static_cast<double>(rows);

  std::vector<double> inv(c);
  for (std::size_t k = 0; k < c; ++k) inv[k] = 1.0 / std::sqrt(var[k] + kEpsilon);

  std::vector<double> xhat(rows * c);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * c;
    double* hr = xhat.data() + r * c;
    double* yr = y.data.data() + r * c;
    for (std::size_t k = 0; k < c; ++k) {
      hr[k] = (xr[k] - mean[k]) * inv[k];
      yr[k] = gamma.value[k] * hr[k] + beta.value[k];
    }
  }
  if (cache) {
    cache->input = Activations{};
    cache->input.batch = x.batch;
    cache->input.time = x.time;
    cache->input.channels = c;
    // aux = [xhat | inv | mean | var]
    cache->aux = std::move(xhat);
    cache->aux.insert(cache->aux.end(), inv.begin(), inv.end());
    cache->aux.insert(cache->aux.end(), mean.begin(), mean.end());
    cache->aux.insert(cache->aux.end(), var.begin(), var.end());
  }
  return y;
}

Activations BatchNorm1d::backward(const LayerCache& cache, const Activations& dy) {
  const std::size_t c = channels;
  const std::size_t rows = dy.batch * dy.time;
  const double m = static_cast<double>(rows);
  const double* xhat = cache.aux.data();
  const double* inv = cache.aux.data() + rows * c;

  std::vector<double> sum_dxhat(c, 0.0), sum_dxhat_xhat(c, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = dy.data.data() + r * c;
    const double* h = xhat + r * c;
    for (std::size_t k = 0; k < c; ++k) {
      beta.grad[k] += g[k];
      gamma.grad[k] += g[k] * h[k];
      const double dh = g[k] * gamma.value[k];
      sum_dxhat[k] += dh;
      sum_dxhat_xhat[k] += dh * h[k];
    }
  }
  Activations dx(dy.batch, dy.time, c);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = dy.data.data() + r * c;
    const double* h = xhat + r * c;
    double* out = dx.data.data() + r * c;
    for (std::size_t k = 0; k < c; ++k) {
      const double dh = g[k] * gamma.value[k];
      out[k] = inv[k] / m * (m * dh - sum_dxhat[k] - h[k] * sum_dxhat_xhat[k]);
    }
  }
  return dx;
}

void BatchNorm1d::commit_running_stats(const LayerCache& cache) {
  const std::size_t c = channels;
  const std::size_t rows = cache.input.batch * cache.input.time;
  if (cache.aux.size() != rows * c + 3 * c) return;
  const double* mean = cache.aux.data() + rows * c + c;
  const double* var = mean + c;
  const double unbias = rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
  for (std::size_t k = 0; k < c; ++k) {
    running_mean[k] = kMomentum * running_mean[k] + (1.0 - kMomentum) * mean[k];
    running_var[k] = kMomentum * running_var[k] + (1.0 - kMomentum) * var[k] * unbias;
  }
}

// ---------------------------------------------------------------------------
// LeakyRelu

Activations LeakyRelu::forward(const Activations& x, Mode, LayerCache* cache, Rng*) const {
  remember(cache, x);
  Activations y = x;
  for (auto& v : y.data) v = v > 0.0 ? v : slope * v;
  return y;
}

Activations LeakyRelu::backward(const LayerCache& cache, const Activations& dy) {
  Activations dx = dy;
  const auto& x = cache.input.data;
  for (std::size_t i = 0; i < dx.data.size(); ++i) {
    if (!(x[i] > 0.0)) dx.data[i] *= slope;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPool1d

Activations MaxPool1d::forward(const Activations& x, Mode, LayerCache* cache, Rng*) const {
  const std::size_t steps = x.time / stride;
  if (steps == 0) throw Error(ErrorCode::kShapeMismatch, "sequence too short to pool");
  Activations y(x.batch, steps, x.channels);
  std::vector<std::uint32_t> arg;
  if (cache) {
    cache->input = Activations{};
    cache->input.batch = x.batch;
    cache->input.time = x.time;
    cache->input.channels = x.channels;
    arg.resize(y.data.size());
  }
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      double* yr = y.row(b, t);
      const double* first = x.row(b, t * stride);
      std::copy_n(first, x.channels, yr);
      std::uint32_t* ar = cache ? arg.data() + (b * steps + t) * x.channels : nullptr;
      if (ar) std::fill_n(ar, x.channels, static_cast<std::uint32_t>(t * stride));
      for (std::size_t s = 1; s < stride; ++s) {
        const double* xr = x.row(b, t * stride + s);
        for (std::size_t c = 0; c < x.channels; ++c) {
          if (xr[c] > yr[c]) {
            yr[c] = xr[c];
            if (ar) ar[c] = static_cast<std::uint32_t>(t * stride + s);
          }
        }
      }
    }
  }
  if (cache) cache->index = std::move(arg);
  return y;
}

Activations MaxPool1d::backward(const LayerCache& cache, const Activations& dy) {
  const auto& shape = cache.input;
  Activations dx(shape.batch, shape.time, shape.channels);
  for (std::size_t b = 0; b < dy.batch; ++b) {
    for (std::size_t t = 0; t < dy.time; ++t) {
      const double* g = dy.row(b, t);
      const std::uint32_t* ar = cache.index.data() + (b * dy.time + t) * dy.channels;
      for (std::size_t c = 0; c < dy.channels; ++c) dx.row(b, ar[c])[c] += g[c];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// SpatialDropout1d

Activations SpatialDropout1d::forward(const Activations& x, Mode mode, LayerCache* cache,
                                      Rng* rng) const {
  if (mode == Mode::kInfer || rate <= 0.0) {
    if (cache) cache->aux.assign(x.batch * x.channels, 1.0);
    return x;
  }
  if (!rng) throw Error(ErrorCode::kInvalidArgument, "train-mode dropout needs a generator");
  const double keep = 1.0 - rate;
  std::vector<double> scale(x.batch * x.channels);
  for (auto& s : scale) s = rng->uniform() < keep ? 1.0 / keep : 0.0;
  Activations y = x;
  for (std::size_t b = 0; b < x.batch; ++b) {
    const double* sb = scale.data() + b * x.channels;
    for (std::size_t t = 0; t < x.time; ++t) {
      double* yr = y.row(b, t);
      for (std::size_t c = 0; c < x.channels; ++c) yr[c] *= sb[c];
    }
  }
  if (cache) cache->aux = std::move(scale);
  return y;
}

Activations SpatialDropout1d::backward(const LayerCache& cache, const Activations& dy) {
  Activations dx = dy;
  for (std::size_t b = 0; b < dy.batch; ++b) {
    const double* sb = cache.aux.data() + b * dy.channels;
    for (std::size_t t = 0; t < dy.time; ++t) {
      double* r = dx.row(b, t);
      for (std::size_t c = 0; c < dy.channels; ++c) r[c] *= sb[c];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool1d

Activations GlobalAvgPool1d::forward(const Activations& x, Mode, LayerCache* cache,
                                     Rng*) const {
  if (cache) {
    cache->input = Activations{};
    cache->input.batch = x.batch;
    cache->input.time = x.time;
    cache->input.channels = x.channels;
  }
  Activations y(x.batch, 1, x.channels);
  const double inv_t = 1.0 / static_cast<double>(x.time);
  for (std::size_t b = 0; b < x.batch; ++b) {
    double* yr = y.row(b, 0);
    for (std::size_t t = 0; t < x.time; ++t) {
      const double* xr = x.row(b, t);
      for (std::size_t c = 0; c < x.channels; ++c) yr[c] += xr[c];
    }
    for (std::size_t c = 0; c < x.channels; ++c) yr[c] *= inv_t;
  }
  return y;
}

Activations GlobalAvgPool1d::backward(const LayerCache& cache, const Activations& dy) {
  const auto& shape = cache.input;
  Activations dx(shape.batch, shape.time, shape.channels);
  const double inv_t = 1.0 / static_cast<double>(shape.time);
  for (std::size_t b = 0; b < shape.batch; ++b) {
    const double* g = dy.row(b, 0);
    for (std::size_t t = 0; t < shape.time; ++t) {
      double* r = dx.row(b, t);
      for (std::size_t c = 0; c < shape.channels; ++c) r[c] = g[c] * inv_t;
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string name, std::size_t in_features, std::size_t out_features,
             double init_limit, Rng& rng)
    : in(in_features),
      out(out_features),
      weight(name + ".weight", ParamKind::kDense, {in_features, out_features}),
      bias(name + ".bias", ParamKind::kDense, {out_features}) {
  if (init_limit > 0.0) fill_uniform(weight.value, init_limit, rng);
}

Activations Dense::forward(const Activations& x, Mode, LayerCache* cache, Rng*) const {
  if (x.channels != in || x.time != 1) throw Error(ErrorCode::kShapeMismatch, "dense input");
  remember(cache, x);
  Activations y(x.batch, 1, out);
  for (std::size_t b = 0; b < x.batch; ++b) {
    const double* xr = x.row(b, 0);
    double* yr = y.row(b, 0);
    std::copy(bias.value.begin(), bias.value.end(), yr);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      const double* wr = weight.value.data() + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
    }
  }
  return y;
}

Activations Dense::backward(const LayerCache& cache, const Activations& dy) {
  const Activations& x = cache.input;
  Activations dx(x.batch, 1, in);
  for (std::size_t b = 0; b < x.batch; ++b) {
    const double* xr = x.row(b, 0);
    const double* g = dy.row(b, 0);
    double* dxr = dx.row(b, 0);
    for (std::size_t o = 0; o < out; ++o) bias.grad[o] += g[o];
    for (std::size_t i = 0; i < in; ++i) {
      double* gw = weight.grad.data() + i * out;
      const double* wr = weight.value.data() + i * out;
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o) {
        gw[o] += xr[i] * g[o];
        acc += wr[o] * g[o];
      }
      dxr[i] = acc;
    }
  }
  return dx;
}

}  // namespace skelact::nn
