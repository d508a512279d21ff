#include "skelact/engine.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "skelact/error.hpp"

namespace skelact {

std::string_view to_string(Averaging mode) {
  return mode == Averaging::kPairwise ? "pairwise" : "cumulative";
}

Averaging parse_averaging(std::string_view text) {
  if (text == "pairwise") return Averaging::kPairwise;
  if (text == "cumulative") return Averaging::kCumulative;
  throw Error(ErrorCode::kInvalidArgument, "unknown averaging mode '" + std::string(text) + "'");
}

std::string_view to_string(SamplingMethod method) {
  return method == SamplingMethod::kMemoryGroup ? "memory-group" : "sliding-window";
}

SamplingMethod parse_sampling_method(std::string_view text) {
  if (text == "memory-group") return SamplingMethod::kMemoryGroup;
  if (text == "sliding-window") return SamplingMethod::kSlidingWindow;
  throw Error(ErrorCode::kInvalidArgument, "unknown sampling method '" + std::string(text) + "'");
}

std::vector<double> average_probabilities(const std::vector<double>* prior,
                                          std::span<const double> p, Averaging mode,
                                          std::size_t steps_so_far) {
  if (!prior) return {p.begin(), p.end()};
  if (prior->size() != p.size()) {
    throw Error(ErrorCode::kShapeMismatch, "probability vectors differ in length");
  }
  std::vector<double> out(p.size());
  if (mode == Averaging::kPairwise) {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = 0.5 * ((*prior)[i] + p[i]);
  } else {
    const double n = static_cast<double>(steps_so_far);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = ((*prior)[i] * n + p[i]) / (n + 1.0);
  }
  return out;
}

int argmax_with_ties(std::span<const double> p, bool* tie) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  if (tie) {
    std::size_t count = 0;
    for (double v : p) {
      if (std::abs(v - p[best]) <= 1e-12) ++count;
    }
    *tie = count > 1;
  }
  return static_cast<int>(best);
}

Engine::Engine(EngineConfig config)
    : config_(std::move(config)), sampler_(config_.method, config_.n) {
  if (!config_.model) throw Error(ErrorCode::kInvalidArgument, "engine needs a model");
  const auto& mc = config_.model->config();
  if (mc.input_frames != config_.n || mc.input_channels != config_.schema.channels()) {
    throw Error(ErrorCode::kShapeMismatch,
                "model expects " + std::to_string(mc.input_frames) + "x" +
                    std::to_string(mc.input_channels) + ", schema/n give " +
                    std::to_string(config_.n) + "x" + std::to_string(config_.schema.channels()));
  }
}

std::optional<Prediction> Engine::step(const SkeletonFrame& frame) {
  validate_frame(frame, config_.schema.topology);
  auto batch = sampler_.push(config_.root_center ? root_center(frame, config_.schema.topology)
                                                 : frame);
  if (!batch) return std::nullopt;

  const auto tensor = assemble_sequence_tensor(batch->frames, config_.schema, config_.n);
  Prediction pred;
  pred.step = batch->step;
  pred.probs_instant = forward(*config_.model, tensor, Mode::kInfer);
  pred.probs_averaged = average_probabilities(averaged_ ? &*averaged_ : nullptr,
                                              pred.probs_instant, config_.averaging, emissions_);
  averaged_ = pred.probs_averaged;
  ++emissions_;
  pred.argmax = argmax_with_ties(pred.probs_averaged, &pred.tie_broken);
  return pred;
}

std::optional<Prediction> Engine::handle(const StreamEvent& event) {
  if (const auto* frame = std::get_if<SkeletonFrame>(&event)) return step(*frame);
  if (config_.reset_on_end) reset();
  return std::nullopt;
}

void Engine::reset() {
  sampler_.reset();
  averaged_.reset();
  emissions_ = 0;
}

std::string prediction_to_json(const Prediction& prediction,
                               std::span<const std::string> class_names) {
  nlohmann::json rec;
  rec["step"] = prediction.step;
  rec["p"] = prediction.probs_instant;
  rec["p_avg"] = prediction.probs_averaged;
  rec["argmax"] = prediction.argmax;
  const auto k = static_cast<std::size_t>(prediction.argmax);
  rec["class"] = k < class_names.size() ? nlohmann::json(class_names[k]) : nlohmann::json(nullptr);
  rec["tie"] = prediction.tie_broken;
  return rec.dump();
}

}  // namespace skelact
