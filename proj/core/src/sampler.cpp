#include "skelact/sampler.hpp"

#include <string>
#include <utility>

namespace skelact {
namespace {

void check_order(std::optional<std::int64_t>& last, std::int64_t index) {
  if (last && index <= *last) {
    throw Error(ErrorCode::kOutOfOrderFrame,
                "frame index " + std::to_string(index) + " after " + std::to_string(*last));
  }
  last = index;
}

}  // namespace

MemoryGroupSampler::MemoryGroupSampler(std::size_t n) : n_(n) {
  if (n < 2 || n % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample size must be even and >= 2");
  }
  queue_.reserve(n);
}

std::optional<SampleBatch> MemoryGroupSampler::push(SkeletonFrame frame) {
  check_order(last_index_, frame.index);
  queue_.push_back(std::move(frame));
  ++received_;
  if (queue_.size() < n_) return std::nullopt;

  SampleBatch batch;
  if (memory_.empty()) {
    batch.frames = std::move(queue_);
  } else {
    batch.frames = halve(memory_);
    auto recent = halve(queue_);
    batch.frames.insert(batch.frames.end(), std::make_move_iterator(recent.begin()),
                        std::make_move_iterator(recent.end()));
  }
  queue_.clear();
  queue_.reserve(n_);
  ++step_;
  batch.step = step_;
  memory_ = batch.frames;
  return batch;
}

void MemoryGroupSampler::reset() {
  queue_.clear();
  memory_.clear();
  step_ = -1;
  received_ = 0;
  last_index_.reset();
}

SlidingWindowSampler::SlidingWindowSampler(std::size_t n) : n_(n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "window size must be positive");
  buffer_.reserve(n);
}

std::optional<SampleBatch> SlidingWindowSampler::push(SkeletonFrame frame) {
  check_order(last_index_, frame.index);
  if (buffer_.size() < n_) {
    buffer_.push_back(std::move(frame));
  } else {
    buffer_[head_] = std::move(frame);
    head_ = (head_ + 1) % n_;
  }
  ++received_;
  if (received_ % n_ != 0) return std::nullopt;

  SampleBatch batch;
  batch.frames.reserve(n_);
  for (std::size_t k = 0; k < n_; ++k) batch.frames.push_back(buffer_[(head_ + k) % n_]);
  ++step_;
  batch.step = step_;
  return batch;
}

void SlidingWindowSampler::reset() {
  buffer_.clear();
  head_ = 0;
  step_ = -1;
  received_ = 0;
  last_index_.reset();
}

FrameSampler::FrameSampler(SamplingMethod method, std::size_t n)
    : impl_(method == SamplingMethod::kMemoryGroup
                ? decltype(impl_){MemoryGroupSampler(n)}
                : decltype(impl_){SlidingWindowSampler(n)}) {}

std::optional<SampleBatch> FrameSampler::push(SkeletonFrame frame) {
  return std::visit([&frame](auto& s) { return s.push(std::move(frame)); }, impl_);
}

void FrameSampler::reset() {
  std::visit([](auto& s) { s.reset(); }, impl_);
}

SamplingMethod FrameSampler::method() const {
  return std::holds_alternative<MemoryGroupSampler>(impl_) ? SamplingMethod::kMemoryGroup
                                                           : SamplingMethod::kSlidingWindow;
}

std::size_t FrameSampler::n() const {
  return std::visit([](const auto& s) { return s.n(); }, impl_);
}

}  // namespace skelact
