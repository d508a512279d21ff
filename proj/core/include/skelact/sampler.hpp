#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "skelact/error.hpp"
#include "skelact/skeleton.hpp"

namespace skelact {

struct SampleBatch {
  std::vector<SkeletonFrame> frames;
  int step = 0;
};

// Deterministic 50% sampling: keeps positions 0, 2, 4, ... (ceil(m/2) items).
template <typename T>
std::vector<T> halve(std::span<const T> items) {
  if (items.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot halve an empty list");
  std::vector<T> out;
  out.reserve((items.size() + 1) / 2);
  for (std::size_t i = 0; i < items.size(); i += 2) out.push_back(items[i]);
  return out;
}

template <typename T>
std::vector<T> halve(const std::vector<T>& items) {
  return halve(std::span<const T>(items));
}

// Memory group sampling. Every n received frames the sampler emits a batch of
// n frames: the first batch is the queue itself, later batches are
// halve(memory) ++ halve(queue), and the memory group is replaced by the
// emitted batch. Older blocks therefore decay geometrically in the batch.
class MemoryGroupSampler {
 public:
  explicit MemoryGroupSampler(std::size_t n);

  std::optional<SampleBatch> push(SkeletonFrame frame);
  void reset();

  std::size_t n() const { return n_; }
  // Sampling counter T of the most recent emission; -1 before the first.
  int step() const { return step_; }
  std::uint64_t received() const { return received_; }
  const std::vector<SkeletonFrame>& queue() const { return queue_; }
  const std::vector<SkeletonFrame>& memory() const { return memory_; }

 private:
  std::size_t n_;
  std::vector<SkeletonFrame> queue_;
  std::vector<SkeletonFrame> memory_;
  int step_ = -1;
  std::uint64_t received_ = 0;
  std::optional<std::int64_t> last_index_;
};

// Fixed-size sliding window baseline with the same emission cadence (every
// n-th push) as MemoryGroupSampler.
class SlidingWindowSampler {
 public:
  explicit SlidingWindowSampler(std::size_t n);

  std::optional<SampleBatch> push(SkeletonFrame frame);
  void reset();

  std::size_t n() const { return n_; }
  int step() const { return step_; }
  std::uint64_t received() const { return received_; }
  const std::vector<SkeletonFrame>& buffer() const { return buffer_; }

 private:
  std::size_t n_;
  std::vector<SkeletonFrame> buffer_;  // ring, oldest at head_
  std::size_t head_ = 0;
  int step_ = -1;
  std::uint64_t received_ = 0;
  std::optional<std::int64_t> last_index_;
};

enum class SamplingMethod { kMemoryGroup, kSlidingWindow };

// Runtime-selectable sampler; both alternatives are value types.
class FrameSampler {
 public:
  FrameSampler(SamplingMethod method, std::size_t n);

  std::optional<SampleBatch> push(SkeletonFrame frame);
  void reset();
  SamplingMethod method() const;
  std::size_t n() const;

 private:
  std::variant<MemoryGroupSampler, SlidingWindowSampler> impl_;
};

}  // namespace skelact
