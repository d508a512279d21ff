#include <gtest/gtest.h>

#include <map>

#include "skelact/error.hpp"
#include "skelact/sampler.hpp"

namespace skelact {
namespace {

SkeletonFrame frame(std::int64_t i) {
  SkeletonFrame f;
  f.index = i;
  f.joints = {{static_cast<double>(i), 0, 0}};
  return f;
}

std::vector<std::int64_t> indices(const SampleBatch& b) {
  std::vector<std::int64_t> out;
  for (const auto& f : b.frames) out.push_back(f.index);
  return out;
}

template <typename S>
std::vector<SampleBatch> feed(S& s, std::int64_t from, std::int64_t to) {
  std::vector<SampleBatch> out;
  for (std::int64_t i = from; i < to; ++i) {
    if (auto b = s.push(frame(i))) out.push_back(std::move(*b));
  }
  return out;
}

TEST(Halve, Examples) {
  EXPECT_EQ(halve(std::vector<char>{'a', 'b', 'c', 'd'}), (std::vector<char>{'a', 'c'}));
  EXPECT_EQ(halve(std::vector<char>{'a'}), (std::vector<char>{'a'}));
  EXPECT_EQ(halve(halve(std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7})), (std::vector<int>{0, 4}));
  EXPECT_EQ(halve(std::vector<int>{0, 1, 2, 3, 4}), (std::vector<int>{0, 2, 4}));
  EXPECT_THROW(halve(std::vector<int>{}), Error);
}

TEST(MemoryGroup, HandTraceN4) {
  MemoryGroupSampler s(4);
  EXPECT_EQ(s.step(), -1);
  auto b = feed(s, 0, 4);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(indices(b[0]), (std::vector<std::int64_t>{0, 1, 2, 3}));
  EXPECT_EQ(b[0].step, 0);
  b = feed(s, 4, 8);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(indices(b[0]), (std::vector<std::int64_t>{0, 2, 4, 6}));
  EXPECT_EQ(b[0].step, 1);
  b = feed(s, 8, 12);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(indices(b[0]), (std::vector<std::int64_t>{0, 4, 8, 10}));
  EXPECT_EQ(b[0].step, 2);
  EXPECT_EQ(s.received(), 12u);
}

TEST(MemoryGroup, NoEmissionBeforeNFrames) {
  MemoryGroupSampler s(4);
  EXPECT_TRUE(feed(s, 0, 3).empty());
  EXPECT_EQ(s.queue().size(), 3u);
  EXPECT_TRUE(s.memory().empty());
}

TEST(MemoryGroup, RejectsOddOrTinyN) {
  EXPECT_THROW(MemoryGroupSampler(3), Error);
  EXPECT_THROW(MemoryGroupSampler(0), Error);
}

TEST(MemoryGroup, RejectsOutOfOrder) {
  MemoryGroupSampler s(4);
  s.push(frame(5));
  try {
    s.push(frame(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfOrderFrame);
  }
}

// Per-epoch origin counts: epoch t covers received frames [t*n, (t+1)*n).
std::map<int, int> epoch_counts(const SampleBatch& b, std::size_t n) {
  std::map<int, int> counts;
  for (const auto& f : b.frames) ++counts[static_cast<int>(f.index / static_cast<std::int64_t>(n))];
  return counts;
}

TEST(MemoryGroup, GeometricDecayN16) {
  MemoryGroupSampler s(16);
  const auto batches = feed(s, 0, 16 * 5);
  ASSERT_EQ(batches.size(), 5u);
  for (int T = 0; T <= 4; ++T) {
    const auto& b = batches[static_cast<std::size_t>(T)];
    ASSERT_EQ(b.frames.size(), 16u);
    EXPECT_EQ(b.step, T);
    const auto counts = epoch_counts(b, 16);
    for (int t = 0; t <= T; ++t) {
      const int want = t == 0 ? 16 >> T : 16 >> (T - t + 1);
      EXPECT_EQ(counts.count(t) ? counts.at(t) : 0, want) << "T=" << T << " t=" << t;
    }
  }
  // T = 4: 1, 1, 2, 4, 8 from Q^0 .. Q^4.
  EXPECT_EQ(epoch_counts(batches[4], 16), (std::map<int, int>{{0, 1}, {1, 1}, {2, 2}, {3, 4}, {4, 8}}));
  // T = 2: 25% / 25% / 50%.
  EXPECT_EQ(epoch_counts(batches[2], 16), (std::map<int, int>{{0, 4}, {1, 4}, {2, 8}}));
}

TEST(MemoryGroup, StructuralInvariants) {
  for (std::size_t n : {2u, 4u, 6u, 10u, 16u}) {
    MemoryGroupSampler s(n);
    const auto batches = feed(s, 0, static_cast<std::int64_t>(n * 12 + n / 2));
    ASSERT_EQ(batches.size(), 12u);
    for (std::size_t T = 0; T < batches.size(); ++T) {
      const auto& b = batches[T];
      ASSERT_EQ(b.frames.size(), n);
      EXPECT_EQ(b.step, static_cast<int>(T));
      for (std::size_t i = 1; i < n; ++i) EXPECT_LT(b.frames[i - 1].index, b.frames[i].index);
      EXPECT_EQ(b.frames.front().index, 0);  // anchor retention
      if (T >= 1) {
        std::size_t recent = 0;
        const auto floor = static_cast<std::int64_t>(T * n);
        for (const auto& f : b.frames) recent += f.index >= floor;
        EXPECT_EQ(recent, n / 2);
      }
    }
    // step = floor(received / n) - 1 after each emission.
    EXPECT_EQ(s.step(), static_cast<int>(s.received() / n) - 1);
  }
}

TEST(MemoryGroup, ResetStartsOver) {
  MemoryGroupSampler s(4);
  feed(s, 0, 9);
  s.reset();
  EXPECT_EQ(s.step(), -1);
  EXPECT_EQ(s.received(), 0u);
  const auto b = feed(s, 0, 4);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].step, 0);
}

TEST(SlidingWindow, Examples) {
  SlidingWindowSampler s(4);
  EXPECT_TRUE(feed(s, 0, 3).empty());
  auto b = feed(s, 3, 4);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(indices(b[0]), (std::vector<std::int64_t>{0, 1, 2, 3}));
  b = feed(s, 4, 8);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(indices(b[0]), (std::vector<std::int64_t>{4, 5, 6, 7}));
}

TEST(SlidingWindow, DiscardsLongTermContext) {
  SlidingWindowSampler s(6);
  const auto batches = feed(s, 0, 60);
  ASSERT_EQ(batches.size(), 10u);
  for (std::size_t T = 0; T < batches.size(); ++T) {
    const auto received = static_cast<std::int64_t>((T + 1) * 6);
    for (const auto& f : batches[T].frames) EXPECT_GT(f.index, received - 6 - 1);
  }
}

TEST(SlidingWindow, RejectsOutOfOrder) {
  SlidingWindowSampler s(4);
  s.push(frame(2));
  EXPECT_THROW(s.push(frame(1)), Error);
}

TEST(FrameSampler, DispatchesByMethod) {
  FrameSampler mg(SamplingMethod::kMemoryGroup, 4);
  FrameSampler sw(SamplingMethod::kSlidingWindow, 4);
  std::optional<SampleBatch> a, b;
  for (std::int64_t i = 0; i < 8; ++i) {
    a = mg.push(frame(i));
    b = sw.push(frame(i));
  }
  EXPECT_EQ(indices(*a), (std::vector<std::int64_t>{0, 2, 4, 6}));
  EXPECT_EQ(indices(*b), (std::vector<std::int64_t>{4, 5, 6, 7}));
  EXPECT_EQ(mg.method(), SamplingMethod::kMemoryGroup);
  EXPECT_EQ(sw.n(), 4u);
}

}  // namespace
}  // namespace skelact
