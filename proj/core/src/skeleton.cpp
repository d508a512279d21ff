#include "skelact/skeleton.hpp"

#include <cmath>
#include <string>

#include "skelact/error.hpp"

namespace skelact {

void validate_frame(const SkeletonFrame& frame, const Topology& topology) {
  if (frame.joints.size() != topology.joint_count()) {
    throw Error(ErrorCode::kJointCountMismatch,
                "frame " + std::to_string(frame.index) + " has " +
                    std::to_string(frame.joints.size()) + " joints, expected " +
                    std::to_string(topology.joint_count()));
  }
  for (const auto& g : frame.joints) {
    if (!is_finite(g)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "frame " + std::to_string(frame.index) + " has a non-finite coordinate");
    }
  }
}

std::vector<std::size_t> resample_indices(std::size_t frame_count,
                                          std::size_t n) {
  if (frame_count == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot resample an empty sequence");
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "resample count must be positive");
  std::vector<std::size_t> out(n, 0);
  if (n == 1) return out;
  // Exact rational grid position i*(K-1)/(n-1); ties round down.
  const std::size_t span = frame_count - 1;
  const std::size_t den = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t num = i * span;
    std::size_t idx = num / den;
    if (2 * (num % den) > den) ++idx;
    out[i] = idx;
  }
  return out;
}

SkeletonSequence resample_sequence(const SkeletonSequence& seq, std::size_t n) {
  SkeletonSequence out;
  out.label = seq.label;
  out.subject = seq.subject;
  out.meta = seq.meta;
  out.frames.reserve(n);
  for (std::size_t idx : resample_indices(seq.frames.size(), n)) {
    out.frames.push_back(seq.frames[idx]);
  }
  return out;
}

SkeletonFrame apply_rigid_transform(const SkeletonFrame& frame,
                                    const Mat3& rotation,
                                    const Vec3& translation) {
  constexpr double kTol = 1e-9;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += rotation[k][r] * rotation[k][c];
      if (std::abs(s - (r == c ? 1.0 : 0.0)) > kTol) {
        throw Error(ErrorCode::kInvalidArgument, "rotation is not orthonormal");
      }
    }
  }
  if (std::abs(determinant(rotation) - 1.0) > kTol) {
    throw Error(ErrorCode::kInvalidArgument, "rotation determinant is not +1");
  }
  SkeletonFrame out;
  out.index = frame.index;
  out.joints.reserve(frame.joints.size());
  for (const auto& g : frame.joints) out.joints.push_back(rotation * g + translation);
  return out;
}

SkeletonFrame root_center(const SkeletonFrame& frame, const Topology& topology) {
  SkeletonFrame out = frame;
  const Vec3 root = frame.joints.at(static_cast<std::size_t>(topology.root_joint));
  for (auto& g : out.joints) g -= root;
  return out;
}

}  // namespace skelact
