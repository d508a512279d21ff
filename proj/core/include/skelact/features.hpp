#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skelact/skeleton.hpp"
#include "skelact/tensor.hpp"

namespace skelact {

inline constexpr int kFeatureLayoutVersion = 1;

// A line through two joints, a < b.
struct Line {
  JointIndex a = 0;
  JointIndex b = 0;
  friend auto operator<=>(const Line&, const Line&) = default;
};

// A plane through three joints; the winding a -> b -> c fixes the normal.
struct Plane {
  JointIndex a = 0;
  JointIndex b = 0;
  JointIndex c = 0;
  friend auto operator<=>(const Plane&, const Plane&) = default;
};

struct JointLinePair {
  JointIndex joint;
  Line line;
  friend auto operator<=>(const JointLinePair&, const JointLinePair&) = default;
};
struct LinePair {
  Line first;
  Line second;
  friend auto operator<=>(const LinePair&, const LinePair&) = default;
};
struct JointPlanePair {
  JointIndex joint;
  Plane plane;
  friend auto operator<=>(const JointPlanePair&, const JointPlanePair&) = default;
};
struct LinePlanePair {
  Line line;
  Plane plane;
  friend auto operator<=>(const LinePlanePair&, const LinePlanePair&) = default;
};
struct PlanePair {
  Plane first;
  Plane second;
  friend auto operator<=>(const PlanePair&, const PlanePair&) = default;
};

struct MotionScale {
  int step = 1;
};

struct SchemaConfig {
  // Keep only one feature of each left/right mirrored pair (needs a mirror map
  // in the topology).
  bool dedup_symmetry = true;
  // Upper bound on line-line angle pairs; 0 disables the cap.
  std::size_t ll_cap = 128;
  // Restrict line-line pairs to lines that share no joint.
  bool ll_require_disjoint = false;
  // Drop (end joint, line) pairs where a line endpoint is adjacent to the joint.
  bool jl_exclude_adjacent = false;
  std::vector<int> motion_scales = {1, 2};

  friend bool operator==(const SchemaConfig&, const SchemaConfig&) = default;
};

struct FeatureSchema {
  Topology topology;
  SchemaConfig config;
  std::vector<Line> lines;
  std::vector<Plane> planes;
  std::vector<JointLinePair> jl_pairs;
  std::vector<LinePair> ll_pairs;
  std::vector<JointPlanePair> jp_pairs;
  std::vector<LinePlanePair> lp_pairs;
  std::vector<PlanePair> pp_pairs;
  int layout_version = kFeatureLayoutVersion;

  std::size_t jcd_dim() const;
  // Static (per frame) geometric channels: JCD, orientations and pair features.
  std::size_t per_frame_dim() const;
  std::size_t motion_dim() const;
  // Total classifier channels: per_frame_dim() + motion_dim().
  std::size_t channels() const;
};

// Lower triangle of the pairwise distance matrix, row-major by (j, i), i < j.
std::vector<double> jcd(const SkeletonFrame& frame);

std::vector<Line> enumerate_lines(const Topology& topology);
std::vector<Plane> enumerate_planes(const Topology& topology);
FeatureSchema build_schema(const Topology& topology,
                           const SchemaConfig& config = {});

// N x 3J, row k = G^{k+s} - G^k flattened, tail s rows zero.
SequenceFeatureTensor motion_features(std::span<const SkeletonFrame> frames,
                                      MotionScale scale);

// Per-frame layout [JCD | orientations | jl | ll | jp | lp | pp | Y_s...].
// Degenerate geometry contributes 0.
SequenceFeatureTensor assemble_sequence_tensor(
    std::span<const SkeletonFrame> frames, const FeatureSchema& schema,
    std::size_t expected_frames);

std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(std::string_view text);
void save_schema(const FeatureSchema& schema, const std::filesystem::path& path);
FeatureSchema load_schema(const std::filesystem::path& path);

// Frame-major CSV dump for debugging: one row per frame.
std::string tensor_to_csv(const SequenceFeatureTensor& tensor);

}  // namespace skelact
