#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skelact/vec3.hpp"

namespace skelact {

using JointIndex = int;
using JointTriple = std::array<JointIndex, 3>;

// Named joint layout. `edges` form a tree; `end_joints` are exactly its leaves.
// 3D layouts declare five plane triples (body, two arms, two legs); 2D layouts
// declare none. `mirror_pairs` is the optional left/right correspondence used
// for symmetric feature deduplication.
struct Topology {
  std::string name;
  int dim = 3;
  std::vector<std::string> joint_names;
  std::vector<std::pair<JointIndex, JointIndex>> edges;
  std::vector<JointIndex> end_joints;
  JointIndex root_joint = 0;
  std::vector<JointTriple> plane_triples;
  std::vector<std::pair<JointIndex, JointIndex>> mirror_pairs;

  std::size_t joint_count() const { return joint_names.size(); }

  // Involution over joint indices built from mirror_pairs; identity for
  // unpaired joints. Empty when no mirror map is declared.
  std::vector<JointIndex> mirror_map() const;

  // Neighbour lists indexed by joint.
  std::vector<std::vector<JointIndex>> adjacency() const;
};

inline constexpr std::size_t kRequiredPlanes3d = 5;

// Throws Error(kMalformedTopology) when any invariant is violated.
void validate_topology(const Topology& topology);

// Accepts "utkinect20", "jhmdb15", or a path to a topology JSON file.
Topology builtin_topology(std::string_view name_or_path);

Topology topology_from_json(std::string_view text);
std::string topology_to_json(const Topology& topology);
Topology load_topology_file(const std::filesystem::path& path);
void save_topology_file(const Topology& topology,
                        const std::filesystem::path& path);

// Hop distances from `source` to every joint along the tree.
std::vector<int> tree_distances(const Topology& topology, JointIndex source);

struct SkeletonFrame {
  std::int64_t index = 0;
  std::vector<Vec3> joints;

  friend bool operator==(const SkeletonFrame&, const SkeletonFrame&) = default;
};

struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  std::optional<int> label;
  std::string subject;
  std::string meta;
};

// Frame validity against a topology: joint count and finiteness.
void validate_frame(const SkeletonFrame& frame, const Topology& topology);

// Picks `n` frames at uniformly spaced positions over [0, K-1], rounding to
// the nearest index with ties going to the lower index. No interpolation.
SkeletonSequence resample_sequence(const SkeletonSequence& seq, std::size_t n);

// Index positions used by resample_sequence; exposed for tests and tools.
std::vector<std::size_t> resample_indices(std::size_t frame_count,
                                          std::size_t n);

// g -> R*g + t for every joint. R must be a proper rotation within 1e-9.
SkeletonFrame apply_rigid_transform(const SkeletonFrame& frame,
                                    const Mat3& rotation,
                                    const Vec3& translation);

// Subtracts the root joint from every joint of the frame.
SkeletonFrame root_center(const SkeletonFrame& frame, const Topology& topology);

}  // namespace skelact
