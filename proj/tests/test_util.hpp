#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "skelact/random.hpp"
#include "skelact/skeleton.hpp"

namespace skelact::testing {

// 2D path a - b - c.
inline Topology path3() {
  Topology t;
  t.name = "path3";
  t.dim = 2;
  t.joint_names = {"a", "b", "c"};
  t.edges = {{0, 1}, {1, 2}};
  t.end_joints = {0, 2};
  t.root_joint = 1;
  return t;
}

// 2D star: center 0, leaves 1..4, optionally mirrored 1<->2, 3<->4.
inline Topology star5(bool mirrored) {
  Topology t;
  t.name = "star5";
  t.dim = 2;
  t.joint_names = {"c", "l1", "r1", "l2", "r2"};
  t.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  t.end_joints = {1, 2, 3, 4};
  t.root_joint = 0;
  if (mirrored) t.mirror_pairs = {{1, 2}, {3, 4}};
  return t;
}

inline Vec3 random_point(Rng& rng, double scale = 1.0) {
  return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

inline Mat3 random_rotation(Rng& rng) {
  Vec3 axis;
  do {
    axis = random_point(rng);
  } while (norm(axis) < 1e-3);
  return axis_angle_rotation(axis, rng.uniform(-std::numbers::pi, std::numbers::pi));
}

inline SkeletonFrame random_frame(Rng& rng, std::size_t joints, std::int64_t index = 0,
                                  double scale = 1.0) {
  SkeletonFrame f;
  f.index = index;
  for (std::size_t j = 0; j < joints; ++j) f.joints.push_back(random_point(rng, scale));
  return f;
}

inline std::vector<SkeletonFrame> random_frames(Rng& rng, std::size_t count, std::size_t joints) {
  std::vector<SkeletonFrame> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_frame(rng, joints, static_cast<std::int64_t>(i)));
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("skelact_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace skelact::testing
