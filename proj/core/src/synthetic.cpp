#include "skelact/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "skelact/error.hpp"

namespace skelact {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Vec3> utkinect_pose() {
  return {{0.0, 0.0, 0.0},       {0.0, 0.22, 0.0},       {0.0, 0.45, 0.0},
          {0.0, 0.63, 0.0},      {-0.18, 0.42, 0.0},     {-0.26, 0.18, 0.06},
          {-0.29, -0.05, 0.14},  {-0.30, -0.13, 0.17},   {0.18, 0.42, 0.0},
          {0.26, 0.18, 0.06},    {0.29, -0.05, 0.14},    {0.30, -0.13, 0.17},
          {-0.10, -0.06, 0.0},   {-0.11, -0.46, 0.05},   {-0.12, -0.86, 0.0},
          {-0.12, -0.92, 0.10},  {0.10, -0.06, 0.0},     {0.11, -0.46, 0.05},
          {0.12, -0.86, 0.0},    {0.12, -0.92, 0.10}};
}

std::vector<Vec3> jhmdb_pose() {
  return {{0.0, 0.45, 0.0},    {0.0, 0.05, 0.0},    {0.0, 0.65, 0.0},
          {0.18, 0.42, 0.0},   {-0.18, 0.42, 0.0},  {0.10, -0.06, 0.0},
          {-0.10, -0.06, 0.0}, {0.26, 0.17, 0.0},   {-0.26, 0.17, 0.0},
          {0.12, -0.46, 0.0},  {-0.12, -0.46, 0.0}, {0.30, -0.08, 0.0},
          {-0.30, -0.08, 0.0}, {0.13, -0.86, 0.0},  {-0.13, -0.86, 0.0}};
}

// Generic layout: breadth-first from the root, each child placed at a fixed
// bone length in a direction fanned out by its position among siblings.
std::vector<Vec3> generic_pose(const Topology& t) {
  const auto adj = t.adjacency();
  std::vector<Vec3> pose(t.joint_count());
  std::vector<int> parent(t.joint_count(), -1);
  std::vector<double> heading(t.joint_count(), kPi / 2.0);
  std::vector<bool> seen(t.joint_count(), false);
  std::queue<JointIndex> q;
  q.push(t.root_joint);
  seen[t.root_joint] = true;
  while (!q.empty()) {
    const JointIndex j = q.front();
    q.pop();
    std::vector<JointIndex> kids;
    for (JointIndex k : adj[j]) {
      if (!seen[k]) kids.push_back(k);
    }
    const double spread = j == t.root_joint ? 2.0 * kPi : kPi / 2.0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const JointIndex k = kids[i];
      seen[k] = true;
      parent[k] = j;
      const double offset = kids.size() == 1
                                ? 0.0
                                : spread * (static_cast<double>(i) / static_cast<double>(kids.size()) - 0.5);
      heading[k] = heading[j] + offset;
      const double z = t.dim == 3 ? 0.04 * static_cast<double>((k * 7) % 5) - 0.08 : 0.0;
      pose[k] = pose[j] + Vec3{0.2 * std::cos(heading[k]), 0.2 * std::sin(heading[k]), z};
      q.push(k);
    }
  }
  return pose;
}

Vec3 class_axis(const Topology& t, std::size_t c) {
  const std::size_t variant = c / t.end_joints.size();
  if (t.dim == 2) {
    static const Vec3 axes[] = {{1, 0, 0}, {0, 1, 0}, {0.7071067811865476, 0.7071067811865476, 0},
                                {0.7071067811865476, -0.7071067811865476, 0}};
    return axes[(c + variant) % 4];
  }
  static const Vec3 axes[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                              {0.7071067811865476, 0.7071067811865476, 0},
                              {0, 0.7071067811865476, 0.7071067811865476}};
  return axes[(c + 2 * variant) % 5];
}

// Cycles per frame.
double class_frequency(const Topology& t, std::size_t c) {
  const std::size_t variant = c / t.end_joints.size();
  return (1.0 + 0.6 * static_cast<double>(variant)) / 20.0;
}

}  // namespace

void validate_synth_config(const SynthConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (c.num_classes < 2) fail("need at least two classes");
  if (c.sequences_per_class == 0) fail("sequences_per_class must be positive");
  if (c.min_frames == 0 || c.max_frames < c.min_frames) fail("bad frame-length range");
  if (!(c.noise >= 0.0) || !std::isfinite(c.noise)) fail("noise must be non-negative");
  if (!(c.amplitude > 0.0) || !std::isfinite(c.amplitude)) fail("amplitude must be positive");
  if (!(c.max_yaw_degrees >= 0.0 && c.max_yaw_degrees <= 180.0)) fail("max_yaw_degrees must be in [0,180]");
  if (!(c.train_fraction >= 0.0 && c.train_fraction <= 1.0)) fail("train_fraction must be in [0,1]");
}

std::vector<Vec3> rest_pose(const Topology& t) {
  if (t.name == "utkinect20" && t.joint_count() == 20) return utkinect_pose();
  if (t.name == "jhmdb15" && t.joint_count() == 15) return jhmdb_pose();
  return generic_pose(t);
}

LimbChain class_chain(const Topology& t, std::size_t c) {
  const auto adj = t.adjacency();
  const auto from_root = tree_distances(t, t.root_joint);
  LimbChain chain;
  JointIndex j = t.end_joints[c % t.end_joints.size()];
  const double weights[] = {1.0, 0.55, 0.2};
  for (double w : weights) {
    if (j == t.root_joint) break;
    chain.joints.push_back(j);
    chain.weights.push_back(w);
    for (JointIndex k : adj[j]) {
      if (from_root[k] < from_root[j]) {
        j = k;
        break;
      }
    }
  }
  return chain;
}

double motion_envelope(std::size_t t, std::size_t frames, bool long_action) {
  if (!long_action) return 1.0;
  const double end = static_cast<double>(frames) / 3.0;
  const double taper = std::max(1.0, end / 4.0);
  const double x = static_cast<double>(t);
  if (x >= end) return 0.0;
  if (x <= end - taper) return 1.0;
  return 0.5 * (1.0 - std::cos(kPi * (end - x) / taper));
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  Dataset ds;
  ds.topology = builtin_topology(cfg.topology);
  const Topology& topo = ds.topology;
  const auto pose = rest_pose(topo);
  const std::size_t joints = topo.joint_count();

  ds.manifest.topology = cfg.topology;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) ds.manifest.class_names.push_back("class" + std::to_string(c));
  ds.manifest.split.kind = SplitSpec::Kind::kFraction;
  ds.manifest.split.train_fraction = cfg.train_fraction;
  ds.manifest.split.seed = cfg.seed;

  Rng rng(cfg.seed);
  const Vec3 vertical = topo.dim == 3 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
  // 2D skeletons only get a small in-plane tilt.
  const double yaw_limit = cfg.max_yaw_degrees * kPi / 180.0 * (topo.dim == 3 ? 1.0 : 1.0 / 3.0);
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    const LimbChain chain = class_chain(topo, c);
    const Vec3 axis = class_axis(topo, c);
    const double base_freq = class_frequency(topo, c);
    for (std::size_t s = 0; s < cfg.sequences_per_class; ++s) {
      const std::size_t frames = cfg.min_frames + rng.below(cfg.max_frames - cfg.min_frames + 1);
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      const double amp = cfg.amplitude * rng.uniform(0.8, 1.2);
      const double freq = base_freq * rng.uniform(0.9, 1.1);
      const Mat3 rot = axis_angle_rotation(vertical, rng.uniform(-yaw_limit, yaw_limit));
      Vec3 shift{rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1), 0.0};
      if (topo.dim == 3) shift.z = rng.uniform(-0.3, 0.3);
      // Idle sway is drawn the same way for every class.
      const double sway_amp = 0.2 * cfg.amplitude * rng.uniform(0.5, 1.0);
      const double sway_freq = rng.uniform(0.01, 0.03);
      const double sway_phase = rng.uniform(0.0, 2.0 * kPi);

      SkeletonSequence seq;
      seq.label = static_cast<int>(c);
      seq.subject = "synthetic";
      seq.frames.resize(frames);
      for (std::size_t t = 0; t < frames; ++t) {
        auto& frame = seq.frames[t];
        frame.index = static_cast<std::int64_t>(t);
        std::vector<Vec3> g = pose;
        const double tt = static_cast<double>(t);
        const double env = motion_envelope(t, frames, cfg.long_action);
        const double wave = amp * env * std::sin(2.0 * kPi * freq * tt + phase);
        for (std::size_t i = 0; i < chain.joints.size(); ++i) {
          g[chain.joints[i]] += axis * (wave * chain.weights[i]);
        }
        if (cfg.long_action) {
          const double sway = sway_amp * (1.0 - env) * std::sin(2.0 * kPi * sway_freq * tt + sway_phase);
          for (auto& p : g) p.x += sway;
        }
        frame.joints.resize(joints);
        for (std::size_t j = 0; j < joints; ++j) {
          Vec3 p = rot * g[j] + shift;
          p.x += cfg.noise * rng.normal();
          p.y += cfg.noise * rng.normal();
          if (topo.dim == 3) p.z += cfg.noise * rng.normal();
          frame.joints[j] = p;
        }
      }
      ds.manifest.entries.push_back({"sequences/c" + std::to_string(c) + "_" + std::to_string(s) + ".jsonl",
                                     static_cast<int>(c), "synthetic"});
      ds.sequences.push_back(std::move(seq));
    }
  }
  return ds;
}

}  // namespace skelact
