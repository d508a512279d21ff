#include "skelact/features.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>

#include "skelact/error.hpp"
#include "skelact/geometry.hpp"

namespace skelact {
namespace {

Line make_line(JointIndex x, JointIndex y) { return {std::min(x, y), std::max(x, y)}; }

bool contains(const Line& l, JointIndex j) { return l.a == j || l.b == j; }
bool contains(const Plane& p, JointIndex j) { return p.a == j || p.b == j || p.c == j; }
bool share_joint(const Line& l, const Line& m) { return contains(m, l.a) || contains(m, l.b); }

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Left/right mirror acting on feature index tuples.
class Mirror {
 public:
  Mirror(std::vector<JointIndex> map, const std::vector<Plane>& planes)
      : map_(std::move(map)), planes_(planes) {}

  JointIndex operator()(JointIndex j) const { return map_[static_cast<std::size_t>(j)]; }
  Line operator()(const Line& l) const { return make_line((*this)(l.a), (*this)(l.b)); }

  // The declared plane whose joint set is the mirror image, if any.
  std::optional<Plane> operator()(const Plane& p) const {
    std::array<JointIndex, 3> want = {(*this)(p.a), (*this)(p.b), (*this)(p.c)};
    std::sort(want.begin(), want.end());
    for (const auto& q : planes_) {
      std::array<JointIndex, 3> have = {q.a, q.b, q.c};
      std::sort(have.begin(), have.end());
      if (have == want) return q;
    }
    return std::nullopt;
  }

  std::optional<JointLinePair> operator()(const JointLinePair& f) const {
    return JointLinePair{(*this)(f.joint), (*this)(f.line)};
  }
  std::optional<LinePair> operator()(const LinePair& f) const {
    const Line x = (*this)(f.first);
    const Line y = (*this)(f.second);
    return LinePair{std::min(x, y), std::max(x, y)};
  }
  std::optional<JointPlanePair> operator()(const JointPlanePair& f) const {
    auto p = (*this)(f.plane);
    if (!p) return std::nullopt;
    return JointPlanePair{(*this)(f.joint), *p};
  }
  std::optional<LinePlanePair> operator()(const LinePlanePair& f) const {
    auto p = (*this)(f.plane);
    if (!p) return std::nullopt;
    return LinePlanePair{(*this)(f.line), *p};
  }
  std::optional<PlanePair> operator()(const PlanePair& f) const {
    auto p = (*this)(f.first);
    auto q = (*this)(f.second);
    if (!p || !q) return std::nullopt;
    return PlanePair{std::min(*p, *q), std::max(*p, *q)};
  }

 private:
  std::vector<JointIndex> map_;
  std::vector<Plane> planes_;
};

// Of each mirrored pair of features keep only the lexicographically smaller;
// self-symmetric features and features whose mirror is absent stay.
template <typename T>
void dedup_mirrored(std::vector<T>& features, const Mirror& mirror) {
  const std::set<T> present(features.begin(), features.end());
  std::vector<T> kept;
  kept.reserve(features.size());
  for (const auto& f : features) {
    const auto m = mirror(f);
    if (!m || !present.count(*m) || !(*m < f)) kept.push_back(f);
  }
  features = std::move(kept);
}

// Evenly strided subset of size `cap`, order preserved.
template <typename T>
void cap_strided(std::vector<T>& v, std::size_t cap) {
  if (cap == 0 || v.size() <= cap) return;
  std::vector<T> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < cap; ++i) out.push_back(v[i * v.size() / cap]);
  v = std::move(out);
}

}  // namespace

std::size_t FeatureSchema::jcd_dim() const {
  const std::size_t j = topology.joint_count();
  return j * (j - 1) / 2;
}

std::size_t FeatureSchema::per_frame_dim() const {
  return jcd_dim() + 3 * lines.size() + jl_pairs.size() + ll_pairs.size() +
         jp_pairs.size() + lp_pairs.size() + pp_pairs.size();
}

std::size_t FeatureSchema::motion_dim() const {
  return config.motion_scales.size() * 3 * topology.joint_count();
}

std::size_t FeatureSchema::channels() const { return per_frame_dim() + motion_dim(); }

std::vector<double> jcd(const SkeletonFrame& frame) {
  const auto& g = frame.joints;
  std::vector<double> out;
  out.reserve(g.size() * (g.size() - (g.empty() ? 0 : 1)) / 2);
  for (std::size_t j = 1; j < g.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) out.push_back(distance(g[i], g[j]));
  }
  return out;
}

std::vector<Line> enumerate_lines(const Topology& topology) {
  std::vector<Line> lines;
  for (const auto& [a, b] : topology.edges) lines.push_back(make_line(a, b));
  for (JointIndex e : topology.end_joints) {
    const auto dist = tree_distances(topology, e);
    for (std::size_t k = 0; k < dist.size(); ++k) {
      if (dist[k] == 2) lines.push_back(make_line(e, static_cast<JointIndex>(k)));
    }
  }
  for (std::size_t x = 0; x < topology.end_joints.size(); ++x) {
    for (std::size_t y = x + 1; y < topology.end_joints.size(); ++y) {
      lines.push_back(make_line(topology.end_joints[x], topology.end_joints[y]));
    }
  }
  sort_unique(lines);
  return lines;
}

std::vector<Plane> enumerate_planes(const Topology& topology) {
  std::vector<Plane> planes;
  if (topology.dim != 3) return planes;
  for (const auto& t : topology.plane_triples) planes.push_back({t[0], t[1], t[2]});
  return planes;
}

FeatureSchema build_schema(const Topology& topology, const SchemaConfig& config) {
  validate_topology(topology);
  for (int s : config.motion_scales) {
    if (s < 1) throw Error(ErrorCode::kInvalidArgument, "motion scale must be positive");
  }
  FeatureSchema schema;
  schema.topology = topology;
  schema.config = config;
  schema.lines = enumerate_lines(topology);
  schema.planes = enumerate_planes(topology);

  const auto adj = topology.adjacency();
  auto adjacent = [&adj](JointIndex u, JointIndex v) {
    const auto& n = adj[static_cast<std::size_t>(u)];
    return std::binary_search(n.begin(), n.end(), v);
  };
  std::set<JointIndex> ends(topology.end_joints.begin(), topology.end_joints.end());

  for (JointIndex e : ends) {
    for (const auto& l : schema.lines) {
      if (contains(l, e)) continue;
      if (config.jl_exclude_adjacent && (adjacent(e, l.a) || adjacent(e, l.b))) continue;
      schema.jl_pairs.push_back({e, l});
    }
  }
  for (std::size_t x = 0; x < schema.lines.size(); ++x) {
    for (std::size_t y = x + 1; y < schema.lines.size(); ++y) {
      const auto& l = schema.lines[x];
      const auto& m = schema.lines[y];
      if (config.ll_require_disjoint && share_joint(l, m)) continue;
      schema.ll_pairs.push_back({l, m});
    }
  }
  for (JointIndex e : ends) {
    for (const auto& p : schema.planes) {
      if (!contains(p, e)) schema.jp_pairs.push_back({e, p});
    }
  }
  for (const auto& l : schema.lines) {
    if (!ends.count(l.a) || !ends.count(l.b)) continue;
    for (const auto& p : schema.planes) schema.lp_pairs.push_back({l, p});
  }
  for (std::size_t x = 0; x < schema.planes.size(); ++x) {
    for (std::size_t y = x + 1; y < schema.planes.size(); ++y) {
      const auto& p = schema.planes[x];
      const auto& q = schema.planes[y];
      schema.pp_pairs.push_back({std::min(p, q), std::max(p, q)});
    }
  }

  sort_unique(schema.jl_pairs);
  sort_unique(schema.ll_pairs);
  sort_unique(schema.jp_pairs);
  sort_unique(schema.lp_pairs);
  sort_unique(schema.pp_pairs);

  if (config.dedup_symmetry && !topology.mirror_pairs.empty()) {
    const Mirror mirror(topology.mirror_map(), schema.planes);
    dedup_mirrored(schema.jl_pairs, mirror);
    dedup_mirrored(schema.ll_pairs, mirror);
    dedup_mirrored(schema.jp_pairs, mirror);
    dedup_mirrored(schema.lp_pairs, mirror);
    dedup_mirrored(schema.pp_pairs, mirror);
  }
  cap_strided(schema.ll_pairs, config.ll_cap);
  return schema;
}

SequenceFeatureTensor motion_features(std::span<const SkeletonFrame> frames,
                                      MotionScale scale) {
  if (scale.step < 1) throw Error(ErrorCode::kInvalidArgument, "motion scale must be positive");
  const auto s = static_cast<std::size_t>(scale.step);
  if (frames.size() < s + 1) {
    throw Error(ErrorCode::kFrameCountMismatch,
                "motion scale " + std::to_string(s) + " needs at least " +
                    std::to_string(s + 1) + " frames");
  }
  const std::size_t j = frames.front().joints.size();
  SequenceFeatureTensor out(frames.size(), 3 * j);
  for (std::size_t k = 0; k + s < frames.size(); ++k) {
    const auto& from = frames[k].joints;
    const auto& to = frames[k + s].joints;
    double* row = out.row(k);
    for (std::size_t i = 0; i < j; ++i) {
      const Vec3 d = to[i] - from[i];
      row[3 * i] = d.x;
      row[3 * i + 1] = d.y;
      row[3 * i + 2] = d.z;
    }
  }
  return out;
}

SequenceFeatureTensor assemble_sequence_tensor(std::span<const SkeletonFrame> frames,
                                               const FeatureSchema& schema,
                                               std::size_t expected_frames) {
  if (frames.size() != expected_frames) {
    throw Error(ErrorCode::kFrameCountMismatch,
                "expected " + std::to_string(expected_frames) + " frames, got " +
                    std::to_string(frames.size()));
  }
  const std::size_t njoints = schema.topology.joint_count();
  for (const auto& f : frames) {
    if (f.joints.size() != njoints) {
      throw Error(ErrorCode::kJointCountMismatch, "frame does not match schema topology");
    }
  }

  SequenceFeatureTensor out(frames.size(), schema.channels(), schema.layout_version);

  std::vector<std::optional<Vec3>> dirs(schema.lines.size());
  std::vector<std::optional<Vec3>> normals(schema.planes.size());
  auto line_index = [&schema](const Line& l) {
    return static_cast<std::size_t>(
        std::lower_bound(schema.lines.begin(), schema.lines.end(), l) - schema.lines.begin());
  };
  // Pair lists may come from a user-edited schema file, so planes are looked
  // up by value rather than assumed to be in declared order.
  auto plane_index = [&schema](const Plane& p) {
    return static_cast<std::size_t>(
        std::find(schema.planes.begin(), schema.planes.end(), p) - schema.planes.begin());
  };

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& g = frames[t].joints;
    auto at = [&g](JointIndex i) -> const Vec3& { return g[static_cast<std::size_t>(i)]; };
    double* row = out.row(t);
    std::size_t c = 0;

    for (std::size_t j = 1; j < njoints; ++j) {
      for (std::size_t i = 0; i < j; ++i) row[c++] = distance(g[i], g[j]);
    }
    for (std::size_t k = 0; k < schema.lines.size(); ++k) {
      const auto& l = schema.lines[k];
      dirs[k] = geometry::try_joint_orientation(at(l.a), at(l.b));
      const Vec3 d = dirs[k].value_or(Vec3{});
      row[c++] = d.x;
      row[c++] = d.y;
      row[c++] = d.z;
    }
    for (std::size_t k = 0; k < schema.planes.size(); ++k) {
      const auto& p = schema.planes[k];
      normals[k] = geometry::try_plane_normal(at(p.a), at(p.b), at(p.c));
    }
    for (const auto& f : schema.jl_pairs) {
      row[c++] = geometry::try_joint_line_distance(at(f.joint), at(f.line.a), at(f.line.b))
                     .value_or(0.0);
    }
    for (const auto& f : schema.ll_pairs) {
      const auto& u = dirs[line_index(f.first)];
      const auto& v = dirs[line_index(f.second)];
      row[c++] = (u && v) ? geometry::angle_between_units(*u, *v) : 0.0;
    }
    for (const auto& f : schema.jp_pairs) {
      const auto& n = normals[plane_index(f.plane)];
      row[c++] = n ? dot(at(f.joint) - at(f.plane.a), *n) : 0.0;
    }
    for (const auto& f : schema.lp_pairs) {
      const auto& u = dirs[line_index(f.line)];
      const auto& n = normals[plane_index(f.plane)];
      row[c++] = (u && n) ? geometry::angle_between_units(*u, *n) : 0.0;
    }
    for (const auto& f : schema.pp_pairs) {
      const auto& n1 = normals[plane_index(f.first)];
      const auto& n2 = normals[plane_index(f.second)];
      row[c++] = (n1 && n2) ? geometry::angle_between_units(*n1, *n2) : 0.0;
    }
  }

  std::size_t offset = schema.per_frame_dim();
  for (int s : schema.config.motion_scales) {
    const auto motion = motion_features(frames, MotionScale{s});
    for (std::size_t t = 0; t < frames.size(); ++t) {
      std::copy_n(motion.row(t), motion.channels, out.row(t) + offset);
    }
    offset += motion.channels;
  }
  return out;
}

}  // namespace skelact
