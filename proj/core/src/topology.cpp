#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skelact/error.hpp"
#include "skelact/skeleton.hpp"

namespace skelact {
namespace {

using nlohmann::json;

// Kinect v1 skeleton, 20 joints.
Topology make_utkinect20() {
  Topology t;
  t.name = "utkinect20";
  t.dim = 3;
  t.joint_names = {"hip_center",     "spine",       "shoulder_center",
                   "head",           "shoulder_left", "elbow_left",
                   "wrist_left",     "hand_left",   "shoulder_right",
                   "elbow_right",    "wrist_right", "hand_right",
                   "hip_left",       "knee_left",   "ankle_left",
                   "foot_left",      "hip_right",   "knee_right",
                   "ankle_right",    "foot_right"};
  t.edges = {{0, 1},   {1, 2},   {2, 3},   {2, 4},   {4, 5},
             {5, 6},   {6, 7},   {2, 8},   {8, 9},   {9, 10},
             {10, 11}, {0, 12},  {12, 13}, {13, 14}, {14, 15},
             {0, 16},  {16, 17}, {17, 18}, {18, 19}};
  t.end_joints = {3, 7, 11, 15, 19};
  t.root_joint = 0;
  // body, left arm, right arm, left leg, right leg
  t.plane_triples = {{0, 4, 8}, {4, 5, 7}, {8, 9, 11}, {12, 13, 15}, {16, 17, 19}};
  t.mirror_pairs = {{4, 8},   {5, 9},   {6, 10},  {7, 11},
                    {12, 16}, {13, 17}, {14, 18}, {15, 19}};
  return t;
}

// JHMDB puppet annotation, 15 joints (0-based).
Topology make_jhmdb15() {
  Topology t;
  t.name = "jhmdb15";
  t.dim = 2;
  t.joint_names = {"neck",           "belly",         "face",
                   "shoulder_right", "shoulder_left", "hip_right",
                   "hip_left",       "elbow_right",   "elbow_left",
                   "knee_right",     "knee_left",     "wrist_right",
                   "wrist_left",     "ankle_right",   "ankle_left"};
  t.edges = {{0, 1}, {0, 2},  {0, 3},  {0, 4},  {3, 7},  {7, 11}, {4, 8},
             {8, 12}, {1, 5}, {1, 6},  {5, 9},  {9, 13}, {6, 10}, {10, 14}};
  t.end_joints = {2, 11, 12, 13, 14};
  t.root_joint = 1;
  t.mirror_pairs = {{3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}, {13, 14}};
  return t;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedTopology, what);
}

}  // namespace

std::vector<JointIndex> Topology::mirror_map() const {
  if (mirror_pairs.empty()) return {};
  std::vector<JointIndex> map(joint_count());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = static_cast<JointIndex>(i);
  for (const auto& [a, b] : mirror_pairs) {
    map[static_cast<std::size_t>(a)] = b;
    map[static_cast<std::size_t>(b)] = a;
  }
  return map;
}

std::vector<std::vector<JointIndex>> Topology::adjacency() const {
  std::vector<std::vector<JointIndex>> adj(joint_count());
  for (const auto& [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

void validate_topology(const Topology& t) {
  const auto j = static_cast<JointIndex>(t.joint_count());
  if (t.dim != 2 && t.dim != 3) malformed("dim must be 2 or 3");
  if (j < 2) malformed("a topology needs at least two joints");
  auto valid = [j](JointIndex i) { return i >= 0 && i < j; };

  if (t.edges.size() != static_cast<std::size_t>(j - 1)) {
    malformed("edge count must be joint count - 1 for a tree");
  }
  std::set<std::pair<JointIndex, JointIndex>> seen;
  for (const auto& [a, b] : t.edges) {
    if (!valid(a) || !valid(b)) malformed("edge references an invalid joint");
    if (a == b) malformed("self-loop edge");
    if (!seen.insert(std::minmax(a, b)).second) malformed("duplicate edge");
  }
  if (!valid(t.root_joint)) malformed("root joint out of range");

  // Connected with J-1 edges implies a tree.
  const auto dist = tree_distances(t, t.root_joint);
  if (std::any_of(dist.begin(), dist.end(), [](int d) { return d < 0; })) {
    malformed("adjacency is not connected");
  }

  const auto adj = t.adjacency();
  std::vector<JointIndex> leaves;
  for (JointIndex i = 0; i < j; ++i) {
    if (adj[static_cast<std::size_t>(i)].size() == 1) leaves.push_back(i);
  }
  auto ends = t.end_joints;
  std::sort(ends.begin(), ends.end());
  if (ends != leaves) malformed("end_joints must be exactly the degree-1 joints");

  const std::size_t want_planes = t.dim == 3 ? kRequiredPlanes3d : 0;
  if (t.plane_triples.size() != want_planes) {
    malformed(t.dim == 3 ? "3D topologies need exactly 5 plane triples"
                         : "2D topologies must not declare planes");
  }
  for (const auto& p : t.plane_triples) {
    for (auto i : p) {
      if (!valid(i)) malformed("plane triple references an invalid joint");
    }
    if (p[0] == p[1] || p[1] == p[2] || p[0] == p[2]) {
      malformed("plane triple has repeated joints");
    }
  }

  std::set<JointIndex> mirrored;
  for (const auto& [a, b] : t.mirror_pairs) {
    if (!valid(a) || !valid(b) || a == b) malformed("bad mirror pair");
    if (!mirrored.insert(a).second || !mirrored.insert(b).second) {
      malformed("joint appears in more than one mirror pair");
    }
  }
  if (!t.mirror_pairs.empty()) {
    // The mirror must be a graph automorphism, otherwise mirrored features
    // would not correspond.
    const auto m = t.mirror_map();
    std::set<std::pair<JointIndex, JointIndex>> edge_set;
    for (const auto& [a, b] : t.edges) edge_set.insert(std::minmax(a, b));
    for (const auto& [a, b] : t.edges) {
      if (!edge_set.count(std::minmax(m[static_cast<std::size_t>(a)],
                                      m[static_cast<std::size_t>(b)]))) {
        malformed("mirror map does not preserve adjacency");
      }
    }
  }
  if (t.joint_names.size() != t.joint_count()) malformed("joint name count");
}

std::vector<int> tree_distances(const Topology& topology, JointIndex source) {
  const auto adj = topology.adjacency();
  std::vector<int> dist(topology.joint_count(), -1);
  std::queue<JointIndex> frontier;
  dist[static_cast<std::size_t>(source)] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const JointIndex u = frontier.front();
    frontier.pop();
    for (JointIndex v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

Topology builtin_topology(std::string_view name_or_path) {
  if (name_or_path == "utkinect20") return make_utkinect20();
  if (name_or_path == "jhmdb15") return make_jhmdb15();
  const std::filesystem::path path{std::string(name_or_path)};
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec)) return load_topology_file(path);
  throw Error(ErrorCode::kUnknownTopology,
              "no built-in topology or file named '" + std::string(name_or_path) + "'");
}

Topology topology_from_json(std::string_view text) {
  Topology t;
  try {
    const json doc = json::parse(text);
    t.name = doc.at("name").get<std::string>();
    t.dim = doc.at("dim").get<int>();
    t.joint_names = doc.at("joint_names").get<std::vector<std::string>>();
    t.edges = doc.at("edges").get<std::vector<std::pair<JointIndex, JointIndex>>>();
    t.end_joints = doc.at("end_joints").get<std::vector<JointIndex>>();
    t.root_joint = doc.at("root_joint").get<JointIndex>();
    t.plane_triples = doc.value("plane_triples", std::vector<JointTriple>{});
    t.mirror_pairs = doc.value(
        "mirror_pairs", std::vector<std::pair<JointIndex, JointIndex>>{});
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  validate_topology(t);
  return t;
}

std::string topology_to_json(const Topology& t) {
  json doc;
  doc["name"] = t.name;
  doc["dim"] = t.dim;
  doc["joint_names"] = t.joint_names;
  doc["edges"] = t.edges;
  doc["end_joints"] = t.end_joints;
  doc["root_joint"] = t.root_joint;
  doc["plane_triples"] = t.plane_triples;
  doc["mirror_pairs"] = t.mirror_pairs;
  return doc.dump(2);
}

Topology load_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return topology_from_json(buf.str());
}

void save_topology_file(const Topology& topology,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << topology_to_json(topology) << '\n';
}

}  // namespace skelact
