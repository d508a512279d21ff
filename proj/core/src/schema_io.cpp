#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skelact/error.hpp"
#include "skelact/features.hpp"

namespace skelact {
namespace {

using nlohmann::json;

json line_json(const Line& l) { return json::array({l.a, l.b}); }
json plane_json(const Plane& p) { return json::array({p.a, p.b, p.c}); }

Line line_at(const json& v, std::size_t off) {
  return {v.at(off).get<JointIndex>(), v.at(off + 1).get<JointIndex>()};
}
Plane plane_at(const json& v, std::size_t off) {
  return {v.at(off).get<JointIndex>(), v.at(off + 1).get<JointIndex>(),
          v.at(off + 2).get<JointIndex>()};
}

[[noreturn]] void bad_schema(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, "schema: " + what);
}

void check_schema(const FeatureSchema& s) {
  const auto j = static_cast<JointIndex>(s.topology.joint_count());
  auto joint_ok = [j](JointIndex i) { return i >= 0 && i < j; };
  if (!std::is_sorted(s.lines.begin(), s.lines.end()) ||
      std::adjacent_find(s.lines.begin(), s.lines.end()) != s.lines.end()) {
    bad_schema("lines must be sorted and unique");
  }
  auto line_ok = [&](const Line& l) {
    return std::binary_search(s.lines.begin(), s.lines.end(), l);
  };
  auto plane_ok = [&](const Plane& p) {
    return std::find(s.planes.begin(), s.planes.end(), p) != s.planes.end();
  };
  for (const auto& l : s.lines) {
    if (!joint_ok(l.a) || !joint_ok(l.b) || !(l.a < l.b)) bad_schema("invalid line");
  }
  for (const auto& p : s.planes) {
    if (!joint_ok(p.a) || !joint_ok(p.b) || !joint_ok(p.c)) bad_schema("invalid plane");
  }
  if (s.topology.dim == 2 && !s.planes.empty()) bad_schema("2D schemas carry no planes");
  for (const auto& f : s.jl_pairs) {
    if (!joint_ok(f.joint) || !line_ok(f.line)) bad_schema("invalid jl pair");
  }
  for (const auto& f : s.ll_pairs) {
    if (!line_ok(f.first) || !line_ok(f.second)) bad_schema("invalid ll pair");
  }
  for (const auto& f : s.jp_pairs) {
    if (!joint_ok(f.joint) || !plane_ok(f.plane)) bad_schema("invalid jp pair");
  }
  for (const auto& f : s.lp_pairs) {
    if (!line_ok(f.line) || !plane_ok(f.plane)) bad_schema("invalid lp pair");
  }
  for (const auto& f : s.pp_pairs) {
    if (!plane_ok(f.first) || !plane_ok(f.second)) bad_schema("invalid pp pair");
  }
  for (int m : s.config.motion_scales) {
    if (m < 1) bad_schema("motion scales must be positive");
  }
}

}  // namespace

std::string schema_to_json(const FeatureSchema& s) {
  json doc;
  doc["layout_version"] = s.layout_version;
  doc["topology"] = json::parse(topology_to_json(s.topology));
  doc["config"] = {{"dedup_symmetry", s.config.dedup_symmetry},
                   {"ll_cap", s.config.ll_cap},
                   {"ll_require_disjoint", s.config.ll_require_disjoint},
                   {"jl_exclude_adjacent", s.config.jl_exclude_adjacent},
                   {"motion_scales", s.config.motion_scales}};
  json lines = json::array();
  for (const auto& l : s.lines) lines.push_back(line_json(l));
  json planes = json::array();
  for (const auto& p : s.planes) planes.push_back(plane_json(p));
  json jl = json::array();
  for (const auto& f : s.jl_pairs) jl.push_back({f.joint, f.line.a, f.line.b});
  json ll = json::array();
  for (const auto& f : s.ll_pairs) {
    ll.push_back({f.first.a, f.first.b, f.second.a, f.second.b});
  }
  json jp = json::array();
  for (const auto& f : s.jp_pairs) {
    jp.push_back({f.joint, f.plane.a, f.plane.b, f.plane.c});
  }
  json lp = json::array();
  for (const auto& f : s.lp_pairs) {
    lp.push_back({f.line.a, f.line.b, f.plane.a, f.plane.b, f.plane.c});
  }
  json pp = json::array();
  for (const auto& f : s.pp_pairs) {
    pp.push_back({f.first.a, f.first.b, f.first.c, f.second.a, f.second.b, f.second.c});
  }
  doc["lines"] = std::move(lines);
  doc["planes"] = std::move(planes);
  doc["jl_pairs"] = std::move(jl);
  doc["ll_pairs"] = std::move(ll);
  doc["jp_pairs"] = std::move(jp);
  doc["lp_pairs"] = std::move(lp);
  doc["pp_pairs"] = std::move(pp);
  doc["per_frame_dim"] = s.per_frame_dim();
  doc["channels"] = s.channels();
  return doc.dump();
}

FeatureSchema schema_from_json(std::string_view text) {
  FeatureSchema s;
  try {
    const json doc = json::parse(text);
    s.layout_version = doc.at("layout_version").get<int>();
    if (s.layout_version != kFeatureLayoutVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "schema layout_version " + std::to_string(s.layout_version) +
                      ", expected " + std::to_string(kFeatureLayoutVersion));
    }
    s.topology = topology_from_json(doc.at("topology").dump());
    const auto& cfg = doc.at("config");
    s.config.dedup_symmetry = cfg.value("dedup_symmetry", true);
    s.config.ll_cap = cfg.value("ll_cap", std::size_t{128});
    s.config.ll_require_disjoint = cfg.value("ll_require_disjoint", false);
    s.config.jl_exclude_adjacent = cfg.value("jl_exclude_adjacent", false);
    s.config.motion_scales = cfg.value("motion_scales", std::vector<int>{1, 2});
    for (const auto& v : doc.at("lines")) s.lines.push_back(line_at(v, 0));
    for (const auto& v : doc.at("planes")) s.planes.push_back(plane_at(v, 0));
    for (const auto& v : doc.at("jl_pairs")) {
      s.jl_pairs.push_back({v.at(0).get<JointIndex>(), line_at(v, 1)});
    }
    for (const auto& v : doc.at("ll_pairs")) s.ll_pairs.push_back({line_at(v, 0), line_at(v, 2)});
    for (const auto& v : doc.at("jp_pairs")) {
      s.jp_pairs.push_back({v.at(0).get<JointIndex>(), plane_at(v, 1)});
    }
    for (const auto& v : doc.at("lp_pairs")) s.lp_pairs.push_back({line_at(v, 0), plane_at(v, 2)});
    for (const auto& v : doc.at("pp_pairs")) {
      s.pp_pairs.push_back({plane_at(v, 0), plane_at(v, 3)});
    }
  } catch (const nlohmann::json::exception& e) {
    bad_schema(e.what());
  }
  check_schema(s);
  return s;
}

void save_schema(const FeatureSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << schema_to_json(schema) << '\n';
}

FeatureSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return schema_from_json(buf.str());
}

std::string tensor_to_csv(const SequenceFeatureTensor& tensor) {
  std::string out;
  char buf[40];
  for (std::size_t t = 0; t < tensor.frames; ++t) {
    for (std::size_t c = 0; c < tensor.channels; ++c) {
      if (c) out += ',';
      const int len = std::snprintf(buf, sizeof buf, "%.17g", tensor.at(t, c));
      out.append(buf, static_cast<std::size_t>(len));
    }
    out += '\n';
  }
  return out;
}

}  // namespace skelact
