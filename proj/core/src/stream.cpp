#include "skelact/stream.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "skelact/error.hpp"

namespace skelact {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, what);
}

double coordinate(const json& v) {
  if (!v.is_number()) malformed("coordinate is not a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::kNonFiniteValue, "non-finite coordinate");
  return x;
}

void append_fixed6(std::string& out, double v) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof buf, "%.6f", v);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

StreamEvent parse_stream_line(std::string_view line, const Topology& topology) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    // nlohmann rejects NaN/Infinity literals at the lexer level.
    malformed(e.what());
  } catch (const json::out_of_range& e) {
    // Literals such as 1e999 overflow a double.
    throw Error(ErrorCode::kNonFiniteValue, std::string("coordinate overflows: ") + e.what());
  }
  if (!rec.is_object()) malformed("record is not a JSON object");

  if (auto it = rec.find("end"); it != rec.end()) {
    if (!it->is_boolean() || !it->get<bool>()) malformed("\"end\" must be true");
    return EndOfStream{};
  }

  const auto i_it = rec.find("i");
  const auto j_it = rec.find("j");
  if (i_it == rec.end() || j_it == rec.end()) malformed("record needs \"i\" and \"j\"");
  if (!i_it->is_number_integer() || i_it->get<std::int64_t>() < 0) {
    malformed("\"i\" must be a non-negative integer");
  }
  if (!j_it->is_array()) malformed("\"j\" must be an array");

  SkeletonFrame frame;
  frame.index = i_it->get<std::int64_t>();
  if (j_it->size() != topology.joint_count()) {
    throw Error(ErrorCode::kJointCountMismatch,
                "record has " + std::to_string(j_it->size()) + " joints, topology '" +
                    topology.name + "' has " + std::to_string(topology.joint_count()));
  }
  frame.joints.reserve(j_it->size());
  for (const auto& g : *j_it) {
    if (!g.is_array()) malformed("joint is not an array");
    if (g.size() == 3) {
      frame.joints.push_back({coordinate(g[0]), coordinate(g[1]), coordinate(g[2])});
    } else if (g.size() == 2 && topology.dim == 2) {
      frame.joints.push_back({coordinate(g[0]), coordinate(g[1]), 0.0});
    } else {
      malformed("joint must have 3 coordinates (or 2 for a 2D topology)");
    }
  }
  return frame;
}

std::string serialize_frame(const SkeletonFrame& frame) {
  std::string out;
  out.reserve(32 + frame.joints.size() * 40);
  out += "{\"i\":";
  out += std::to_string(frame.index);
  out += ",\"j\":[";
  for (std::size_t k = 0; k < frame.joints.size(); ++k) {
    if (k) out += ',';
    const auto& g = frame.joints[k];
    out += '[';
    append_fixed6(out, g.x);
    out += ',';
    append_fixed6(out, g.y);
    out += ',';
    append_fixed6(out, g.z);
    out += ']';
  }
  out += "]}";
  return out;
}

std::string serialize_end_of_stream() { return "{\"end\":true}"; }

SkeletonSequence read_sequence(std::istream& in, const Topology& topology) {
  SkeletonSequence seq;
  std::string line;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (ended) malformed("record after end-of-stream sentinel");
    auto ev = parse_stream_line(line, topology);
    if (std::holds_alternative<EndOfStream>(ev)) {
      ended = true;
      continue;
    }
    auto& frame = std::get<SkeletonFrame>(ev);
    if (!seq.frames.empty() && frame.index <= seq.frames.back().index) {
      throw Error(ErrorCode::kOutOfOrderFrame,
                  "frame index " + std::to_string(frame.index) + " is not increasing");
    }
    seq.frames.push_back(std::move(frame));
  }
  if (seq.frames.empty()) malformed("sequence has no frames");
  return seq;
}

SkeletonSequence read_sequence_file(const std::filesystem::path& path,
                                    const Topology& topology) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_sequence(in, topology);
}

void write_sequence(std::ostream& out, const SkeletonSequence& seq) {
  for (const auto& f : seq.frames) out << serialize_frame(f) << '\n';
  out << serialize_end_of_stream() << '\n';
}

void write_sequence_file(const std::filesystem::path& path,
                         const SkeletonSequence& seq) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_sequence(out, seq);
}

}  // namespace skelact
