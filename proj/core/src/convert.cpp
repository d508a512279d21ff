#include "skelact/convert.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "skelact/error.hpp"
#include "skelact/matfile.hpp"

namespace skelact {
namespace fs = std::filesystem;
namespace {

std::vector<fs::path> find_files(const fs::path& root, const std::regex& pattern) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), pattern)) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool has_regular_files(const fs::path& root) {
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) return true;
  }
  return false;
}

void require_dir(const fs::path& src) {
  if (!fs::is_directory(src)) throw Error(ErrorCode::kIoError, "not a directory: " + src.string());
}

const std::regex& utk_joints_pattern() {
  static const std::regex re(R"(joints_(s\d+_e\d+)\.txt)");
  return re;
}

const std::regex& jhmdb_pattern() {
  static const std::regex re("joint_positions\\.mat");
  return re;
}

struct Segment {
  std::string action;
  std::int64_t first = 0;
  std::int64_t last = 0;
};

// actionLabel.txt: a sequence id line followed by "action: first last" lines.
std::map<std::string, std::vector<Segment>> parse_utk_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::map<std::string, std::vector<Segment>> out;
  std::string line;
  std::string current;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      std::istringstream ss(line);
      std::string id;
      if (ss >> id) current = id;
      continue;
    }
    if (current.empty()) throw Error(ErrorCode::kMalformedRecord, "label line before sequence id");
    std::string action = line.substr(0, colon);
    action.erase(0, action.find_first_not_of(" \t"));
    action.erase(action.find_last_not_of(" \t") + 1);
    std::istringstream ss(line.substr(colon + 1));
    std::string a;
    std::string b;
    ss >> a >> b;
    if (a == "NaN" || b == "NaN" || a.empty() || b.empty()) continue;  // action not performed
    try {
      out[current].push_back({action, std::stoll(a), std::stoll(b)});
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedRecord, "bad frame range in " + path.string() + ": " + line);
    }
  }
  return out;
}

// Frame id followed by 60 coordinates. Repeated ids keep the first record.
std::vector<SkeletonFrame> parse_utk_joints(const fs::path& path, std::size_t joints) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<SkeletonFrame> frames;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    double id = 0.0;
    if (!(ss >> id)) continue;
    std::vector<double> v;
    double x = 0.0;
    while (ss >> x) v.push_back(x);
    if (v.size() != 3 * joints) {
      throw Error(ErrorCode::kJointCountMismatch,
                  path.filename().string() + ": expected " + std::to_string(3 * joints) +
                      " coordinates, got " + std::to_string(v.size()));
    }
    const auto index = static_cast<std::int64_t>(std::llround(id));
    if (!frames.empty() && index <= frames.back().index) continue;
    SkeletonFrame f;
    f.index = index;
    for (std::size_t j = 0; j < joints; ++j) f.joints.push_back({v[3 * j], v[3 * j + 1], v[3 * j + 2]});
    frames.push_back(std::move(f));
  }
  return frames;
}

Dataset convert_utkinect(const fs::path& src) {
  const auto files = find_files(src, utk_joints_pattern());
  if (files.empty()) throw Error(ErrorCode::kNoSequencesFound, "no joints_*.txt under " + src.string());
  const auto label_files = find_files(src, std::regex("actionLabel\\.txt"));
  if (label_files.empty()) throw Error(ErrorCode::kMissingLabels, "actionLabel.txt not found under " + src.string());
  const auto labels = parse_utk_labels(label_files.front());

  Dataset ds;
  ds.topology = builtin_topology("utkinect20");
  ds.manifest.topology = "utkinect20";
  ds.manifest.class_names = utkinect_class_names();
  const auto& names = ds.manifest.class_names;
  for (const auto& file : files) {
    std::smatch m;
    const std::string fname = file.filename().string();
    std::regex_match(fname, m, utk_joints_pattern());
    const std::string id = m[1];
    const auto it = labels.find(id);
    if (it == labels.end()) throw Error(ErrorCode::kMissingLabels, "no labels for " + id);
    const auto frames = parse_utk_joints(file, ds.topology.joint_count());
    for (const auto& seg : it->second) {
      const auto cls = std::find(names.begin(), names.end(), seg.action);
      if (cls == names.end()) throw Error(ErrorCode::kMissingLabels, "unknown action '" + seg.action + "'");
      SkeletonSequence seq;
      for (const auto& f : frames) {
        if (f.index >= seg.first && f.index <= seg.last) seq.frames.push_back(f);
      }
      if (seq.frames.empty()) continue;
      for (auto& f : seq.frames) validate_frame(f, ds.topology);
      seq.label = static_cast<int>(cls - names.begin());
      seq.subject = id.substr(0, id.find('_'));
      seq.meta = id;
      ds.manifest.entries.push_back({"sequences/" + id + "_" + seg.action + ".jsonl", *seq.label, seq.subject});
      ds.sequences.push_back(std::move(seq));
    }
  }
  if (ds.sequences.empty()) throw Error(ErrorCode::kNoSequencesFound, "no labelled segments under " + src.string());
  return ds;
}

Dataset convert_jhmdb(const fs::path& src) {
  const auto files = find_files(src, jhmdb_pattern());
  if (files.empty()) throw Error(ErrorCode::kNoSequencesFound, "no joint_positions.mat under " + src.string());
  std::vector<std::string> classes;
  for (const auto& f : files) classes.push_back(f.parent_path().parent_path().filename().string());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  Dataset ds;
  ds.topology = builtin_topology("jhmdb15");
  ds.manifest.topology = "jhmdb15";
  ds.manifest.class_names = classes;
  const std::size_t joints = ds.topology.joint_count();
  for (const auto& file : files) {
    const std::string video = file.parent_path().filename().string();
    const std::string cls = file.parent_path().parent_path().filename().string();
    const auto vars = read_mat_file(file);
    const auto it = vars.find("pos_img");
    if (it == vars.end()) throw Error(ErrorCode::kUnrecognizedLayout, file.string() + " has no pos_img");
    const MatArray& a = it->second;
    if (a.dims.size() < 2 || a.dims[0] != 2 || a.dims[1] != joints) {
      throw Error(ErrorCode::kJointCountMismatch, file.string() + ": pos_img is not 2 x 15 x T");
    }
    const std::size_t frames = a.dims.size() > 2 ? a.dims[2] : 1;
    SkeletonSequence seq;
    for (std::size_t t = 0; t < frames; ++t) {
      SkeletonFrame f;
      f.index = static_cast<std::int64_t>(t);
      for (std::size_t j = 0; j < joints; ++j) {
        const std::size_t base = 2 * (j + joints * t);
        f.joints.push_back({a.data[base], a.data[base + 1], 0.0});
      }
      validate_frame(f, ds.topology);
      seq.frames.push_back(std::move(f));
    }
    if (seq.frames.empty()) continue;
    const int label = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), cls) - classes.begin());
    seq.label = label;
    seq.meta = video;
    ds.manifest.entries.push_back({"sequences/" + cls + "/" + video + ".jsonl", label, ""});
    ds.sequences.push_back(std::move(seq));
  }
  if (ds.sequences.empty()) throw Error(ErrorCode::kNoSequencesFound, "all JHMDB sequences were empty");
  return ds;
}

}  // namespace

SourceFormat parse_source_format(std::string_view text) {
  if (text == "auto") return SourceFormat::kAuto;
  if (text == "utkinect") return SourceFormat::kUtKinect;
  if (text == "jhmdb") return SourceFormat::kJhmdb;
  throw Error(ErrorCode::kInvalidArgument, "unknown source format '" + std::string(text) + "'");
}

std::string_view to_string(SourceFormat format) {
  switch (format) {
    case SourceFormat::kAuto: return "auto";
    case SourceFormat::kUtKinect: return "utkinect";
    case SourceFormat::kJhmdb: return "jhmdb";
  }
  return "unknown";
}

const std::vector<std::string>& utkinect_class_names() {
  static const std::vector<std::string> names = {"walk", "sitDown", "standUp", "pickUp", "carry",
                                                 "throw", "push", "pull", "waveHands", "clapHands"};
  return names;
}

SourceFormat detect_source_format(const fs::path& src) {
  require_dir(src);
  if (!find_files(src, jhmdb_pattern()).empty()) return SourceFormat::kJhmdb;
  if (!find_files(src, utk_joints_pattern()).empty()) return SourceFormat::kUtKinect;
  if (!has_regular_files(src)) throw Error(ErrorCode::kNoSequencesFound, "no files under " + src.string());
  throw Error(ErrorCode::kUnrecognizedLayout, "no UT-Kinect or JHMDB files under " + src.string());
}

Dataset convert_dataset(SourceFormat format, const fs::path& src) {
  require_dir(src);
  if (format == SourceFormat::kAuto) format = detect_source_format(src);
  Dataset ds = format == SourceFormat::kUtKinect ? convert_utkinect(src) : convert_jhmdb(src);
  ds.manifest.split.kind = SplitSpec::Kind::kFraction;
  ds.manifest.split.train_fraction = 0.5;
  validate_manifest(ds.manifest);
  return ds;
}

}  // namespace skelact
