#include "skelact/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skelact/error.hpp"
#include "skelact/stream.hpp"

namespace skelact {
namespace {

using nlohmann::json;

}  // namespace

void validate_manifest(const DatasetManifest& m) {
  if (m.class_names.empty()) throw Error(ErrorCode::kMissingLabels, "manifest has no classes");
  const auto k = static_cast<int>(m.class_names.size());
  for (const auto& e : m.entries) {
    if (e.label < 0 || e.label >= k) {
      throw Error(ErrorCode::kLabelOutOfRange, "entry '" + e.path + "' has label " +
                                                   std::to_string(e.label));
    }
  }
  if (m.split.kind == SplitSpec::Kind::kLists) {
    std::set<std::size_t> seen;
    for (const auto* list : {&m.split.train, &m.split.test}) {
      for (std::size_t i : *list) {
        if (i >= m.entries.size()) throw Error(ErrorCode::kInvalidArgument, "split index out of range");
        if (!seen.insert(i).second) throw Error(ErrorCode::kInvalidArgument, "split lists overlap");
      }
    }
  } else if (!(m.split.train_fraction >= 0.0 && m.split.train_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must be in [0,1]");
  }
}

std::string manifest_to_json(const DatasetManifest& m) {
  json doc;
  doc["topology"] = m.topology;
  doc["class_names"] = m.class_names;
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"path", e.path}, {"label", e.label}, {"subject", e.subject}});
  }
  doc["sequences"] = std::move(entries);
  if (m.split.kind == SplitSpec::Kind::kFraction) {
    doc["split"] = {{"kind", "fraction"},
                    {"train_fraction", m.split.train_fraction},
                    {"seed", m.split.seed}};
  } else {
    doc["split"] = {{"kind", "lists"}, {"train", m.split.train}, {"test", m.split.test}};
  }
  return doc.dump(2);
}

DatasetManifest manifest_from_json(std::string_view text) {
  DatasetManifest m;
  try {
    const json doc = json::parse(text);
    m.topology = doc.at("topology").get<std::string>();
    m.class_names = doc.at("class_names").get<std::vector<std::string>>();
    for (const auto& e : doc.at("sequences")) {
      m.entries.push_back({e.at("path").get<std::string>(), e.at("label").get<int>(),
                           e.value("subject", std::string{})});
    }
    if (auto it = doc.find("split"); it != doc.end()) {
      const auto kind = it->value("kind", std::string("fraction"));
      if (kind == "fraction") {
        m.split.kind = SplitSpec::Kind::kFraction;
        m.split.train_fraction = it->value("train_fraction", 0.5);
        m.split.seed = it->value("seed", std::uint64_t{0});
      } else if (kind == "lists") {
        m.split.kind = SplitSpec::Kind::kLists;
        m.split.train = it->at("train").get<std::vector<std::size_t>>();
        m.split.test = it->at("test").get<std::vector<std::size_t>>();
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown split kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("manifest: ") + e.what());
  }
  validate_manifest(m);
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return manifest_from_json(buf.str());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << manifest_to_json(manifest) << '\n';
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  Dataset ds;
  ds.manifest = load_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  // Topology names resolve against built-ins first, then relative to the manifest.
  try {
    ds.topology = builtin_topology(ds.manifest.topology);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnknownTopology) throw;
    ds.topology = load_topology_file(base / ds.manifest.topology);
  }
  ds.sequences.reserve(ds.manifest.entries.size());
  for (const auto& e : ds.manifest.entries) {
    const auto path = base / e.path;
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kIoError, "sequence file missing: " + path.string());
    }
    auto seq = read_sequence_file(path, ds.topology);
    seq.label = e.label;
    seq.subject = e.subject;
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < dataset.sequences.size(); ++i) {
    const auto path = dir / dataset.manifest.entries[i].path;
    std::filesystem::create_directories(path.parent_path());
    write_sequence_file(path, dataset.sequences[i]);
  }
  save_manifest(dataset.manifest, dir / "manifest.json");
}

std::vector<int> labels_of(const Dataset& dataset) {
  std::vector<int> labels;
  labels.reserve(dataset.manifest.entries.size());
  for (const auto& e : dataset.manifest.entries) labels.push_back(e.label);
  return labels;
}

SplitIndices split_dataset(const DatasetManifest& manifest) {
  if (manifest.split.kind == SplitSpec::Kind::kLists) {
    return {manifest.split.train, manifest.split.test};
  }
  std::vector<int> labels;
  for (const auto& e : manifest.entries) labels.push_back(e.label);
  return stratified_split(labels, 1.0 - manifest.split.train_fraction, manifest.split.seed);
}

std::vector<LabeledTensor> make_offline_tensors(const Dataset& dataset,
                                                std::span<const std::size_t> indices,
                                                const FeatureSchema& schema, std::size_t n,
                                                bool root_center_frames) {
  std::vector<LabeledTensor> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    auto seq = resample_sequence(dataset.sequences.at(i), n);
    if (root_center_frames) {
      for (auto& f : seq.frames) f = root_center(f, dataset.topology);
    }
    out.push_back({assemble_sequence_tensor(seq.frames, schema, n), dataset.manifest.entries[i].label});
  }
  return out;
}

}  // namespace skelact
