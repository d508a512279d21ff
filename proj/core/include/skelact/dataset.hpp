#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skelact/features.hpp"
#include "skelact/random.hpp"
#include "skelact/skeleton.hpp"
#include "skelact/tensor.hpp"

namespace skelact {

struct ManifestEntry {
  std::string path;  // relative to the manifest directory
  int label = 0;
  std::string subject;
};

struct SplitSpec {
  enum class Kind { kFraction, kLists };
  Kind kind = Kind::kFraction;
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct DatasetManifest {
  std::string topology;
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
  SplitSpec split;
};

// Labels in range, split lists within bounds and disjoint.
void validate_manifest(const DatasetManifest& manifest);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct Dataset {
  DatasetManifest manifest;
  Topology topology;
  std::vector<SkeletonSequence> sequences;  // parallel to manifest.entries
};

// Loads a manifest and every sequence it references.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes <dir>/manifest.json plus one JSON-lines file per entry.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Train (first) / test (second) indices. Fraction splits are stratified by
// class and seeded.
SplitIndices split_dataset(const DatasetManifest& manifest);

std::vector<int> labels_of(const Dataset& dataset);

// Resamples each selected sequence to n frames and assembles its tensor.
std::vector<LabeledTensor> make_offline_tensors(const Dataset& dataset,
                                                std::span<const std::size_t> indices,
                                                const FeatureSchema& schema, std::size_t n,
                                                bool root_center = false);

}  // namespace skelact
