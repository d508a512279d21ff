#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skelact/dataset.hpp"

namespace skelact {

enum class SourceFormat { kAuto, kUtKinect, kJhmdb };

SourceFormat parse_source_format(std::string_view text);
std::string_view to_string(SourceFormat format);

// UT-Kinect action names in label order.
const std::vector<std::string>& utkinect_class_names();

// Reads a native dataset tree into canonical sequences and a manifest whose
// entry paths point under sequences/. Use write_dataset to persist it.
//
// UT-Kinect: joints_sXX_eYY.txt files (frame id then 20 xyz triples per line)
// and actionLabel.txt with "<action>: <first> <last>" frame-id segments.
// JHMDB: <class>/<video>/joint_positions.mat holding pos_img (2 x 15 x T).
Dataset convert_dataset(SourceFormat format, const std::filesystem::path& src);

// Resolved format for a source tree; throws when nothing is recognised.
SourceFormat detect_source_format(const std::filesystem::path& src);

}  // namespace skelact
