#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>

#include "skelact/skeleton.hpp"

namespace skelact {

struct EndOfStream {
  friend bool operator==(const EndOfStream&, const EndOfStream&) = default;
};

using StreamEvent = std::variant<SkeletonFrame, EndOfStream>;

// One JSON-lines record: {"i": <int>, "j": [[x,y,z], ...]} or {"end": true}.
// Two-element joints are accepted for 2D topologies and embedded at z = 0.
StreamEvent parse_stream_line(std::string_view line, const Topology& topology);

// Coordinates are written in fixed notation with 6 decimal digits.
std::string serialize_frame(const SkeletonFrame& frame);
std::string serialize_end_of_stream();

// A sequence file is a JSON-lines stream terminated by the end sentinel.
// Blank lines are skipped; a missing sentinel is tolerated.
SkeletonSequence read_sequence(std::istream& in, const Topology& topology);
SkeletonSequence read_sequence_file(const std::filesystem::path& path,
                                    const Topology& topology);
void write_sequence(std::ostream& out, const SkeletonSequence& seq);
void write_sequence_file(const std::filesystem::path& path,
                         const SkeletonSequence& seq);

}  // namespace skelact
