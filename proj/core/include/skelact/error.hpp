#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skelact {

enum class ErrorCode {
  kInvalidArgument,
  kUnknownTopology,
  kMalformedTopology,
  kMalformedRecord,
  kJointCountMismatch,
  kNonFiniteValue,
  kOutOfOrderFrame,
  kDegenerateGeometry,
  kFrameCountMismatch,
  kShapeMismatch,
  kEmptyBatch,
  kLabelOutOfRange,
  kDegenerateDataset,
  kVersionMismatch,
  kCorruptModel,
  kClassCountMismatch,
  kNumericFailure,
  kIoError,
  kNoSequencesFound,
  kUnrecognizedLayout,
  kMissingLabels,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported as skelact::Error; code() identifies the
// failure class so callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace skelact
