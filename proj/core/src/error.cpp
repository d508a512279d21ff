#include "skelact/error.hpp"

namespace skelact {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownTopology: return "UnknownTopology";
    case ErrorCode::kMalformedTopology: return "MalformedTopology";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kJointCountMismatch: return "JointCountMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kOutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kFrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kDegenerateDataset: return "DegenerateDataset";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptModel: return "CorruptModel";
    case ErrorCode::kClassCountMismatch: return "ClassCountMismatch";
    case ErrorCode::kNumericFailure: return "NumericFailure";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kNoSequencesFound: return "NoSequencesFound";
    case ErrorCode::kUnrecognizedLayout: return "UnrecognizedLayout";
    case ErrorCode::kMissingLabels: return "MissingLabels";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace skelact
