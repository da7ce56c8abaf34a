#include "metalearn/error.hpp"

namespace metalearn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kFileNotFound: return "file-not-found";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kTargetMissing: return "target-missing";
    case ErrorCode::kSingleClassTarget: return "single-class-target";
    case ErrorCode::kClassTooSmall: return "class-too-small";
    case ErrorCode::kKOutOfRange: return "k-out-of-range";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kDegenerateTrainingData: return "degenerate-training-data";
    case ErrorCode::kMissingValues: return "missing-values";
    case ErrorCode::kSchemaMismatch: return "schema-mismatch";
    case ErrorCode::kEmptyMatrix: return "empty-matrix";
    case ErrorCode::kGridTooLarge: return "grid-too-large";
    case ErrorCode::kDatasetTooSmall: return "dataset-too-small";
    case ErrorCode::kReferentialIntegrity: return "referential-integrity";
    case ErrorCode::kUnknownDataset: return "unknown-dataset";
    case ErrorCode::kUnknownMetric: return "unknown-metric";
    case ErrorCode::kEmptyKnowledgeBase: return "empty-kb";
    case ErrorCode::kNoExperiments: return "no-experiments";
    case ErrorCode::kDegenerateLabels: return "degenerate-labels";
    case ErrorCode::kCatalogueMismatch: return "catalogue-mismatch";
    case ErrorCode::kZeroUsableDimensions: return "zero-usable-dimensions";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kInternal: return "internal-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool Error::is_data_error() const noexcept {
  switch (code_) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInternal:
      return false;
    default:
      return true;
  }
}

}  // namespace metalearn
