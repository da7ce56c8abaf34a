#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metalearn {

enum class ErrorCode {
  kInvalidArgument,
  kFileNotFound,
  kParse,
  kTargetMissing,
  kSingleClassTarget,
  kClassTooSmall,
  kKOutOfRange,
  kInvalidConfig,
  kDegenerateTrainingData,
  kMissingValues,
  kSchemaMismatch,
  kEmptyMatrix,
  kGridTooLarge,
  kDatasetTooSmall,
  kReferentialIntegrity,
  kUnknownDataset,
  kUnknownMetric,
  kEmptyKnowledgeBase,
  kNoExperiments,
  kDegenerateLabels,
  kCatalogueMismatch,
  kZeroUsableDimensions,
  kIo,
  kInternal,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures raised by the library carry one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // True for failures caused by bad input data (as opposed to bad usage or
  // bugs); the CLI maps these to exit code 2.
  bool is_data_error() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace metalearn
