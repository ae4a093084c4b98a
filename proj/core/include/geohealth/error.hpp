#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geohealth {

enum class ErrorCode {
  // input data
  FileNotFound,
  ParseError,
  MissingBoundary,
  DegenerateGeometry,
  DuplicateRegionId,
  DuplicateCentroid,
  MissingColumn,
  NonNumericCell,
  RegionIdMismatch,
  MissingRegion,
  RaggedRows,
  UnknownGroup,
  ShapeMismatch,
  // numerical failures
  RankDeficient,
  NonConvergence,
  DegenerateData,
  NonFiniteLoss,
  LeakageDetected,
  // configuration / precondition violations
  InvalidArgument,
  InvalidConfig,
  KTooLarge,
  DimTooLarge,
  EmptyTestSet,
  EmptyTrainSet,
  EmptyTrainMask,
  EmptyMask,
  TooFewRows,
  GraphTooSmall,
  AlreadyStandardized,
  NoRecordedForward,
  UntrainedModel,
};

enum class ErrorCategory { input, numeric, config };

std::string_view error_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

/// Every failure raised by the library. `code()` is stable and machine-readable;
/// `what()` is "<Name>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const { return error_name(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Non-fatal findings (constant columns, disconnected folds, ...) collected
/// by operations that accept an optional sink.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const noexcept { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

}  // namespace geohealth
