#include "geohealth/error.hpp"

namespace geohealth {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingBoundary: return "MissingBoundary";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::DuplicateRegionId: return "DuplicateRegionId";
    case ErrorCode::DuplicateCentroid: return "DuplicateCentroid";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::RegionIdMismatch: return "RegionIdMismatch";
    case ErrorCode::MissingRegion: return "MissingRegion";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::LeakageDetected: return "LeakageDetected";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DimTooLarge: return "DimTooLarge";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::EmptyTrainMask: return "EmptyTrainMask";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::GraphTooSmall: return "GraphTooSmall";
    case ErrorCode::AlreadyStandardized: return "AlreadyStandardized";
    case ErrorCode::NoRecordedForward: return "NoRecordedForward";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound:
    case ErrorCode::ParseError:
    case ErrorCode::MissingBoundary:
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::DuplicateRegionId:
    case ErrorCode::DuplicateCentroid:
    case ErrorCode::MissingColumn:
    case ErrorCode::NonNumericCell:
    case ErrorCode::RegionIdMismatch:
    case ErrorCode::MissingRegion:
    case ErrorCode::RaggedRows:
    case ErrorCode::UnknownGroup:
    case ErrorCode::ShapeMismatch:
      return ErrorCategory::input;
    case ErrorCode::RankDeficient:
    case ErrorCode::NonConvergence:
    case ErrorCode::DegenerateData:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::LeakageDetected:
      return ErrorCategory::numeric;
    default:
      return ErrorCategory::config;
  }
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code), detail_(detail) {}

}  // namespace geohealth
