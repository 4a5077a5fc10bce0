#include "blocktau/error.hpp"

namespace blocktau {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InvalidBlock: return "InvalidBlock";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::MissingQuantity: return "MissingQuantity";
    case ErrorCode::NoLocalData: return "NoLocalData";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidBlockSize: return "InvalidBlockSize";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::NotRepairable: return "NotRepairable";
    case ErrorCode::NonNormalizedGenerator: return "NonNormalizedGenerator";
    case ErrorCode::BracketingFailure: return "BracketingFailure";
    case ErrorCode::SingularPortfolio: return "SingularPortfolio";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace blocktau
