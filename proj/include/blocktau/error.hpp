#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blocktau {

enum class ErrorCode {
  LengthMismatch,
  DegenerateSample,
  InvalidPair,
  InvalidPartition,
  InvalidBlock,
  InvalidN,
  MissingQuantity,
  NoLocalData,
  DegenerateWeights,
  InvalidKernel,
  OutOfRange,
  InvalidBlockSize,
  InvalidK,
  NotRepairable,
  NonNormalizedGenerator,
  BracketingFailure,
  SingularPortfolio,
  SingularCovariance,
  EmptySeries,
  NotPositiveDefinite,
  ConfigError,
  ParseError,
  EmptyAfterFiltering,
  UnknownCommand,
  InvalidArgument,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorCode::ParseError, message), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace blocktau
