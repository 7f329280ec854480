#pragma once

#include <stdexcept>
#include <string>

namespace turbo {

enum class ErrorCode {
  kSingularMatrix,
  kDimensionMismatch,
  kIndexOutOfRange,
  kEmptyInput,
  kZeroTotalWeight,
  kNotPsd,
  kInvalidParams,
  kNonDifferentiablePoint,
  kAllZeroWeights,
  kConfigError,
  kIoError,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable error code. Every failure raised by
/// the library is an Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kZeroTotalWeight: return "ZeroTotalWeight";
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNonDifferentiablePoint: return "NonDifferentiablePoint";
    case ErrorCode::kAllZeroWeights: return "AllZeroWeights";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace turbo
