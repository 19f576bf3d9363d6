#pragma once

#include <stdexcept>
#include <string>

namespace arflow {

enum class ErrorCode {
  kDegenerateRotation,
  kNotARotation,
  kDimensionMismatch,
  kShapeMismatch,
  kGridTooLarge,
  kGridMismatch,
  kSingularTime,
  kUnknownCondition,
  kNonFiniteLoss,
  kInvalidConfig,
  kIoError,
  kSchemaError,
  kEmptyInput,
  kDegenerateCovariance,
  kInsufficientSamples,
};

const char* error_code_name(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateRotation: return "DegenerateRotation";
    case ErrorCode::kNotARotation: return "NotARotation";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kGridTooLarge: return "GridTooLarge";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kSingularTime: return "SingularTime";
    case ErrorCode::kUnknownCondition: return "UnknownCondition";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
  }
  return "Unknown";
}

}  // namespace arflow
