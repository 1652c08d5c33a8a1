#include "cmx/errors.hpp"

namespace cmx {

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularMatrix:
    case ErrorCode::DegenerateVector:
    case ErrorCode::NumericalError:
      return ErrorCategory::Numerical;
    case ErrorCode::IoError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Validation;
  }
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UndefinedEntropy: return "UndefinedEntropy";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::StratificationError: return "StratificationError";
    case ErrorCode::JoinError: return "JoinError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Io: return 4;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(Kind kind, std::size_t line, const std::string& message)
    : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message),
      kind_(kind),
      line_(line) {}

}  // namespace cmx
