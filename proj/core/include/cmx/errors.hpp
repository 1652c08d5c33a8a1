#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmx {

enum class ErrorCode {
  EmptyClass,
  InsufficientSamples,
  SingularMatrix,
  DegenerateVector,
  NumericalError,
  UnknownClass,
  EmptyDataset,
  DimensionMismatch,
  UndefinedEntropy,
  InvalidSpec,
  UnknownPreset,
  InvalidArgument,
  ParseError,
  StratificationError,
  JoinError,
  IoError,
};

/// Coarse grouping used for process exit codes.
enum class ErrorCategory { Validation, Numerical, Io };

ErrorCategory category_of(ErrorCode code) noexcept;
std::string_view to_string(ErrorCode code) noexcept;

/// Exit code for a failure category: 2 validation, 3 numerical, 4 I/O.
int exit_code_for(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

/// Parse failure carrying the 1-based line number of the offending input.
class ParseError : public Error {
 public:
  enum class Kind { MalformedHeader, RaggedRow, NonFiniteValue, DuplicateId, BadNumber, BadField };

  ParseError(Kind kind, std::size_t line, const std::string& message);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

}  // namespace cmx
