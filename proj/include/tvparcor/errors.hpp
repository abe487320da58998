#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvparcor {

enum class ErrorCode {
  NonFiniteInput,
  NotSymmetric,
  DimensionMismatch,
  NonFiniteState,
  NotFiltered,
  NotSmoothed,
  RangeExhausted,
  RangeMismatch,
  SingularStage,
  OutOfRange,
  SingularTransfer,
  ZeroDiagonal,
  SingularSpectrum,
  NonPositiveSpectrum,
  InvalidArgument,
  ParseError,
  IntegrityError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tvparcor
