#include "tvparcor/errors.hpp"

namespace tvparcor {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NotFiltered: return "NotFiltered";
    case ErrorCode::NotSmoothed: return "NotSmoothed";
    case ErrorCode::RangeExhausted: return "RangeExhausted";
    case ErrorCode::RangeMismatch: return "RangeMismatch";
    case ErrorCode::SingularStage: return "SingularStage";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SingularTransfer: return "SingularTransfer";
    case ErrorCode::ZeroDiagonal: return "ZeroDiagonal";
    case ErrorCode::SingularSpectrum: return "SingularSpectrum";
    case ErrorCode::NonPositiveSpectrum: return "NonPositiveSpectrum";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IntegrityError: return "IntegrityError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tvparcor
