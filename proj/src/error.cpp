#include "ngtrend/error.hpp"

namespace ngtrend {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroMass: return "ZeroMass";
    case ErrorCode::kNotFinite: return "NotFinite";
    case ErrorCode::kUnsupportedKernel: return "UnsupportedKernel";
    case ErrorCode::kZeroEvidence: return "ZeroEvidence";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kUndefinedAt: return "UndefinedAt";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNumericalBlowup: return "NumericalBlowup";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

}  // namespace ngtrend
