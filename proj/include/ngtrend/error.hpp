#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ngtrend {

enum class ErrorCode {
  kZeroMass,
  kNotFinite,
  kUnsupportedKernel,
  kZeroEvidence,
  kDomainError,
  kInvalidParameter,
  kUndefinedAt,
  kNonFiniteInput,
  kLengthMismatch,
  kNumericalBlowup,
  kDegenerateData,
  kInvalidSpec,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-status mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ngtrend
