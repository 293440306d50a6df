#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idstat {

enum class ErrorCode {
  kInvalidArgument,
  kGridTooNarrow,
  kBadPermutation,
  kSizeMismatch,
  kNotNormalized,
  kNotSquare,
  kTooLarge,
  kDegenerateAngles,
  kSpinMismatch,
  kPauliViolation,
  kDomainError,
  kBosePole,
  kSaturationExceeded,
  kNoBracket,
  kInfeasible,
  kNoConvergence,
  kOffGrid,
  kOrderOverflow,
  kDivergentSeries,
  kInvariantViolation,
  kParseError,
};

/// Stable snake_case identifier, used in the CLI's `error: <code>: ...` line.
std::string_view code_name(ErrorCode code);

/// Every recoverable failure in the library is reported as an Error carrying
/// one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace idstat
