#include "idstat/error.hpp"

namespace idstat {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kGridTooNarrow: return "grid_too_narrow";
    case ErrorCode::kBadPermutation: return "bad_permutation";
    case ErrorCode::kSizeMismatch: return "size_mismatch";
    case ErrorCode::kNotNormalized: return "not_normalized";
    case ErrorCode::kNotSquare: return "not_square";
    case ErrorCode::kTooLarge: return "too_large";
    case ErrorCode::kDegenerateAngles: return "degenerate_angles";
    case ErrorCode::kSpinMismatch: return "spin_mismatch";
    case ErrorCode::kPauliViolation: return "pauli_violation";
    case ErrorCode::kDomainError: return "domain_error";
    case ErrorCode::kBosePole: return "bose_pole";
    case ErrorCode::kSaturationExceeded: return "saturation_exceeded";
    case ErrorCode::kNoBracket: return "no_bracket";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kNoConvergence: return "no_convergence";
    case ErrorCode::kOffGrid: return "off_grid";
    case ErrorCode::kOrderOverflow: return "order_overflow";
    case ErrorCode::kDivergentSeries: return "divergent_series";
    case ErrorCode::kInvariantViolation: return "invariant_violation";
    case ErrorCode::kParseError: return "parse_error";
  }
  return "unknown";
}

}  // namespace idstat
