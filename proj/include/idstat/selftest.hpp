#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace idstat {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Small, fast versions of the oracle cross-checks: enumeration vs closed-form
/// counts, Ryser vs the n!-sum permanent, Pauli cancellation, the exchange
/// phase, the two two-particle amplitude forms, packet norm, the mu round
/// trip and stationary detailed balance.
std::vector<SelftestResult> run_selftest();

}  // namespace idstat
