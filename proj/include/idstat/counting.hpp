#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace idstat::counting {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class Statistics { kBose, kFermi, kBoltzmann };

/// n particles in a region of g quantum cells.
struct OccupancyRegion {
  std::uint64_t n = 0;
  std::uint64_t g = 1;
};

struct RegionSet {
  std::vector<OccupancyRegion> regions;
  double k = 1.0;
};

/// (n + g - 1)! / (n! (g - 1)!). Throws kInvalidArgument for g = 0.
BigInt bose_w(const OccupancyRegion& r);

/// g! / (n! (g - n)!). Throws kPauliViolation for n > g.
BigInt fermi_w(const OccupancyRegion& r);

/// g^n / n!, exact.
Rational boltzmann_w(const OccupancyRegion& r);

/// First-order corrections to g^n/n!: 1 + n(n-1)/2g (Bose), 1 - n(n-1)/2g (Fermi).
struct LimitCorrection {
  double bose;
  double fermi;
};
LimitCorrection limit_correction(const OccupancyRegion& r);

/// w * n! / g^n as an exact rational, i.e. the ratio to the Boltzmann count.
Rational ratio_to_boltzmann(const OccupancyRegion& r, Statistics stat);

inline constexpr std::uint64_t kOracleLimit = 24;

/// Count by explicit enumeration: Fermi walks the n-subsets of g cells, Bose
/// walks the ways to write n as an ordered sum of g nonnegative integers.
/// Boltzmann has no enumeration and is rejected with kInvalidArgument.
/// Throws kTooLarge when n + g > kOracleLimit.
BigInt oracle_count(const OccupancyRegion& r, Statistics stat);

/// Every Bose decomposition of n into g ordered nonnegative parts.
std::vector<std::vector<std::uint64_t>> enumerate_bose(const OccupancyRegion& r);
/// Every n-subset of {0..g-1}, as sorted cell indices.
std::vector<std::vector<std::uint64_t>> enumerate_fermi(const OccupancyRegion& r);

/// 1 - g!/((g-n)! g^n), the fraction of index tuples in a g^n sum that
/// repeat an index, and its large-g asymptote n(n-1)/2g.
struct MultiIndexFraction {
  double exact;
  double asymptote;
};
/// Throws kDomainError unless 1 <= n <= g.
MultiIndexFraction multi_index_fraction(std::uint64_t n, std::uint64_t g);

/// ln w for one region; exact big-integer evaluation while n + g <= 21,
/// log-gamma beyond.
double log_w(const OccupancyRegion& r, Statistics stat);

/// k sum_i ln w_i. Throws kPauliViolation for a Fermi region with n > g.
double entropy(const RegionSet& rs, Statistics stat);

/// -k ln N!.
double gibbs_correction(std::uint64_t n, double k);

/// ln of a positive big integer, accurate to double precision at any size.
double log_big(const BigInt& value);

}  // namespace idstat::counting
