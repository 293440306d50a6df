#include "idstat/counting.hpp"

#include <cmath>
#include <sstream>

#include "idstat/error.hpp"

namespace idstat::counting {

namespace {

void require_cells(const OccupancyRegion& r) {
  if (r.g == 0) throw Error(ErrorCode::kInvalidArgument, "region needs at least one cell (g >= 1)");
}

void require_pauli(const OccupancyRegion& r) {
  if (r.n > r.g) {
    std::ostringstream os;
    os << "Pauli violation: " << r.n << " fermions cannot occupy " << r.g << " cells";
    throw Error(ErrorCode::kPauliViolation, os.str());
  }
}

BigInt binomial(std::uint64_t top, std::uint64_t k) {
  if (k > top) return 0;
  k = std::min(k, top - k);
  BigInt result = 1;
  // Each partial product is itself a binomial coefficient, so the division is exact.
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= top - k + i;
    result /= i;
  }
  return result;
}

BigInt factorial(std::uint64_t n) {
  BigInt f = 1;
  for (std::uint64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

std::uint64_t count_bose(std::uint64_t left, std::uint64_t cells) {
  if (cells == 1) return 1;
  std::uint64_t total = 0;
  for (std::uint64_t here = 0; here <= left; ++here) total += count_bose(left - here, cells - 1);
  return total;
}

std::uint64_t count_fermi(std::uint64_t next, std::uint64_t g, std::uint64_t left) {
  if (left == 0) return 1;
  if (g - next < left) return 0;
  return count_fermi(next + 1, g, left - 1) + count_fermi(next + 1, g, left);
}

void walk_bose(std::uint64_t left, std::uint64_t cells, std::vector<std::uint64_t>& cur,
               std::vector<std::vector<std::uint64_t>>& out) {
  if (cells == 1) {
    cur.push_back(left);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::uint64_t here = 0; here <= left; ++here) {
    cur.push_back(here);
    walk_bose(left - here, cells - 1, cur, out);
    cur.pop_back();
  }
}

void walk_fermi(std::uint64_t next, std::uint64_t g, std::uint64_t left,
                std::vector<std::uint64_t>& cur, std::vector<std::vector<std::uint64_t>>& out) {
  if (left == 0) {
    out.push_back(cur);
    return;
  }
  if (g - next < left) return;
  cur.push_back(next);
  walk_fermi(next + 1, g, left - 1, cur, out);
  cur.pop_back();
  walk_fermi(next + 1, g, left, cur, out);
}

void require_enumerable(const OccupancyRegion& r) {
  require_cells(r);
  if (r.n + r.g > kOracleLimit) {
    std::ostringstream os;
    os << "enumeration limited to n + g <= " << kOracleLimit << " (got " << r.n + r.g << ")";
    throw Error(ErrorCode::kTooLarge, os.str());
  }
}

double lgamma1(double x) { return std::lgamma(x + 1.0); }

}  // namespace

BigInt bose_w(const OccupancyRegion& r) {
  require_cells(r);
  return binomial(r.n + r.g - 1, r.n);
}

BigInt fermi_w(const OccupancyRegion& r) {
  require_cells(r);
  require_pauli(r);
  return binomial(r.g, r.n);
}

Rational boltzmann_w(const OccupancyRegion& r) {
  require_cells(r);
  BigInt power = 1;
  for (std::uint64_t i = 0; i < r.n; ++i) power *= r.g;
  return Rational(power, factorial(r.n));
}

LimitCorrection limit_correction(const OccupancyRegion& r) {
  require_cells(r);
  const double n = static_cast<double>(r.n);
  const double delta = n * (n - 1.0) / (2.0 * static_cast<double>(r.g));
  return {1.0 + delta, 1.0 - delta};
}

Rational ratio_to_boltzmann(const OccupancyRegion& r, Statistics stat) {
  const Rational classical = boltzmann_w(r);
  switch (stat) {
    case Statistics::kBose: return Rational(bose_w(r)) / classical;
    case Statistics::kFermi: return Rational(fermi_w(r)) / classical;
    case Statistics::kBoltzmann: return 1;
  }
  return 1;
}

BigInt oracle_count(const OccupancyRegion& r, Statistics stat) {
  require_enumerable(r);
  switch (stat) {
    case Statistics::kBose: return count_bose(r.n, r.g);
    case Statistics::kFermi: return count_fermi(0, r.g, r.n);
    case Statistics::kBoltzmann: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "no enumeration oracle for Boltzmann counting");
}

std::vector<std::vector<std::uint64_t>> enumerate_bose(const OccupancyRegion& r) {
  require_enumerable(r);
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> cur;
  walk_bose(r.n, r.g, cur, out);
  return out;
}

std::vector<std::vector<std::uint64_t>> enumerate_fermi(const OccupancyRegion& r) {
  require_enumerable(r);
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> cur;
  walk_fermi(0, r.g, r.n, cur, out);
  return out;
}

MultiIndexFraction multi_index_fraction(std::uint64_t n, std::uint64_t g) {
  if (n < 1 || n > g) {
    std::ostringstream os;
    os << "multi-index fraction needs 1 <= n <= g (n=" << n << ", g=" << g << ")";
    throw Error(ErrorCode::kDomainError, os.str());
  }
  // g!/((g-n)! g^n) = prod_{k<n} (1 - k/g); summing log1p and using expm1
  // keeps the small result accurate for n << g.
  const double gd = static_cast<double>(g);
  double log_all_distinct = 0.0;
  for (std::uint64_t k = 1; k < n; ++k) log_all_distinct += std::log1p(-static_cast<double>(k) / gd);
  const double nd = static_cast<double>(n);
  return {-std::expm1(log_all_distinct), nd * (nd - 1.0) / (2.0 * gd)};
}

double log_big(const BigInt& value) {
  if (value <= 0) throw Error(ErrorCode::kDomainError, "logarithm of a non-positive integer");
  const std::size_t bits = boost::multiprecision::msb(value);
  if (bits < 1000) return std::log(value.convert_to<double>());
  const std::size_t shift = bits - 60;
  const BigInt top = value >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

double log_w(const OccupancyRegion& r, Statistics stat) {
  require_cells(r);
  const double n = static_cast<double>(r.n);
  const double g = static_cast<double>(r.g);
  const bool small = r.n + r.g <= 21;
  switch (stat) {
    case Statistics::kBose:
      if (small) return log_big(bose_w(r));
      return std::lgamma(n + g) - lgamma1(n) - std::lgamma(g);
    case Statistics::kFermi:
      require_pauli(r);
      if (small) return log_big(fermi_w(r));
      return lgamma1(g) - lgamma1(n) - lgamma1(g - n);
    case Statistics::kBoltzmann:
      if (small) {
        const Rational w = boltzmann_w(r);
        return log_big(boost::multiprecision::numerator(w)) -
               log_big(boost::multiprecision::denominator(w));
      }
      return n * std::log(g) - lgamma1(n);
  }
  return 0.0;
}

double entropy(const RegionSet& rs, Statistics stat) {
  if (rs.regions.empty()) throw Error(ErrorCode::kInvalidArgument, "region set is empty");
  double total = 0.0;
  for (const OccupancyRegion& r : rs.regions) total += log_w(r, stat);
  return rs.k * total;
}

double gibbs_correction(std::uint64_t n, double k) {
  return -k * lgamma1(static_cast<double>(n));
}

}  // namespace idstat::counting
