#pragma once

#include <complex>

#include <Eigen/Dense>

namespace idstat {

inline constexpr Eigen::Index kMaxPermanentN = 20;

/// Ryser inclusion-exclusion with Gray-code column updates, O(2^n n).
/// Bosonic (symmetrized) product overlaps are permanents of the overlap
/// matrix. Throws kNotSquare, or kTooLarge for n > kMaxPermanentN.
std::complex<double> permanent(const Eigen::MatrixXcd& m);

/// Gaussian elimination with partial pivoting. Fermionic (antisymmetrized)
/// product overlaps are determinants of the overlap matrix. Throws kNotSquare.
std::complex<double> determinant(const Eigen::MatrixXcd& m);

namespace oracle {

/// Direct sums over all n! permutations. Reference values for tests and
/// selftest; n <= 10.
std::complex<double> naive_permanent(const Eigen::MatrixXcd& m);
std::complex<double> naive_determinant(const Eigen::MatrixXcd& m);

}  // namespace oracle

}  // namespace idstat
