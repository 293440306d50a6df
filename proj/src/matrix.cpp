#include "idstat/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <vector>

#include "idstat/error.hpp"

namespace idstat {

namespace {

using Complex = std::complex<double>;

void require_square(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "matrix is " << m.rows() << "x" << m.cols() << ", expected square";
    throw Error(ErrorCode::kNotSquare, os.str());
  }
}

template <bool kSigned>
Complex permutation_sum(const Eigen::MatrixXcd& m) {
  require_square(m);
  const auto n = static_cast<std::size_t>(m.rows());
  if (n > 10) throw Error(ErrorCode::kTooLarge, "naive permutation sum limited to n <= 10");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Complex total = 0.0;
  do {
    Complex prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      prod *= m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    }
    if constexpr (kSigned) {
      std::size_t inversions = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j] ? 1 : 0;
      }
      if (inversions % 2 == 1) prod = -prod;
    }
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace

Complex permanent(const Eigen::MatrixXcd& m) {
  require_square(m);
  const Eigen::Index n = m.rows();
  if (n > kMaxPermanentN) {
    std::ostringstream os;
    os << "permanent of a " << n << "x" << n << " matrix exceeds the n <= " << kMaxPermanentN
       << " limit";
    throw Error(ErrorCode::kTooLarge, os.str());
  }
  if (n == 0) return 1.0;

  // perm(M) = (-1)^n sum_{S} (-1)^{|S|} prod_i sum_{j in S} m_ij, with the
  // column subsets S visited in Gray-code order so each step toggles one column.
  Eigen::VectorXcd row_sums = Eigen::VectorXcd::Zero(n);
  Complex total = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const int col = std::countr_zero(k);
    const std::uint64_t bit = std::uint64_t{1} << col;
    gray ^= bit;
    if (gray & bit) {
      row_sums += m.col(col);
    } else {
      row_sums -= m.col(col);
    }
    Complex prod = row_sums.prod();
    if (std::popcount(gray) % 2 == 1) prod = -prod;
    total += prod;
  }
  return n % 2 == 0 ? total : -total;
}

Complex determinant(const Eigen::MatrixXcd& m) {
  require_square(m);
  Eigen::MatrixXcd a = m;
  const Eigen::Index n = a.rows();
  Complex det = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    double best = std::abs(a(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        pivot = i;
      }
    }
    if (best == 0.0) return 0.0;
    if (pivot != k) {
      a.row(k).swap(a.row(pivot));
      det = -det;
    }
    det *= a(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const Complex factor = a(i, k) / a(k, k);
      a.row(i).tail(n - k) -= factor * a.row(k).tail(n - k);
    }
  }
  return det;
}

namespace oracle {

Complex naive_permanent(const Eigen::MatrixXcd& m) { return permutation_sum<false>(m); }
Complex naive_determinant(const Eigen::MatrixXcd& m) { return permutation_sum<true>(m); }

}  // namespace oracle

}  // namespace idstat
