#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "idstat/modes.hpp"

namespace idstat::symmetry {

/// coeff * mode[0](1) mode[1](2) ... : position j is Hilbert-space slot j.
struct ProductTerm {
  Complex coeff;
  std::vector<ModeId> modes;
};

/// Terms whose coefficient magnitude falls at or below this are dropped when a
/// state is canonicalized.
inline constexpr double kZeroTolerance = 1e-14;

/// Finite sum of product terms over n slots, always kept in canonical form:
/// assignments sorted lexicographically, duplicates merged, zero terms dropped.
/// The empty term list is the zero state.
class NParticleState {
 public:
  explicit NParticleState(std::size_t n) : n_(n) {}
  /// Throws kSizeMismatch if a term's assignment length differs from n,
  /// kInvalidArgument for a non-finite coefficient.
  NParticleState(std::size_t n, std::vector<ProductTerm> terms);

  static NParticleState product(std::vector<ModeId> modes, Complex coeff = 1.0);

  std::size_t n() const { return n_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Coefficient of an assignment, 0 when absent.
  Complex coefficient(std::span<const ModeId> modes) const;

  NParticleState operator+(const NParticleState& other) const;
  NParticleState operator-(const NParticleState& other) const;
  NParticleState operator*(Complex factor) const;

  /// Exact equality of canonical forms.
  friend bool operator==(const NParticleState& a, const NParticleState& b);

 private:
  void canonicalize();

  std::size_t n_ = 0;
  std::vector<ProductTerm> terms_;
};

/// Same assignments, coefficients within `tol` (absolute). Assignments whose
/// coefficient is below `tol` on one side and absent on the other match.
bool approx_equal(const NParticleState& a, const NParticleState& b, double tol);

/// Bijection of {0..n-1}; image(j) is where slot j is sent.
class Permutation {
 public:
  /// Throws kBadPermutation if `image` is not a bijection of {0..n-1}.
  explicit Permutation(std::vector<std::size_t> image);
  static Permutation identity(std::size_t n);
  static Permutation transposition(std::size_t n, std::size_t i, std::size_t j);

  std::size_t size() const { return image_.size(); }
  std::size_t operator()(std::size_t j) const { return image_[j]; }
  Permutation inverse() const;
  /// (this * other)(j) = this(other(j)).
  Permutation compose(const Permutation& other) const;
  /// +1 for even, -1 for odd permutations.
  int sign() const;
  const std::vector<std::size_t>& image() const { return image_; }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> image_;
};

/// Moves the mode sitting in slot j to slot perm(j) in every term.
/// Throws kBadPermutation when perm.size() != s.n().
NParticleState permute_labels(const NParticleState& s, const Permutation& perm);

enum class Coefficients {
  /// Only the function parameters move; coefficients stay with their terms.
  kFixed,
  /// The indices of the coefficients are exchanged together with the function
  /// parameters: sum_r c_{pi r} psi_{pi r}.
  kFollowParameters,
};

/// Slot j receives the parameters of the mode that sat in slot perm(j).
/// With Coefficients::kFixed this equals permute_labels(s, perm.inverse()) on
/// every state. With kFollowParameters the result agrees with
/// permute_labels(s, perm) exactly when s has perm-symmetric coefficients.
NParticleState permute_parameters(const NParticleState& s, const Permutation& perm,
                                  Coefficients coefficients = Coefficients::kFixed);

/// True when every label permutation leaves the coefficient table unchanged
/// (within kZeroTolerance).
bool has_symmetric_coefficients(const NParticleState& s);

/// (1/n!) sum over all permutations P s. Throws kTooLarge for n > kMaxProjectorN.
NParticleState symmetrize(const NParticleState& s);
/// (1/n!) sum over all permutations sign(P) P s. Repeated modes within a term
/// cancel exactly.
NParticleState antisymmetrize(const NParticleState& s);

inline constexpr std::size_t kMaxProjectorN = 10;

/// sum_{terms} conj(c_a) c_b prod_j ov(a_j, b_j). Throws kSizeMismatch for
/// different particle counts.
Complex scalar_product(const NParticleState& a, const NParticleState& b,
                       const OverlapProvider& ov);

/// alpha phi(1) eta(2) + beta phi(2) eta(1). Throws kNotNormalized unless
/// |alpha|^2 + |beta|^2 = 1 within 1e-9.
NParticleState exchange_superposition(ModeId phi, ModeId eta, Complex alpha, Complex beta);

/// (|alpha|^2 + |beta|^2) direct + 2 Re{conj(alpha) beta} exchange, where
/// direct = (phi eta, O phi eta) and exchange = (phi eta, O eta phi) for a
/// symmetric operator O supplied by the caller.
Complex interference_value(Complex alpha, Complex beta, Complex direct, Complex exchange);

/// M(i, j) = ov(a[i], b[j]). Throws kSizeMismatch for unequal lengths.
Eigen::MatrixXcd overlap_matrix(std::span<const ModeId> a, std::span<const ModeId> b,
                                const OverlapProvider& ov);

/// (b(1,2) + sign b(2,1), a(1,2)): only the final state is (anti)symmetrized.
/// Throws kSizeMismatch unless both states have n = 2, kInvalidArgument
/// unless sign is +1 or -1.
Complex feynman_amplitude(const NParticleState& b, const NParticleState& a, int sign,
                          const OverlapProvider& ov);

/// ((b(1,2) + sign b(2,1))/sqrt2, (a(1,2) + sign a(2,1))/sqrt2): both sides
/// (anti)symmetrized and normalized.
Complex standard_amplitude(const NParticleState& b, const NParticleState& a, int sign,
                           const OverlapProvider& ov);

}  // namespace idstat::symmetry
