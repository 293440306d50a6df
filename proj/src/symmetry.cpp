#include "idstat/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "idstat/error.hpp"

namespace idstat::symmetry {

namespace {

using Assignment = std::vector<ModeId>;

void require_same_n(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": particle counts differ (" << a << " vs " << b << ")";
    throw Error(ErrorCode::kSizeMismatch, os.str());
  }
}

void require_perm_size(const NParticleState& s, const Permutation& perm) {
  if (perm.size() != s.n()) {
    std::ostringstream os;
    os << "permutation of " << perm.size() << " slots applied to a " << s.n()
       << "-particle state";
    throw Error(ErrorCode::kBadPermutation, os.str());
  }
}

Assignment move_labels(const Assignment& modes, const Permutation& perm) {
  Assignment out(modes.size());
  for (std::size_t j = 0; j < modes.size(); ++j) out[perm(j)] = modes[j];
  return out;
}

Assignment move_parameters(const Assignment& modes, const Permutation& perm) {
  Assignment out(modes.size());
  for (std::size_t j = 0; j < modes.size(); ++j) out[j] = modes[perm(j)];
  return out;
}

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

// Sum over the symmetric group with integer signed multiplicities per
// resulting assignment, so equal-magnitude contributions cancel exactly.
NParticleState project(const NParticleState& s, bool signed_sum) {
  const std::size_t n = s.n();
  if (n > kMaxProjectorN) {
    std::ostringstream os;
    os << "(anti)symmetrizer over " << n << " slots exceeds limit " << kMaxProjectorN;
    throw Error(ErrorCode::kTooLarge, os.str());
  }
  std::vector<Permutation> group;
  std::vector<int> signs;
  std::vector<std::size_t> image(n);
  std::iota(image.begin(), image.end(), std::size_t{0});
  do {
    group.emplace_back(image);
    signs.push_back(signed_sum ? group.back().sign() : 1);
  } while (std::next_permutation(image.begin(), image.end()));

  const double norm = 1.0 / factorial(n);
  std::vector<ProductTerm> out;
  for (const ProductTerm& term : s.terms()) {
    std::map<Assignment, long long> multiplicity;
    for (std::size_t k = 0; k < group.size(); ++k) {
      multiplicity[move_labels(term.modes, group[k])] += signs[k];
    }
    for (const auto& [modes, count] : multiplicity) {
      if (count == 0) continue;
      out.push_back({term.coeff * (static_cast<double>(count) * norm), modes});
    }
  }
  return NParticleState(n, std::move(out));
}

void require_normalized(Complex alpha, Complex beta) {
  const double total = std::norm(alpha) + std::norm(beta);
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "|alpha|^2 + |beta|^2 = " << total << ", expected 1";
    throw Error(ErrorCode::kNotNormalized, os.str());
  }
}

void require_pair(const NParticleState& s) {
  if (s.n() != 2) {
    std::ostringstream os;
    os << "two-particle state expected, got n = " << s.n();
    throw Error(ErrorCode::kSizeMismatch, os.str());
  }
}

void require_sign(int sign) {
  if (sign != 1 && sign != -1) {
    throw Error(ErrorCode::kInvalidArgument, "exchange sign must be +1 or -1");
  }
}

}  // namespace

NParticleState::NParticleState(std::size_t n, std::vector<ProductTerm> terms)
    : n_(n), terms_(std::move(terms)) {
  for (const ProductTerm& t : terms_) {
    if (t.modes.size() != n_) {
      std::ostringstream os;
      os << "term with " << t.modes.size() << " modes in a " << n_ << "-particle state";
      throw Error(ErrorCode::kSizeMismatch, os.str());
    }
    if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag())) {
      throw Error(ErrorCode::kInvalidArgument, "term coefficient is not finite");
    }
  }
  canonicalize();
}

NParticleState NParticleState::product(std::vector<ModeId> modes, Complex coeff) {
  const std::size_t n = modes.size();
  return NParticleState(n, {ProductTerm{coeff, std::move(modes)}});
}

void NParticleState::canonicalize() {
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const ProductTerm& a, const ProductTerm& b) { return a.modes < b.modes; });
  std::vector<ProductTerm> merged;
  merged.reserve(terms_.size());
  for (ProductTerm& t : terms_) {
    if (!merged.empty() && merged.back().modes == t.modes) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const ProductTerm& t) { return std::abs(t.coeff) <= kZeroTolerance; });
  terms_ = std::move(merged);
}

Complex NParticleState::coefficient(std::span<const ModeId> modes) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), modes,
                             [](const ProductTerm& t, std::span<const ModeId> key) {
                               return std::lexicographical_compare(t.modes.begin(), t.modes.end(),
                                                                   key.begin(), key.end());
                             });
  if (it != terms_.end() && std::equal(it->modes.begin(), it->modes.end(), modes.begin(), modes.end())) {
    return it->coeff;
  }
  return 0.0;
}

NParticleState NParticleState::operator+(const NParticleState& other) const {
  require_same_n(n_, other.n_, "state sum");
  std::vector<ProductTerm> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return NParticleState(n_, std::move(all));
}

NParticleState NParticleState::operator-(const NParticleState& other) const {
  return *this + other * Complex(-1.0);
}

NParticleState NParticleState::operator*(Complex factor) const {
  std::vector<ProductTerm> scaled = terms_;
  for (ProductTerm& t : scaled) t.coeff *= factor;
  return NParticleState(n_, std::move(scaled));
}

bool operator==(const NParticleState& a, const NParticleState& b) {
  if (a.n_ != b.n_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].modes != b.terms_[i].modes || a.terms_[i].coeff != b.terms_[i].coeff) {
      return false;
    }
  }
  return true;
}

bool approx_equal(const NParticleState& a, const NParticleState& b, double tol) {
  if (a.n() != b.n()) return false;
  for (const ProductTerm& t : a.terms()) {
    if (std::abs(t.coeff - b.coefficient(t.modes)) > tol) return false;
  }
  for (const ProductTerm& t : b.terms()) {
    if (std::abs(t.coeff - a.coefficient(t.modes)) > tol) return false;
  }
  return true;
}

Permutation::Permutation(std::vector<std::size_t> image) : image_(std::move(image)) {
  std::vector<bool> seen(image_.size(), false);
  for (std::size_t v : image_) {
    if (v >= image_.size() || seen[v]) {
      throw Error(ErrorCode::kBadPermutation, "permutation image is not a bijection");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> image(n);
  std::iota(image.begin(), image.end(), std::size_t{0});
  return Permutation(std::move(image));
}

Permutation Permutation::transposition(std::size_t n, std::size_t i, std::size_t j) {
  std::vector<std::size_t> image(n);
  std::iota(image.begin(), image.end(), std::size_t{0});
  if (i >= n || j >= n) throw Error(ErrorCode::kBadPermutation, "transposition out of range");
  std::swap(image[i], image[j]);
  return Permutation(std::move(image));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(image_.size());
  for (std::size_t j = 0; j < image_.size(); ++j) inv[image_[j]] = j;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) throw Error(ErrorCode::kBadPermutation, "composing unequal sizes");
  std::vector<std::size_t> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = image_[other.image_[j]];
  return Permutation(std::move(out));
}

int Permutation::sign() const {
  // Parity from cycle decomposition: each cycle of length L contributes L-1.
  std::vector<bool> visited(image_.size(), false);
  std::size_t transpositions = 0;
  for (std::size_t start = 0; start < image_.size(); ++start) {
    if (visited[start]) continue;
    std::size_t len = 0;
    for (std::size_t j = start; !visited[j]; j = image_[j]) {
      visited[j] = true;
      ++len;
    }
    transpositions += len - 1;
  }
  return transpositions % 2 == 0 ? 1 : -1;
}

NParticleState permute_labels(const NParticleState& s, const Permutation& perm) {
  require_perm_size(s, perm);
  std::vector<ProductTerm> out;
  out.reserve(s.terms().size());
  for (const ProductTerm& t : s.terms()) out.push_back({t.coeff, move_labels(t.modes, perm)});
  return NParticleState(s.n(), std::move(out));
}

NParticleState permute_parameters(const NParticleState& s, const Permutation& perm,
                                  Coefficients coefficients) {
  require_perm_size(s, perm);
  std::vector<ProductTerm> out;
  out.reserve(s.terms().size());
  for (const ProductTerm& t : s.terms()) {
    Assignment moved = move_parameters(t.modes, perm);
    const Complex c = coefficients == Coefficients::kFixed ? t.coeff : s.coefficient(moved);
    out.push_back({c, std::move(moved)});
  }
  return NParticleState(s.n(), std::move(out));
}

bool has_symmetric_coefficients(const NParticleState& s) {
  const NParticleState sym = symmetrize(s);
  return approx_equal(sym, s, kZeroTolerance);
}

NParticleState symmetrize(const NParticleState& s) { return project(s, false); }

NParticleState antisymmetrize(const NParticleState& s) { return project(s, true); }

Complex scalar_product(const NParticleState& a, const NParticleState& b,
                       const OverlapProvider& ov) {
  require_same_n(a.n(), b.n(), "scalar product");
  Complex total = 0.0;
  for (const ProductTerm& ta : a.terms()) {
    for (const ProductTerm& tb : b.terms()) {
      Complex prod = std::conj(ta.coeff) * tb.coeff;
      for (std::size_t j = 0; j < a.n() && prod != Complex(0.0); ++j) {
        prod *= ov(ta.modes[j], tb.modes[j]);
      }
      total += prod;
    }
  }
  return total;
}

NParticleState exchange_superposition(ModeId phi, ModeId eta, Complex alpha, Complex beta) {
  require_normalized(alpha, beta);
  return NParticleState(2, {ProductTerm{alpha, {phi, eta}}, ProductTerm{beta, {eta, phi}}});
}

Complex interference_value(Complex alpha, Complex beta, Complex direct, Complex exchange) {
  require_normalized(alpha, beta);
  const double weight = std::norm(alpha) + std::norm(beta);
  const double cross = 2.0 * (std::conj(alpha) * beta).real();
  return weight * direct + cross * exchange;
}

Eigen::MatrixXcd overlap_matrix(std::span<const ModeId> a, std::span<const ModeId> b,
                                const OverlapProvider& ov) {
  require_same_n(a.size(), b.size(), "overlap matrix");
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = ov(a[i], b[j]);
  }
  return m;
}

Complex feynman_amplitude(const NParticleState& b, const NParticleState& a, int sign,
                          const OverlapProvider& ov) {
  require_pair(b);
  require_pair(a);
  require_sign(sign);
  const NParticleState exchanged = permute_labels(b, Permutation::transposition(2, 0, 1));
  return scalar_product(b + exchanged * Complex(sign), a, ov);
}

Complex standard_amplitude(const NParticleState& b, const NParticleState& a, int sign,
                           const OverlapProvider& ov) {
  require_pair(b);
  require_pair(a);
  require_sign(sign);
  const Permutation swap = Permutation::transposition(2, 0, 1);
  const Complex norm = 1.0 / std::sqrt(2.0);
  const NParticleState bs = (b + permute_labels(b, swap) * Complex(sign)) * norm;
  const NParticleState as = (a + permute_labels(a, swap) * Complex(sign)) * norm;
  return scalar_product(bs, as, ov);
}

}  // namespace idstat::symmetry
