#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "idstat/distributions.hpp"

namespace idstat::balance {

using distributions::Species;

/// Mean numbers p(s, eps) of s-fold condensed packets of one kind on an
/// energy grid. The packet count in a bin is sum_s p(s, eps) * width(bin) and
/// should equal that bin's mode count. Fermi populations have s_max = 1.
class CondensatePopulation {
 public:
  /// Zero table. Throws kInvalidArgument for kind outside {1, 2}, empty or
  /// unsorted energies, nonpositive widths or mode counts, size mismatch, or a
  /// Fermi population with s_max != 1.
  CondensatePopulation(int kind, Species species, std::vector<double> energies,
                       std::vector<double> widths, std::vector<double> modes, std::size_t s_max);

  int kind() const { return kind_; }
  Species species() const { return species_; }
  std::size_t bins() const { return energies_.size(); }
  std::size_t s_max() const { return s_max_; }
  double width(std::size_t bin) const { return widths_.at(bin); }
  double energy(std::size_t bin) const { return energies_.at(bin); }
  double mode_count(std::size_t bin) const { return modes_.at(bin); }
  const std::vector<double>& energies() const { return energies_; }
  const std::vector<double>& widths() const { return widths_; }
  const std::vector<double>& modes() const { return modes_; }

  /// p(s, eps_bin). Bounds-checked; throws kOffGrid.
  double at(std::size_t s, std::size_t bin) const;
  double& at(std::size_t s, std::size_t bin);

  /// p(0..s_max, eps_bin) as a contiguous span.
  std::span<double> column(std::size_t bin);
  std::span<const double> column(std::size_t bin) const;

  /// sum_s p(s, eps_bin) * width(bin).
  double packets(std::size_t bin) const;

  /// Throws kInvariantViolation if a table entry is negative or not finite,
  /// or a bin's packet count is off its mode count by more than
  /// tolerance * max(1, g).
  void check_invariants(double tolerance = 1e-9) const;

 private:
  int kind_;
  Species species_;
  std::vector<double> energies_;
  std::vector<double> widths_;
  std::vector<double> modes_;
  std::size_t s_max_;
  std::vector<double> table_;  // bin-major, s_max + 1 entries per bin
};

/// eps_i = e0 + i * de for i = 0..bins-1. Energy differences are then exact
/// integer multiples of de, which keeps channel matching exact.
std::vector<double> uniform_energies(std::size_t bins, double e0, double de);

/// Kind-1 packets in bin_1i give up n quanta to kind-1 packets in bin_1f,
/// while kind-2 packets in bin_2i give up n2 quanta to kind-2 packets in
/// bin_2f. Energy conservation: n (eps1_i - eps1_f) = n2 (eps2_f - eps2_i).
struct CollisionChannel {
  std::size_t bin_1i = 0;
  std::size_t bin_1f = 0;
  std::size_t bin_2i = 0;
  std::size_t bin_2f = 0;
  unsigned n = 0;
  unsigned n2 = 0;
};

/// Packet orders for one reaction: s and r for kind 1 (in bin_1i, bin_1f),
/// s2 and r2 for kind 2.
struct Orders {
  std::size_t s = 0;
  std::size_t r = 0;
  std::size_t s2 = 0;
  std::size_t r2 = 0;
};

/// Throws kOffGrid for a bin index off either grid and kInvalidArgument if
/// the channel violates energy conservation by more than half a bin width.
void validate_channel(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                      const CollisionChannel& ch);

/// Every channel with 1 <= n, n2 <= max_transfer, n, n2 <= s_max,
/// bin_1i != bin_1f and bin_2i != bin_2f that conserves energy to within
/// 1e-9 of the smallest bin width (exact on grids from uniform_energies with
/// a shared spacing). Ordered by the loop nesting (1i, 1f, 2i, 2f, n, n2).
std::vector<CollisionChannel> generate_channels(const CondensatePopulation& pop1,
                                                const CondensatePopulation& pop2,
                                                unsigned max_transfer = 1);

/// p(s,1i) p(r,1f) q(s2,2i) q(r2,2f) - p(s-n,1i) p(r+n,1f) q(s2-n2,2i) q(r2+n2,2f).
/// Throws kOffGrid for bins off the grid or s < n, s2 < n2, and
/// kOrderOverflow when r + n or r2 + n2 exceeds s_max.
double balance_residual(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                        const CollisionChannel& ch, const Orders& orders);

/// Largest |balance_residual| over every admissible Orders of the channel.
/// The residual is linear in each of the four (p_forward, p_reverse) pairs,
/// so only convex-hull vertices of each pair set need to be combined.
double max_residual(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                    const CollisionChannel& ch);
double max_residual(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                    std::span<const CollisionChannel> channels);

/// p(s, eps) = a(eps) exp[-(b eps - c) s], with a(eps) chosen so each bin
/// holds exactly its mode count of packets. Fermi populations use s = 0, 1
/// and ignore s_max. For bosons without s_max the cap is the smallest one for
/// which the neglected tail x^(S+1) (S + 2), x = exp(-(b eps - c)), is below
/// 1e-14 in every bin; that needs b eps - c > 0 everywhere, otherwise
/// kDivergentSeries. Throws kInvalidArgument for b <= 0.
CondensatePopulation stationary_population(int kind, Species species,
                                           const std::vector<double>& energies,
                                           const std::vector<double>& widths,
                                           const std::vector<double>& modes, double b, double c,
                                           std::optional<std::size_t> s_max = std::nullopt);

/// exp[-(b eps - c)(s_max + 1)]: the packet fraction an uncapped geometric
/// series would put beyond s_max.
double geometric_tail(double b, double c, double eps, std::size_t s_max);

struct Quanta {
  std::vector<double> per_bin;
  double total = 0.0;
};

/// sum_s s p(s, eps) * width per bin, and their sum.
Quanta total_quanta(const CondensatePopulation& pop);

enum class EntropyForm {
  /// k sum_bins [ln g! - sum_s ln (p(s) width)!] with the factorials taken
  /// through the gamma function.
  kFactorial,
  /// The Stirling form k sum_bins [g ln g - sum_s P ln P], P = p(s) width.
  /// This is the one the relaxation increases.
  kStirling,
};

/// Throws kInvariantViolation if a bin's packet count differs from its mode
/// count by more than 1e-6 (relative to max(1, g)).
double packet_entropy(const CondensatePopulation& pop, EntropyForm form = EntropyForm::kFactorial,
                      double k = 1.0);

/// Per-bin least-squares slope of ln p(s, eps) against s over entries with
/// p > cutoff * max_s p. Bins with fewer than two such entries yield NaN.
std::vector<double> fitted_slopes(const CondensatePopulation& pop, double cutoff = 1e-10);

/// Applies `moves` random single-tuple reactions of random channels, each
/// with a random extent inside the range that keeps every entry positive.
/// Packet and quantum totals are untouched. Deterministic given the seed.
void perturb(CondensatePopulation& pop1, CondensatePopulation& pop2,
             std::span<const CollisionChannel> channels, std::size_t moves, std::uint64_t seed);

struct RelaxOptions {
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  /// Fraction of the entropy-optimal step taken along each channel's flux.
  double rate = 0.1;
  double tolerance = 1e-10;
  /// Visit channels in a seeded random order each sweep instead of the given order.
  bool shuffle = true;
};

struct SweepReport {
  std::size_t sweep = 0;
  double max_residual = 0.0;
  /// Stirling-form entropy of both populations together.
  double entropy = 0.0;
  /// Quanta of both kinds together.
  double total_quanta = 0.0;
  /// Largest |packets - mode count| / max(1, mode count) over both populations.
  double packet_drift = 0.0;
};

struct RelaxResult {
  CondensatePopulation pop1;
  CondensatePopulation pop2;
  std::vector<SweepReport> sweeps;  // sweeps[0] is the starting state
  bool converged = false;
};

/// Relaxation toward detailed balance, a construction of ours: each sweep
/// visits every channel, forms the mass-action net flux
///   Phi = p(s)p(r)q(s2)q(r2) - p(s-n)p(r+n)q(s2-n2)q(r2+n2)
/// summed over all admissible orders, and moves the populations along it by
/// rate times the step that maximizes the Stirling entropy on that line.
/// Every move is a combination of reactions, so per-bin packets and per-kind
/// quanta are conserved; the entropy never decreases. Stops once the max
/// residual is within tolerance.
/// relax_until returns the trajectory whether or not it converged.
RelaxResult relax_until(CondensatePopulation pop1, CondensatePopulation pop2,
                        std::span<const CollisionChannel> channels, const RelaxOptions& options,
                        const std::function<void(const SweepReport&)>& observer = {});

/// As relax_until, but throws kNoConvergence if the residual is still above
/// tolerance after options.steps sweeps.
RelaxResult relax(CondensatePopulation pop1, CondensatePopulation pop2,
                  std::span<const CollisionChannel> channels, const RelaxOptions& options,
                  const std::function<void(const SweepReport&)>& observer = {});

}  // namespace idstat::balance
