#pragma once

#include <cstddef>
#include <vector>

namespace idstat::distributions {

enum class Species { kBose, kFermi };

/// Ideal gas in volume V at temperature T. Units default to c = h = k = 1.
struct GasSpec {
  double volume = 1.0;
  double temperature = 1.0;
  double mass = 1.0;
  double c = 1.0;
  double h = 1.0;
  double k = 1.0;
  Species species = Species::kBose;

  /// Throws kInvalidArgument unless volume, temperature, c, h, k > 0 and mass >= 0.
  void validate() const;
  double kT() const { return k * temperature; }
};

/// Uniform momentum bins on [p_min, p_max]; bin i is centred at
/// p_min + (i + 1/2) dp.
class MomentumGrid {
 public:
  /// Throws kInvalidArgument unless 0 <= p_min < p_max and bins >= 8.
  MomentumGrid(double p_min, double p_max, std::size_t bins);

  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }
  std::size_t bins() const { return bins_; }
  double dp() const { return (p_max_ - p_min_) / static_cast<double>(bins_); }
  double center(std::size_t i) const { return p_min_ + (static_cast<double>(i) + 0.5) * dp(); }

 private:
  double p_min_;
  double p_max_;
  std::size_t bins_;
};

/// Per-bin energies and mode counts. Built from a MomentumGrid or directly for
/// toy level schemes.
struct Spectrum {
  std::vector<double> momenta;
  std::vector<double> energies;
  std::vector<double> modes;

  std::size_t size() const { return energies.size(); }
};

/// [p^2 c^2 + (m c^2)^2]^(1/2).
double dispersion(double p, const GasSpec& spec);

/// g_p = 4 pi V p^2 dp / h^3.
double mode_count(double p, double dp, const GasSpec& spec);

Spectrum make_spectrum(const GasSpec& spec, const MomentumGrid& grid);

/// Mean occupation of one mode, 1/(exp((eps - mu)/kT) -+ 1). Throws kBosePole
/// for bosons with eps <= mu.
double occupancy(double eps, double mu, const GasSpec& spec);

/// Per-bin mean particle numbers g_i * occupancy(eps_i, mu).
std::vector<double> bin_occupancies(const Spectrum& spectrum, double mu, const GasSpec& spec);

/// sum_i g_i occupancy(eps_i, mu).
double total_number(const Spectrum& spectrum, double mu, const GasSpec& spec);

/// sum_i g_i eps_i occupancy(eps_i, mu).
double total_energy(const Spectrum& spectrum, double mu, const GasSpec& spec);

struct SolveMuOptions {
  double tolerance = 1e-10;
  int max_iterations = 400;
};

/// Chemical potential with total_number(mu) = n_target, found by bisection
/// then a bracketed secant polish to |dN|/N <= tolerance. For bosons mu stays
/// below eps_min - 1e-12 kT.
/// Throws kSaturationExceeded (Bose target above what the spectrum holds
/// without a condensate), kNoBracket (Fermi target >= total mode count),
/// kNoConvergence, or kInvalidArgument for n_target <= 0.
double solve_mu(double n_target, const GasSpec& spec, const Spectrum& spectrum,
                const SolveMuOptions& options = {});
double solve_mu(double n_target, const GasSpec& spec, const MomentumGrid& grid,
                const SolveMuOptions& options = {});

struct MaxEntOptions {
  int max_iterations = 200;
  double tolerance = 1e-13;
};

struct MaxEntResult {
  std::vector<double> occupancies;
  /// Lagrange multipliers of the particle-number and energy constraints.
  double alpha = 0.0;
  double beta = 0.0;
  /// Implied T = 1/(k beta) and mu = -alpha/beta.
  double temperature = 0.0;
  double mu = 0.0;
  int iterations = 0;
};

/// Maximizes sum_i S_i(n_i) subject to sum n_i = N and sum n_i eps_i = E,
/// where S_i is the Stirling (continuous) form of ln w_i: bosons
/// (n+g)ln(n+g) - n ln n - g ln g, fermions g ln g - n ln n - (g-n)ln(g-n).
/// Newton iterations on the two multipliers of the concave dual, with each
/// bin's stationarity condition solved numerically.
/// GasSpec::temperature is not used; only k and the species are read.
/// A single-level spectrum (all energies equal) only fixes alpha + beta eps;
/// it is solved with beta = 0, temperature = +inf and mu = NaN, and requires
/// E = N eps.
/// Throws kInfeasible (E/N outside the spectrum's energy range, Fermi
/// N >= total modes) or kNoConvergence.
MaxEntResult max_entropy_occupancies(const GasSpec& spec, const Spectrum& spectrum,
                                     double n_target, double e_target,
                                     const MaxEntOptions& options = {});
MaxEntResult max_entropy_occupancies(const GasSpec& spec, const MomentumGrid& grid,
                                     double n_target, double e_target,
                                     const MaxEntOptions& options = {});

}  // namespace idstat::distributions
