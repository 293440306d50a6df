#include "idstat/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "idstat/error.hpp"

namespace idstat::distributions {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require_spectrum(const Spectrum& s) {
  if (s.energies.empty() || s.energies.size() != s.modes.size()) {
    throw Error(ErrorCode::kInvalidArgument, "spectrum needs matching, nonempty energies and modes");
  }
  for (double g : s.modes) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw Error(ErrorCode::kInvalidArgument, "spectrum mode counts must be positive");
    }
  }
}

// Stirling form of ln w for one bin, and its first two derivatives in n.
struct BinEntropy {
  Species species;
  double g;

  double value(double n) const {
    if (species == Species::kBose) return xlogx(n + g) - xlogx(n) - xlogx(g);
    return xlogx(g) - xlogx(n) - xlogx(g - n);
  }
  double curvature(double n) const {
    if (species == Species::kBose) return -g / (n * (n + g));
    return -g / (n * (g - n));
  }

  // dS/dn - lambda as a function of u = ln n. Decreasing in u.
  double slope_gap(double u, double lambda) const {
    if (species == Species::kBose) return std::log1p(g * std::exp(-u)) - lambda;
    const double log_g = std::log(g);
    if (u >= log_g) return -kInf;
    return log_g + std::log(-std::expm1(u - log_g)) - u - lambda;
  }
  double slope_gap_derivative(double u) const {
    if (species == Species::kBose) return -1.0 / (1.0 + std::exp(u) / g);
    return -g / (g - std::exp(u));
  }

  // n with dS/dn = lambda, by bracketed Newton in ln n.
  double stationary_point(double lambda) const {
    const double log_g = std::log(g);
    double lo = log_g - lambda;
    double hi;
    if (species == Species::kFermi) {
      hi = log_g;
      lo = std::min(lo, log_g - std::numbers::ln2);
      for (double step = 1.0; slope_gap(lo, lambda) <= 0.0; step *= 2.0) lo -= step;
    } else {
      for (double step = 1.0; slope_gap(lo, lambda) <= 0.0; step *= 2.0) lo -= step;
      hi = lo + 1.0;
      for (double step = 2.0; slope_gap(hi, lambda) >= 0.0; step *= 2.0) hi += step;
    }
    double u = lo;
    for (int it = 0; it < 300; ++it) {
      const double f = slope_gap(u, lambda);
      if (f == 0.0) break;
      if (f > 0.0) lo = u; else hi = u;
      double next = u - f / slope_gap_derivative(u);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - u) <= 1e-15 * std::max(1.0, std::abs(u))) {
        u = next;
        break;
      }
      u = next;
    }
    return std::exp(u);
  }
};

double number_at(const Spectrum& s, double mu, const GasSpec& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += s.modes[i] * occupancy(s.energies[i], mu, spec);
  return total;
}

}  // namespace

void GasSpec::validate() const {
  const bool ok = volume > 0.0 && temperature > 0.0 && c > 0.0 && h > 0.0 && k > 0.0 &&
                  mass >= 0.0 && std::isfinite(volume) && std::isfinite(temperature) &&
                  std::isfinite(mass) && std::isfinite(c) && std::isfinite(h) && std::isfinite(k);
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "gas spec needs positive finite V, T, c, h, k and nonnegative mass");
  }
}

MomentumGrid::MomentumGrid(double p_min, double p_max, std::size_t bins)
    : p_min_(p_min), p_max_(p_max), bins_(bins) {
  if (!(p_min >= 0.0 && p_min < p_max && std::isfinite(p_max))) {
    throw Error(ErrorCode::kInvalidArgument, "momentum grid needs 0 <= p_min < p_max");
  }
  if (bins < 8) throw Error(ErrorCode::kInvalidArgument, "momentum grid needs at least 8 bins");
}

double dispersion(double p, const GasSpec& spec) {
  const double rest = spec.mass * spec.c * spec.c;
  return std::hypot(p * spec.c, rest);
}

double mode_count(double p, double dp, const GasSpec& spec) {
  return 4.0 * std::numbers::pi * spec.volume * p * p * dp / (spec.h * spec.h * spec.h);
}

Spectrum make_spectrum(const GasSpec& spec, const MomentumGrid& grid) {
  spec.validate();
  Spectrum s;
  s.momenta.resize(grid.bins());
  s.energies.resize(grid.bins());
  s.modes.resize(grid.bins());
  for (std::size_t i = 0; i < grid.bins(); ++i) {
    const double p = grid.center(i);
    s.momenta[i] = p;
    s.energies[i] = dispersion(p, spec);
    s.modes[i] = mode_count(p, grid.dp(), spec);
  }
  return s;
}

double occupancy(double eps, double mu, const GasSpec& spec) {
  const double x = (eps - mu) / spec.kT();
  if (spec.species == Species::kFermi) return 1.0 / (std::exp(x) + 1.0);
  if (!(x > 0.0)) {
    std::ostringstream os;
    os << "Bose occupancy needs eps > mu (eps=" << eps << ", mu=" << mu << ")";
    throw Error(ErrorCode::kBosePole, os.str());
  }
  return 1.0 / std::expm1(x);
}

std::vector<double> bin_occupancies(const Spectrum& spectrum, double mu, const GasSpec& spec) {
  std::vector<double> out(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    out[i] = spectrum.modes[i] * occupancy(spectrum.energies[i], mu, spec);
  }
  return out;
}

double total_number(const Spectrum& spectrum, double mu, const GasSpec& spec) {
  return number_at(spectrum, mu, spec);
}

double total_energy(const Spectrum& spectrum, double mu, const GasSpec& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    total += spectrum.modes[i] * spectrum.energies[i] * occupancy(spectrum.energies[i], mu, spec);
  }
  return total;
}

double solve_mu(double n_target, const GasSpec& spec, const Spectrum& spectrum,
                const SolveMuOptions& options) {
  spec.validate();
  require_spectrum(spectrum);
  if (!(n_target > 0.0) || !std::isfinite(n_target)) {
    throw Error(ErrorCode::kInvalidArgument, "target particle number must be positive");
  }
  const double kt = spec.kT();
  const auto [e_min_it, e_max_it] = std::minmax_element(spectrum.energies.begin(), spectrum.energies.end());
  const double e_min = *e_min_it;
  const double e_max = *e_max_it;
  auto excess = [&](double mu) { return number_at(spectrum, mu, spec) - n_target; };

  double hi;
  if (spec.species == Species::kBose) {
    hi = e_min - 1e-12 * kt;
    if (excess(hi) < 0.0) {
      std::ostringstream os;
      os << "Bose target N=" << n_target << " exceeds the saturation count "
         << number_at(spectrum, hi, spec) << " of this spectrum";
      throw Error(ErrorCode::kSaturationExceeded, os.str());
    }
  } else {
    const double capacity = std::accumulate(spectrum.modes.begin(), spectrum.modes.end(), 0.0);
    if (n_target >= capacity) {
      std::ostringstream os;
      os << "Fermi target N=" << n_target << " reaches the mode capacity " << capacity;
      throw Error(ErrorCode::kNoBracket, os.str());
    }
    hi = e_max + kt;
    for (double step = kt; excess(hi) < 0.0; step *= 2.0) {
      hi += step;
      if (!std::isfinite(hi)) throw Error(ErrorCode::kNoBracket, "no upper bracket for mu");
    }
  }
  double lo = std::min(e_min, hi) - kt;
  for (double step = kt; excess(lo) > 0.0; step *= 2.0) {
    lo -= step;
    if (!std::isfinite(lo)) throw Error(ErrorCode::kNoBracket, "no lower bracket for mu");
  }

  double f_lo = excess(lo);
  double f_hi = excess(hi);
  int it = 0;
  // Bisection until the bracket has localized the root reasonably.
  for (; it < options.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = excess(mid);
    if (f == 0.0) return mid;
    if (f < 0.0) { lo = mid; f_lo = f; } else { hi = mid; f_hi = f; }
    if (std::min(-f_lo, f_hi) <= 1e-4 * n_target) break;
  }
  // Secant polish, kept inside the bracket.
  double best = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  double best_err = std::min(std::abs(f_lo), std::abs(f_hi));
  for (; it < options.max_iterations && best_err > 1e-3 * options.tolerance * n_target; ++it) {
    double next = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double f = excess(next);
    if (std::abs(f) < best_err) {
      best_err = std::abs(f);
      best = next;
    }
    if (f == 0.0) break;
    if (f < 0.0) { lo = next; f_lo = f; } else { hi = next; f_hi = f; }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
      break;
    }
  }
  if (best_err > options.tolerance * n_target) {
    std::ostringstream os;
    os << "mu solve stalled with |dN|/N = " << best_err / n_target;
    if (spec.species == Species::kBose && e_min - best < 1e-6 * kt) {
      os << " (mu within " << (e_min - best) / kt
         << " kT of the lowest level, where one rounding step of mu moves N by more)";
    }
    throw Error(ErrorCode::kNoConvergence, os.str());
  }
  return best;
}

double solve_mu(double n_target, const GasSpec& spec, const MomentumGrid& grid,
                const SolveMuOptions& options) {
  return solve_mu(n_target, spec, make_spectrum(spec, grid), options);
}

MaxEntResult max_entropy_occupancies(const GasSpec& spec, const Spectrum& spectrum,
                                     double n_target, double e_target,
                                     const MaxEntOptions& options) {
  spec.validate();
  require_spectrum(spectrum);
  const std::size_t bins = spectrum.size();
  const auto& eps = spectrum.energies;
  const auto [e_min_it, e_max_it] = std::minmax_element(eps.begin(), eps.end());
  const double e_min = *e_min_it;
  const double e_max = *e_max_it;
  const double capacity = std::accumulate(spectrum.modes.begin(), spectrum.modes.end(), 0.0);
  const double mean = e_target / n_target;
  std::vector<BinEntropy> bin(bins);
  for (std::size_t i = 0; i < bins; ++i) bin[i] = {spec.species, spectrum.modes[i]};

  if (e_min == e_max && n_target > 0.0 &&
      std::abs(e_target - n_target * e_min) <= options.tolerance * std::abs(e_target) &&
      (spec.species == Species::kBose || n_target < capacity)) {
    // A single level: the energy constraint repeats the number constraint,
    // so only alpha + beta eps is fixed. Report it as alpha with beta = 0.
    auto number_at = [&](double lambda) {
      double s = 0.0;
      for (const auto& b : bin) s += b.stationary_point(lambda);
      return s;
    };
    double lo = -1.0;
    double hi = 1.0;
    if (spec.species == Species::kBose) lo = 1e-300;
    while (number_at(lo) < n_target) lo = spec.species == Species::kBose ? lo * 0.5 : lo * 2.0;
    while (number_at(hi) > n_target) hi *= 2.0;
    for (int it = 0; it < 2000 && hi - lo > 1e-15 * std::abs(hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (number_at(mid) > n_target ? lo : hi) = mid;
    }
    MaxEntResult result;
    result.alpha = 0.5 * (lo + hi);
    for (const auto& b : bin) result.occupancies.push_back(b.stationary_point(result.alpha));
    result.beta = 0.0;
    result.temperature = kInf;
    result.mu = std::numeric_limits<double>::quiet_NaN();
    result.iterations = 1;
    return result;
  }

  if (!(n_target > 0.0) || !(mean > e_min && mean < e_max) ||
      (spec.species == Species::kFermi && n_target >= capacity)) {
    std::ostringstream os;
    os << "no occupancy set has N=" << n_target << " and E=" << e_target << " on energies ["
       << e_min << ", " << e_max << "]";
    throw Error(ErrorCode::kInfeasible, os.str());
  }

  // Start from the multipliers of the classical (Boltzmann) problem with the
  // same N and E.
  auto classical_mean = [&](double beta) {
    double z = 0.0;
    double ez = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      const double w = spectrum.modes[i] * std::exp(-beta * (eps[i] - e_min));
      z += w;
      ez += w * eps[i];
    }
    return ez / z;
  };
  double b_lo = -1.0 / (e_max - e_min);
  double b_hi = 1.0 / (e_max - e_min);
  while (classical_mean(b_lo) < mean) b_lo *= 2.0;
  while (classical_mean(b_hi) > mean) b_hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (b_lo + b_hi);
    (classical_mean(mid) > mean ? b_lo : b_hi) = mid;
  }
  double beta = 0.5 * (b_lo + b_hi);
  double z = 0.0;
  for (std::size_t i = 0; i < bins; ++i) z += spectrum.modes[i] * std::exp(-beta * (eps[i] - e_min));
  double alpha = std::log(z / n_target) - beta * e_min;

  auto feasible = [&](double a, double b) {
    if (spec.species == Species::kFermi) return true;
    for (std::size_t i = 0; i < bins; ++i) {
      if (!(a + b * eps[i] > 0.0)) return false;
    }
    return true;
  };
  if (!feasible(alpha, beta)) {
    double worst = kInf;
    for (std::size_t i = 0; i < bins; ++i) worst = std::min(worst, alpha + beta * eps[i]);
    alpha += 1.0 - worst;
  }

  std::vector<double> n(bins);
  auto solve_bins = [&](double a, double b) {
    double dual = a * n_target + b * e_target;
    for (std::size_t i = 0; i < bins; ++i) {
      const double lambda = a + b * eps[i];
      n[i] = bin[i].stationary_point(lambda);
      dual += bin[i].value(n[i]) - lambda * n[i];
    }
    return dual;
  };

  auto gap = [&](const std::vector<double>& occ) {
    double sum_n = 0.0;
    double sum_e = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      sum_n += occ[i];
      sum_e += occ[i] * eps[i];
    }
    return std::hypot((n_target - sum_n) / n_target, (e_target - sum_e) / e_target);
  };

  MaxEntResult result;
  double dual = solve_bins(alpha, beta);
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    double sum_n = 0.0;
    double sum_e = 0.0;
    double h00 = 0.0;
    double h01 = 0.0;
    double h11 = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      sum_n += n[i];
      sum_e += n[i] * eps[i];
      const double w = -1.0 / bin[i].curvature(n[i]);
      h00 += w;
      h01 += w * eps[i];
      h11 += w * eps[i] * eps[i];
    }
    const double g0 = n_target - sum_n;
    const double g1 = e_target - sum_e;
    if (std::abs(g0) <= options.tolerance * n_target && std::abs(g1) <= options.tolerance * e_target) {
      converged = true;
      break;
    }
    const double det = h00 * h11 - h01 * h01;
    const double d0 = -(h11 * g0 - h01 * g1) / det;
    const double d1 = -(h00 * g1 - h01 * g0) / det;
    const double slope = g0 * d0 + g1 * d1;
    const double current_gap = std::hypot(g0 / n_target, g1 / e_target);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const double a = alpha + t * d0;
      const double b = beta + t * d1;
      if (!feasible(a, b)) continue;
      const double trial = solve_bins(a, b);
      // Close to the optimum the dual decrease drops below its rounding
      // noise; a smaller constraint gap then decides instead.
      if (trial <= dual + 1e-4 * t * slope || gap(n) < 0.5 * current_gap || ls == 59) {
        alpha = a;
        beta = b;
        dual = trial;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (!converged) {
    double sum_n = std::accumulate(n.begin(), n.end(), 0.0);
    std::ostringstream os;
    os << "maximum-entropy solve did not converge (N residual " << n_target - sum_n << ")";
    throw Error(ErrorCode::kNoConvergence, os.str());
  }
  result.occupancies = n;
  result.alpha = alpha;
  result.beta = beta;
  result.temperature = 1.0 / (spec.k * beta);
  result.mu = -alpha / beta;
  return result;
}

MaxEntResult max_entropy_occupancies(const GasSpec& spec, const MomentumGrid& grid,
                                     double n_target, double e_target,
                                     const MaxEntOptions& options) {
  return max_entropy_occupancies(spec, make_spectrum(spec, grid), n_target, e_target, options);
}

}  // namespace idstat::distributions
