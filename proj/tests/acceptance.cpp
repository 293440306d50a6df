// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "idstat/balance.hpp"
#include "idstat/counting.hpp"
#include "idstat/distributions.hpp"
#include "idstat/error.hpp"
#include "idstat/matrix.hpp"
#include "idstat/spinstat.hpp"
#include "idstat/symmetry.hpp"
#include "idstat/wavepacket.hpp"

using namespace idstat;

namespace {

struct Verdict {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && passed) detail << "failed: " << what << "; ";
    passed = passed && ok;
  }
};

using Criterion = std::function<void(Verdict&)>;

// ---- 1. wavepacket -----------------------------------------------------------

void wavepacket_pde(Verdict& v) {
  const wavepacket::WavePacket p({1.0, 1.0, 0.0, 0.0, 0.0, 1.0});
  double worst = 0.0;
  double worst_order = 1e300;
  for (double t : {0.0, 0.5, 2.0}) {
    // Spacing in units of the packet's sigma; the window spans 12 current
    // density widths either side.
    auto grid = [&](double per_sigma) {
      return wavepacket::Grid::around(wavepacket::center(p, t), p.sigma(),
                                      12.0 * wavepacket::density_width(p, t) / p.sigma(), per_sigma);
    };
    const double fine = wavepacket::schrodinger_residual(p, grid(512.0), t);
    const double half = wavepacket::schrodinger_residual(p, grid(256.0), t);
    worst = std::max(worst, fine);
    v.detail << "t=" << t << ": " << fine << "; ";
    worst_order = std::min(worst_order, std::log2(half / fine));
  }
  double norm_error = 0.0;
  for (double a = -10.0; a <= 10.0; a += 0.5) {
    const double t = a / 2.0;  // A(t) = 2 t for m = sigma = hbar = 1
    const auto g = wavepacket::Grid::around(wavepacket::center(p, t), wavepacket::density_width(p, t), 12.0,
                                            64.0);
    norm_error = std::max(norm_error, std::abs(wavepacket::norm(p, g, t) - 1.0));
  }
  v.detail << "residual " << worst << " (limit 1e-06), order " << worst_order << ", norm error "
           << norm_error << "; ";
  v.require(worst < 1e-6, "residual above 1e-6 at 512 points per sigma");
  v.require(worst_order >= 1.8, "convergence order below 1.8");
  v.require(norm_error <= 1e-6, "norm off by more than 1e-6");
}

// ---- 2. counting oracle ------------------------------------------------------

void counting_oracle(Verdict& v) {
  std::size_t cases = 0;
  for (std::uint64_t g = 1; g <= 24; ++g) {
    for (std::uint64_t n = 0; n + g <= 24; ++n) {
      const counting::OccupancyRegion r{n, g};
      v.require(counting::bose_w(r) == counting::oracle_count(r, counting::Statistics::kBose),
                "Bose mismatch");
      ++cases;
      if (n <= g) {
        v.require(counting::fermi_w(r) == counting::oracle_count(r, counting::Statistics::kFermi),
                  "Fermi mismatch");
        ++cases;
      }
    }
  }
  v.detail << cases << " exact comparisons; ";
}

// ---- 3. classical limit ------------------------------------------------------

void classical_limit(Verdict& v) {
  double worst = 0.0;  // largest deviation / bound
  for (std::uint64_t n = 1; n <= 6; ++n) {
    for (std::uint64_t g : {100u, 1000u, 10000u}) {
      const double bound = 3.0 * std::pow(static_cast<double>(n) / g, 2) * std::pow(n, 4);
      const auto lc = counting::limit_correction({n, g});
      const double bose = static_cast<double>(counting::ratio_to_boltzmann({n, g}, counting::Statistics::kBose));
      const double fermi =
          static_cast<double>(counting::ratio_to_boltzmann({n, g}, counting::Statistics::kFermi));
      const auto f = counting::multi_index_fraction(n, g);
      for (double dev : {bose - lc.bose, fermi - lc.fermi, f.exact - f.asymptote}) {
        worst = std::max(worst, std::abs(dev) / bound);
        v.require(std::abs(dev) <= bound, "deviation above 3 (n/g)^2 n^4");
      }
    }
  }
  v.detail << "largest deviation/bound " << worst << "; ";
}

// ---- 4. spin-statistics phase -----------------------------------------------

void spin_statistics(Verdict& v) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  for (int twice = 0; twice <= 5; ++twice) {
    const Complex expected = twice % 2 == 0 ? 1.0 : -1.0;
    for (int i = 0; i < 100; ++i) {
      const auto f = spinstat::exchange_phase(HalfInt::from_twice(twice), angle(rng), angle(rng));
      worst = std::max(worst, std::abs(f.total - expected));
    }
    ModeTable table;
    const auto u = table.add_abstract("u");
    const auto w = table.add_abstract("w");
    const auto a = table.add(SpinorMode(HalfInt::from_twice(twice), HalfInt::from_twice(twice), angle(rng), u));
    const auto b = table.add(SpinorMode(HalfInt::from_twice(twice), HalfInt::from_twice(twice), angle(rng), w));
    const auto pair = spinstat::exchanged_pair_state(table, a, b);
    const auto product = symmetry::NParticleState::product({a, b});
    const auto standard = (twice % 2 == 0 ? symmetry::symmetrize(product) : symmetry::antisymmetrize(product)) *
                          std::sqrt(2.0);
    v.require(symmetry::approx_equal(pair, standard, 1e-12), "pair state differs from the standard state");
  }
  v.detail << "max |F - (-1)^(2s)| " << worst << "; ";
  v.require(worst <= 1e-12, "phase off by more than 1e-12");
}

// ---- 5. Pauli exclusion ------------------------------------------------------

void pauli_exclusion(Verdict& v) {
  std::size_t patterns = 0;
  for (std::size_t n = 2; n <= 5; ++n) {
    std::vector<std::uint32_t> digits(n, 0);
    while (true) {
      auto sorted = digits;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        std::vector<ModeId> modes;
        for (auto d : digits) modes.push_back(ModeId{d});
        v.require(symmetry::antisymmetrize(symmetry::NParticleState::product(modes)).is_zero(),
                  "repeated-mode assignment survived antisymmetrization");
        ++patterns;
      }
      std::size_t i = 0;
      while (i < n && ++digits[i] == n) digits[i++] = 0;
      if (i == n) break;
    }
  }
  v.detail << patterns << " assignments; ";
}

// ---- 6. permanent oracle -----------------------------------------------------

void permanent_oracle(Verdict& v) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> size(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = trial < 8 ? trial + 1 : size(rng);
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = {gauss(rng), gauss(rng)};
    }
    const auto slow = oracle::naive_permanent(m);
    worst = std::max(worst, std::abs(permanent(m) - slow) / std::abs(slow));
  }
  v.detail << "max relative error " << worst << "; ";
  v.require(worst <= 1e-10, "Ryser differs from the n!-sum");
}

// ---- 7. Feynman equivalence --------------------------------------------------

void feynman_equivalence(Verdict& v) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<std::uint32_t> pick(0, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::MatrixXcd basis(4, 6);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 6; ++j) basis(i, j) = {gauss(rng), gauss(rng)};
      basis.row(i) /= basis.row(i).norm();
    }
    const Eigen::MatrixXcd gram = basis.conjugate() * basis.transpose();
    const OverlapProvider ov = [&gram](ModeId a, ModeId b) {
      return gram(static_cast<Eigen::Index>(a.index), static_cast<Eigen::Index>(b.index));
    };
    const auto a = symmetry::NParticleState::product({ModeId{pick(rng)}, ModeId{pick(rng)}},
                                                     {gauss(rng), gauss(rng)});
    const auto b = symmetry::NParticleState::product({ModeId{pick(rng)}, ModeId{pick(rng)}},
                                                     {gauss(rng), gauss(rng)});
    for (int sign : {+1, -1}) {
      worst = std::max(worst, std::abs(symmetry::feynman_amplitude(b, a, sign, ov) -
                                       symmetry::standard_amplitude(b, a, sign, ov)));
    }
  }
  v.detail << "max |f - f'| " << worst << "; ";
  v.require(worst <= 1e-12, "amplitude forms differ");
}

// ---- 8. three routes to the distribution ------------------------------------

void three_routes(Verdict& v) {
  using namespace distributions;
  const MomentumGrid grid(0.0, 10.0, 64);
  double worst_maxent = 0.0;
  double worst_balance = 0.0;
  for (Species sp : {Species::kBose, Species::kFermi}) {
    GasSpec spec;
    spec.species = sp;
    spec.volume = 10.0;
    spec.temperature = 1.5;
    const Spectrum s = make_spectrum(spec, grid);
    const double mu = sp == Species::kBose ? 0.5 : 3.0;
    const auto closed = bin_occupancies(s, mu, spec);
    const auto maxent = max_entropy_occupancies(spec, s, total_number(s, mu, spec), total_energy(s, mu, spec));

    // Condensate route: bin widths are the energy spans of the momentum bins.
    std::vector<double> widths(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      widths[i] = dispersion(grid.p_min() + (i + 1.0) * grid.dp(), spec) -
                  dispersion(grid.p_min() + static_cast<double>(i) * grid.dp(), spec);
    }
    const double b = 1.0 / spec.kT();
    const auto pop = balance::stationary_population(1, sp, s.energies, widths, s.modes, b, mu * b);
    const auto quanta = balance::total_quanta(pop);
    for (std::size_t i = 0; i < s.size(); ++i) {
      worst_maxent = std::max(worst_maxent, std::abs(maxent.occupancies[i] - closed[i]) / closed[i]);
      worst_balance = std::max(worst_balance, std::abs(quanta.per_bin[i] - closed[i]) / closed[i]);
    }
  }
  v.detail << "closed vs maxent " << worst_maxent << ", closed vs condensate " << worst_balance << "; ";
  v.require(worst_maxent <= 1e-6, "maximum entropy differs from the closed form");
  v.require(worst_balance <= 1e-9, "condensate quanta differ from the closed form");
}

// ---- 9. balance relaxation ---------------------------------------------------

void balance_relaxation(Verdict& v) {
  using namespace balance;
  const std::size_t bins = 16;
  const double de = 0.5, beta = 1.0, c = 0.0;
  const auto energies = uniform_energies(bins, de, de);
  const std::vector<double> widths(bins, de);
  const std::vector<double> modes(bins, de);
  const auto start1 = stationary_population(1, Species::kBose, energies, widths, modes, beta, c, 64);
  const auto start2 = stationary_population(2, Species::kBose, energies, widths, modes, beta, c, 64);
  const auto channels = generate_channels(start1, start2, 1);

  std::size_t converged = 0;
  std::size_t max_sweeps = 0;
  double worst_slope = 0.0;
  double worst_drift = 0.0;
  double worst_quanta = 0.0;
  double worst_drop = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto p1 = start1;
    auto p2 = start2;
    perturb(p1, p2, channels, 4000, seed);
    const double q0 = total_quanta(p1).total + total_quanta(p2).total;
    double last = -1e300;
    RelaxOptions opt;
    opt.seed = seed;
    opt.steps = 1000;
    const auto r = relax_until(std::move(p1), std::move(p2), channels, opt, [&](const SweepReport& rep) {
      worst_drift = std::max(worst_drift, rep.packet_drift);
      worst_quanta = std::max(worst_quanta, std::abs(rep.total_quanta - q0) / q0);
      worst_drop = std::max(worst_drop, last - rep.entropy);
      last = rep.entropy;
    });
    converged += r.converged ? 1 : 0;
    max_sweeps = std::max(max_sweeps, r.sweeps.size() - 1);
    for (const auto* pop : {&r.pop1, &r.pop2}) {
      const auto slopes = fitted_slopes(*pop);
      for (std::size_t i = 0; i < bins; ++i) {
        const double expected = -(beta * energies[i] - c);
        worst_slope = std::max(worst_slope, std::abs(slopes[i] - expected) / std::abs(expected));
      }
    }
  }
  v.detail << converged << "/20 converged (max " << max_sweeps << " sweeps), slope error " << worst_slope
           << ", packet drift " << worst_drift << ", quanta drift " << worst_quanta
           << ", largest entropy drop " << worst_drop << "; ";
  v.require(converged == 20, "a seed did not reach max residual 1e-10");
  v.require(worst_slope <= 0.02, "fitted slope off by more than 2%");
  v.require(worst_drift <= 1e-9 && worst_quanta <= 1e-9, "conservation broken");
  v.require(worst_drop <= 1e-12, "entropy decreased");
}

// ---- 10. mu round trip -------------------------------------------------------

void mu_round_trip(Verdict& v) {
  using namespace distributions;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const MomentumGrid grid(0.0, 12.0, 64);
  double worst = 0.0;
  for (Species sp : {Species::kFermi, Species::kBose}) {
    for (int trial = 0; trial < 50; ++trial) {
      GasSpec spec;
      spec.species = sp;
      spec.volume = 5.0;
      spec.temperature = 0.3 + 2.7 * unit(rng);
      const Spectrum s = make_spectrum(spec, grid);
      double n;
      if (sp == Species::kFermi) {
        double capacity = 0.0;
        for (double m : s.modes) capacity += m;
        n = capacity * (0.01 + 0.9 * unit(rng));
      } else {
        // Sub-saturation: below the count at mu = eps_min - 1e-3 kT. Closer to
        // the pole one rounding step of mu moves N by more than 1e-10.
        const double saturation = total_number(s, s.energies.front() - 1e-3 * spec.kT(), spec);
        n = saturation * (0.01 + 0.98 * unit(rng));
      }
      const double mu = solve_mu(n, spec, s);
      worst = std::max(worst, std::abs(total_number(s, mu, spec) - n) / n);
    }
  }
  double classical = 0.0;
  for (Species sp : {Species::kFermi, Species::kBose}) {
    GasSpec spec;
    spec.species = sp;
    spec.temperature = 2.0;
    const Spectrum s = make_spectrum(spec, MomentumGrid(0.0, 25.0, 128));
    const double n = 1e-4;
    double z = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) z += s.modes[i] * std::exp(-s.energies[i] / spec.kT());
    const double boltzmann = spec.kT() * std::log(n / z);
    classical = std::max(classical, std::abs(solve_mu(n, spec, s) - boltzmann) / std::abs(boltzmann));
  }
  v.detail << "max relative N error " << worst << ", classical mu error " << classical << "; ";
  v.require(worst <= 1e-10, "N error above 1e-10");
  v.require(classical <= 1e-3, "classical mu off by more than 0.1%");
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    double budget_seconds;
    Criterion run;
  };
  const std::vector<Entry> criteria = {
      {"wavepacket PDE residual, order and norm", 5.0, wavepacket_pde},
      {"counting formulas equal enumeration", 10.0, counting_oracle},
      {"classical limit and multi-index fraction", 1.0, classical_limit},
      {"spin-statistics exchange phase", 1.0, spin_statistics},
      {"Pauli exclusion", 1.0, pauli_exclusion},
      {"permanent oracle", 10.0, permanent_oracle},
      {"Feynman amplitude equivalence", 5.0, feynman_equivalence},
      {"three routes to the distribution", 30.0, three_routes},
      {"balance relaxation", 60.0, balance_relaxation},
      {"mu round trip", 10.0, mu_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream timing;
    timing << seconds << " s (budget " << criteria[i].budget_seconds << " s)";
    v.require(seconds < criteria[i].budget_seconds, "over time budget");
    std::printf("%s %2zu %s: %s%s\n", v.passed ? "PASS" : "FAIL", i + 1, criteria[i].name,
                v.detail.str().c_str(), timing.str().c_str());
    std::fflush(stdout);
    failures += v.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
