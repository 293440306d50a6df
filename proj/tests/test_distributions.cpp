#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "idstat/distributions.hpp"
#include "idstat/error.hpp"

using namespace idstat;
using namespace idstat::distributions;

namespace {

GasSpec gas(Species sp, double volume = 1.0, double temperature = 1.0, double mass = 1.0) {
  GasSpec g;
  g.species = sp;
  g.volume = volume;
  g.temperature = temperature;
  g.mass = mass;
  return g;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("dispersion and mode counts") {
  auto g = gas(Species::kBose, 1.0, 1.0, 4.0);
  CHECK(dispersion(0.0, g) == 4.0);
  CHECK(dispersion(3.0, g) == doctest::Approx(5.0).epsilon(1e-15));
  g.mass = 0.0;
  g.c = 2.0;
  CHECK(dispersion(1.5, g) == 3.0);
  CHECK(mode_count(0.0, 0.1, g) == 0.0);
  CHECK(mode_count(1.0, 0.1, g) == doctest::Approx(4.0 * std::numbers::pi * 0.1));
  CHECK(mode_count(1.0, 0.1, g) == doctest::Approx(1.2566).epsilon(1e-4));
  auto g2 = g;
  g2.volume = 2.0;
  CHECK(mode_count(0.7, 0.1, g2) == doctest::Approx(2.0 * mode_count(0.7, 0.1, g)));
  CHECK_THROWS_AS(MomentumGrid(0.0, 1.0, 7), Error);
  CHECK_THROWS_AS(MomentumGrid(1.0, 1.0, 8), Error);
}

TEST_CASE("occupancy examples") {
  const auto fermi = gas(Species::kFermi);
  CHECK(occupancy(0.3, 0.3, fermi) == 0.5);
  auto cold = gas(Species::kFermi, 1.0, 1e-3);
  CHECK(occupancy(0.5, 1.0, cold) == doctest::Approx(1.0).epsilon(1e-9));
  const auto bose = gas(Species::kBose, 1.0, 2.0);
  CHECK(occupancy(1.0 + 2.0 * std::log(2.0), 1.0, bose) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(code_of([&] { occupancy(1.0, 1.0, bose); }) == ErrorCode::kBosePole);
}

TEST_CASE("occupancy monotonicity and bounds") {
  for (Species sp : {Species::kBose, Species::kFermi}) {
    const auto g = gas(sp, 1.0, 0.7);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps = 0.05; eps < 8.0; eps += 0.05) {
      const double n = occupancy(eps, 0.0, g);
      CHECK(n < previous);
      CHECK(n > 0.0);
      if (sp == Species::kFermi) CHECK(n < 1.0);
      CHECK(occupancy(eps, -0.1, g) < n);
      previous = n;
    }
  }
}

TEST_CASE("solve_mu") {
  SUBCASE("particle-hole symmetric two-level toy") {
    const Spectrum s{{0.0, 0.0}, {-1.0, 1.0}, {5.0, 5.0}};
    CHECK(std::abs(solve_mu(5.0, gas(Species::kFermi), s)) < 1e-9);
  }
  SUBCASE("round trips") {
    const MomentumGrid grid(0.0, 8.0, 64);
    for (Species sp : {Species::kBose, Species::kFermi}) {
      const auto g = gas(sp, 20.0, 1.3, 1.0);
      const Spectrum s = make_spectrum(g, grid);
      for (double mu : {-3.0, -0.5, 0.8}) {
        if (sp == Species::kBose && mu >= s.energies.front()) continue;
        const double n = total_number(s, mu, g);
        const double back = solve_mu(n, g, s);
        CHECK(std::abs(total_number(s, back, g) - n) <= 1e-10 * n);
        CHECK(back == doctest::Approx(mu).epsilon(1e-9));
      }
    }
  }
  SUBCASE("classical regime matches the Boltzmann inversion") {
    const MomentumGrid grid(0.0, 20.0, 128);
    const auto g = gas(Species::kFermi, 1.0, 2.0, 1.0);
    const Spectrum s = make_spectrum(g, grid);
    const double n = 1e-4;
    double z = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) z += s.modes[i] * std::exp(-s.energies[i] / g.kT());
    const double classical = g.kT() * std::log(n / z);
    CHECK(solve_mu(n, g, s) == doctest::Approx(classical).epsilon(1e-3));
    auto gb = g;
    gb.species = Species::kBose;
    CHECK(solve_mu(n, gb, s) == doctest::Approx(classical).epsilon(1e-3));
  }
  SUBCASE("errors") {
    const MomentumGrid grid(0.0, 5.0, 32);
    const auto bose = gas(Species::kBose);
    const Spectrum s = make_spectrum(bose, grid);
    const double saturation = total_number(s, s.energies.front() - 1e-12 * bose.kT(), bose);
    CHECK(code_of([&] { solve_mu(1.01 * saturation, bose, s); }) == ErrorCode::kSaturationExceeded);
    // Between that and moderate degeneracy lies the pole regime, where a
    // single rounding step of mu changes N by more than the tolerance.
    const double pole = total_number(s, s.energies.front() - 1e-9 * bose.kT(), bose);
    CHECK(code_of([&] { solve_mu(0.999 * pole, bose, s); }) == ErrorCode::kNoConvergence);
    const auto fermi = gas(Species::kFermi);
    double capacity = 0.0;
    for (double m : s.modes) capacity += m;
    CHECK(code_of([&] { solve_mu(capacity, fermi, s); }) == ErrorCode::kNoBracket);
    CHECK(code_of([&] { solve_mu(-1.0, fermi, s); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("maximum entropy reproduces the closed form on 64 bins") {
  const MomentumGrid grid(0.0, 10.0, 64);
  for (Species sp : {Species::kBose, Species::kFermi}) {
    const auto g = gas(sp, 10.0, 1.5, 1.0);
    const Spectrum s = make_spectrum(g, grid);
    const double mu = sp == Species::kBose ? 0.4 : 2.5;
    const auto closed = bin_occupancies(s, mu, g);
    const auto r = max_entropy_occupancies(g, s, total_number(s, mu, g), total_energy(s, mu, g));
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      worst = std::max(worst, std::abs(r.occupancies[i] - closed[i]) / closed[i]);
    }
    CHECK(worst <= 1e-6);
    CHECK(r.temperature == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(r.mu == doctest::Approx(mu).epsilon(1e-6));
  }
}

TEST_CASE("maximum entropy toys") {
  SUBCASE("two-bin Fermi toy at the symmetric point") {
    const Spectrum s{{0.0, 0.0}, {1.0, 3.0}, {4.0, 4.0}};
    const auto r = max_entropy_occupancies(gas(Species::kFermi), s, 4.0, 2.0 * (1.0 + 3.0));
    CHECK(r.occupancies[0] == doctest::Approx(r.occupancies[1]).epsilon(1e-12));
    CHECK(r.occupancies[0] == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("single Bose bin") {
    const Spectrum s{{0.0}, {2.0}, {3.0}};
    const auto r = max_entropy_occupancies(gas(Species::kBose), s, 5.0, 10.0);
    CHECK(r.occupancies[0] == doctest::Approx(5.0).epsilon(1e-12));
    // Stationarity fixes alpha + beta eps = ln(1 + g/n).
    CHECK(r.alpha + r.beta * 2.0 == doctest::Approx(std::log(1.0 + 3.0 / 5.0)).epsilon(1e-12));
    CHECK(code_of([&] { max_entropy_occupancies(gas(Species::kBose), s, 5.0, 11.0); }) ==
          ErrorCode::kInfeasible);
  }
  SUBCASE("three-level Bose toy against the closed form") {
    const Spectrum s{{0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}, {2.0, 1.0, 3.0}};
    const auto g = gas(Species::kBose, 1.0, 0.8);
    const auto closed = bin_occupancies(s, 0.2, g);
    const auto r = max_entropy_occupancies(g, s, total_number(s, 0.2, g), total_energy(s, 0.2, g));
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.occupancies[i] == doctest::Approx(closed[i]).epsilon(1e-9));
  }
  SUBCASE("infeasible targets") {
    const Spectrum s{{0.0, 0.0}, {1.0, 3.0}, {4.0, 4.0}};
    CHECK(code_of([&] { max_entropy_occupancies(gas(Species::kBose), s, 1.0, 3.5); }) ==
          ErrorCode::kInfeasible);
    CHECK(code_of([&] { max_entropy_occupancies(gas(Species::kFermi), s, 8.0, 16.0); }) ==
          ErrorCode::kInfeasible);
  }
}
