#include "idstat/selftest.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <sstream>

#include "idstat/balance.hpp"
#include "idstat/counting.hpp"
#include "idstat/distributions.hpp"
#include "idstat/error.hpp"
#include "idstat/matrix.hpp"
#include "idstat/spinstat.hpp"
#include "idstat/symmetry.hpp"
#include "idstat/wavepacket.hpp"

namespace idstat {

namespace {

using Check = std::function<std::string()>;  // empty string means pass

std::string counting_oracle() {
  for (std::uint64_t total = 1; total <= 12; ++total) {
    for (std::uint64_t g = 1; g <= total; ++g) {
      const counting::OccupancyRegion r{total - g, g};
      if (counting::bose_w(r) != counting::oracle_count(r, counting::Statistics::kBose)) {
        return "Bose count differs at n=" + std::to_string(r.n) + " g=" + std::to_string(g);
      }
      if (r.n <= g &&
          counting::fermi_w(r) != counting::oracle_count(r, counting::Statistics::kFermi)) {
        return "Fermi count differs at n=" + std::to_string(r.n) + " g=" + std::to_string(g);
      }
    }
  }
  return {};
}

std::string permanent_oracle() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  for (int n = 1; n <= 6; ++n) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = {gauss(rng), gauss(rng)};
    }
    const auto fast = permanent(m);
    const auto slow = oracle::naive_permanent(m);
    if (std::abs(fast - slow) > 1e-10 * std::max(1.0, std::abs(slow))) {
      return "Ryser and n!-sum disagree at n=" + std::to_string(n);
    }
  }
  return {};
}

std::string pauli_cancellation() {
  using symmetry::NParticleState;
  const ModeId a{0}, b{1}, c{2};
  for (const auto& modes : {std::vector<ModeId>{a, a}, std::vector<ModeId>{a, b, a},
                            std::vector<ModeId>{c, b, c, a}}) {
    if (!symmetry::antisymmetrize(NParticleState::product(modes)).is_zero()) {
      return "antisymmetrized state with a repeated mode is not zero";
    }
  }
  return {};
}

std::string exchange_sign() {
  for (int twice = 0; twice <= 5; ++twice) {
    const auto phase = spinstat::exchange_phase(HalfInt::from_twice(twice), 0.3, 2.1);
    const double expected = twice % 2 == 0 ? 1.0 : -1.0;
    if (std::abs(phase.total - Complex(expected, 0.0)) > 1e-12) {
      return "F != (-1)^(2s) for 2s=" + std::to_string(twice);
    }
  }
  return {};
}

std::string amplitude_forms() {
  using symmetry::NParticleState;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd gram(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) gram(i, j) = {gauss(rng), gauss(rng)};
  }
  gram = gram.adjoint() * gram;
  const OverlapProvider ov = [gram](ModeId x, ModeId y) {
    return gram(static_cast<Eigen::Index>(x.index), static_cast<Eigen::Index>(y.index));
  };
  const auto a = NParticleState::product({ModeId{0}, ModeId{1}});
  const auto b = NParticleState::product({ModeId{2}, ModeId{3}});
  for (int sign : {1, -1}) {
    const auto f = symmetry::feynman_amplitude(b, a, sign, ov);
    const auto f2 = symmetry::standard_amplitude(b, a, sign, ov);
    if (std::abs(f - f2) > 1e-12 * std::max(1.0, std::abs(f))) {
      return "direct and symmetrized amplitudes differ";
    }
  }
  return {};
}

std::string packet_norm() {
  const wavepacket::WavePacket p({1.0, 1.0, 0.0, 0.0, 1.0, 1.0});
  for (double t : {0.0, 1.0, 5.0}) {
    const double width = wavepacket::density_width(p, t);
    const auto grid = wavepacket::Grid::around(wavepacket::center(p, t), width, 12.0, 64.0);
    if (std::abs(wavepacket::norm(p, grid, t) - 1.0) > 1e-6) {
      return "packet norm drifts at t=" + std::to_string(t);
    }
  }
  return {};
}

std::string mu_round_trip() {
  using namespace distributions;
  const MomentumGrid grid(0.0, 10.0, 64);
  for (Species sp : {Species::kFermi, Species::kBose}) {
    GasSpec spec;
    spec.species = sp;
    spec.volume = 10.0;
    const Spectrum s = make_spectrum(spec, grid);
    const double mu = sp == Species::kFermi ? 2.0 : 0.5;
    const double n = total_number(s, mu, spec);
    const double back = solve_mu(n, spec, s);
    if (std::abs(back - mu) > 1e-8) return "mu does not round-trip";
  }
  return {};
}

std::string stationary_balance() {
  using namespace balance;
  const auto e = uniform_energies(6, 0.5, 0.5);
  const std::vector<double> ones(e.size(), 1.0);
  const auto p1 = stationary_population(1, Species::kBose, e, ones, ones, 1.0, 0.0, 24);
  const auto p2 = stationary_population(2, Species::kBose, e, ones, ones, 1.0, -0.3, 24);
  const auto channels = generate_channels(p1, p2, 2);
  const double r = max_residual(p1, p2, channels);
  if (r > 1e-12) return "stationary populations are not in detailed balance";
  return {};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  const std::vector<std::pair<std::string, Check>> checks = {
      {"counting_oracle", counting_oracle},   {"permanent_oracle", permanent_oracle},
      {"pauli_cancellation", pauli_cancellation}, {"exchange_sign", exchange_sign},
      {"amplitude_forms", amplitude_forms},   {"packet_norm", packet_norm},
      {"mu_round_trip", mu_round_trip},       {"stationary_balance", stationary_balance},
  };
  std::vector<SelftestResult> results;
  for (const auto& [name, check] : checks) {
    SelftestResult r{name, false, {}};
    try {
      r.detail = check();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("threw: ") + e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace idstat
