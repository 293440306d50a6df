#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "idstat/error.hpp"
#include "idstat/wavepacket.hpp"

using namespace idstat;
using namespace idstat::wavepacket;

namespace {

// Closed-form <p1|p2> for two packets at their common minimum-width time,
// from the Gaussian integral of exp(-a x^2 + b x - c).
Complex gaussian_overlap_at_t0(const WavePacket& p1, const WavePacket& p2) {
  const double s1 = p1.sigma() * p1.sigma();
  const double s2 = p2.sigma() * p2.sigma();
  const double norm1 = std::pow(2.0 / (std::numbers::pi * s1), 0.25);
  const double norm2 = std::pow(2.0 / (std::numbers::pi * s2), 0.25);
  const double a = 1.0 / s1 + 1.0 / s2;
  const Complex b(2.0 * p1.x0() / s1 + 2.0 * p2.x0() / s2, p2.k0() - p1.k0());
  const double c = p1.x0() * p1.x0() / s1 + p2.x0() * p2.x0() / s2;
  const Complex phase(0.0, p1.k0() * p1.x0() - p2.k0() * p2.x0());
  return norm1 * norm2 * std::sqrt(std::numbers::pi / a) * std::exp(b * b / (4.0 * a) - c + phase);
}

WavePacket packet(double mass, double sigma, double x0, double t0, double k0, double hbar = 1.0) {
  return WavePacket({mass, sigma, x0, t0, k0, hbar});
}

}  // namespace

TEST_CASE("construction rejects nonphysical parameters") {
  CHECK_THROWS_AS(packet(0.0, 1.0, 0, 0, 0), Error);
  CHECK_THROWS_AS(packet(1.0, -1.0, 0, 0, 0), Error);
  CHECK_THROWS_AS(packet(1.0, 1.0, NAN, 0, 0), Error);
  CHECK_THROWS_AS(Grid(1.0, 0.0, 64), Error);
  CHECK_THROWS_AS(Grid(0.0, 1.0, 15), Error);
}

TEST_CASE("spreading factor") {
  const auto p = packet(1.0, 1.0, 0.0, 0.7, 0.0);
  CHECK(spreading_factor(p, 0.7) == 0.0);
  CHECK(spreading_factor(packet(1.0, std::sqrt(2.0), 0, 0, 0), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spreading_factor(packet(2.0, 1.0, 0, 0, 0), 3.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(spreading_factor(p, 0.7 + 2.0) == doctest::Approx(-spreading_factor(p, 0.7 - 2.0)));
}

TEST_CASE("evaluate at the centre and minimum-width time") {
  const auto p = packet(1.0, 1.0, 0.3, 0.0, 0.0);
  const Complex v = evaluate(p, 0.3, 0.0);
  CHECK(v.real() == doctest::Approx(std::pow(2.0 / std::numbers::pi, 0.25)).epsilon(1e-15));
  CHECK(v.real() == doctest::Approx(0.893).epsilon(1e-3));
  CHECK(v.imag() == 0.0);
  const auto q = packet(1.0, 2.5, 0.0, 0.0, 0.0);
  CHECK(std::abs(evaluate(q, 0.0, 0.0)) ==
        doctest::Approx(std::pow(2.0 / (std::numbers::pi * 6.25), 0.25)));
  for (double d : {0.1, 0.7, 2.0}) {
    CHECK(std::abs(evaluate(p, 0.3 + d, 0.0)) == doctest::Approx(std::abs(evaluate(p, 0.3 - d, 0.0))));
  }
}

TEST_CASE("centre motion") {
  CHECK(center(packet(1.0, 1.0, 1.5, 2.0, 3.0), 2.0) == 1.5);
  CHECK(center(packet(1.0, 1.0, 1.5, 0.0, 0.0), 9.0) == 1.5);
  CHECK(center(packet(1.0, 1.0, 0.0, 0.0, 2.0), 3.0) == doctest::Approx(6.0));

  // Least-squares fit of the density mean over five times.
  const auto p = packet(1.3, 0.8, -0.4, 0.2, 1.7, 0.9);
  std::vector<double> ts{0.2, 0.9, 1.6, 2.3, 3.0};
  std::vector<double> means;
  for (double t : ts) {
    const double w = density_width(p, t);
    const auto g = Grid::around(center(p, t), w, 14.0, 64.0);
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      m0 += density(p, g[i], t);
      m1 += g[i] * density(p, g[i], t);
    }
    means.push_back(m1 / m0);
  }
  double tbar = 0.0, mbar = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tbar += ts[i] / 5.0;
    mbar += means[i] / 5.0;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    num += (ts[i] - tbar) * (means[i] - mbar);
    den += (ts[i] - tbar) * (ts[i] - tbar);
  }
  CHECK(num / den == doctest::Approx(0.9 * 1.7 / 1.3).epsilon(1e-9));
}

TEST_CASE("density is normalized and matches |psi|^2") {
  const auto p = packet(1.0, 1.0, 0.0, 0.0, 0.5);
  for (double t : {0.0, 0.4, 2.0, 5.0}) {
    const auto g = Grid::around(center(p, t), density_width(p, t), 12.0, 64.0);
    CHECK(norm(p, g, t) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(density(p, 0.3, t) == doctest::Approx(std::norm(evaluate(p, 0.3, t))).epsilon(1e-14));
  }
  CHECK(density(p, 40.0, 0.0) < 1e-12);
}

TEST_CASE("density width follows sigma sqrt(1 + A^2) / sqrt 2") {
  const auto p = packet(0.7, 1.2, 0.0, 0.0, 0.0);
  for (double t : {0.0, 1.0, 4.0}) {
    const double w = density_width(p, t);
    const auto g = Grid::around(0.0, w, 14.0, 64.0);
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      m0 += density(p, g[i], t);
      m2 += g[i] * g[i] * density(p, g[i], t);
    }
    // Density exp(-x^2 / w^2) has variance w^2 / 2.
    const double fitted = std::sqrt(2.0 * m2 / m0);
    const double a = spreading_factor(p, t);
    CHECK(fitted == doctest::Approx(1.2 * std::sqrt(1.0 + a * a) / std::sqrt(2.0)).epsilon(1e-2));
  }
}

TEST_CASE("overlap against the closed-form Gaussian integral") {
  const auto p1 = packet(1.0, 1.0, -0.5, 0.0, 0.8);
  const auto p2 = packet(1.0, 1.4, 0.9, 0.0, -0.3);
  const Complex exact = gaussian_overlap_at_t0(p1, p2);
  const auto g = Grid(-20.0, 20.0, 4097);
  const Complex at_t0 = overlap(p1, p2, 0.0, g);
  CHECK(std::abs(at_t0 - exact) < 1e-9);
  // Free evolution is unitary, so the overlap is time independent.
  const auto wide = Grid(-60.0, 60.0, 16385);
  CHECK(std::abs(overlap(p1, p2, 2.5, wide) - exact) < 1e-8);
}

TEST_CASE("overlap properties") {
  const auto p = packet(1.0, 1.0, 0.0, 0.0, 1.0);
  const auto g = Grid::around(0.0, 1.0, 12.0, 64.0);
  CHECK(std::abs(overlap(p, p, 0.0, g) - 1.0) < 1e-6);

  const auto far = packet(1.0, 1.0, 20.0, 0.0, 1.0);
  const auto wide = Grid(-15.0, 35.0, 3201);
  CHECK(std::abs(overlap(p, far, 0.0, wide)) < 1e-10);

  const auto q = packet(1.0, 0.8, 0.6, 0.0, -0.4);
  const Complex ab = overlap(p, q, 0.3, g);
  const Complex ba = overlap(q, p, 0.3, g);
  CHECK(std::abs(ab - std::conj(ba)) < 1e-12);

  const auto narrow = Grid(-2.0, 2.0, 256);
  CHECK_THROWS_AS(overlap(p, q, 0.0, narrow), Error);
  try {
    overlap(p, q, 0.0, narrow);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGridTooNarrow);
  }
}

TEST_CASE("Schrodinger residual converges at second order") {
  const auto p = packet(1.0, 1.0, 0.0, 0.0, 0.0);
  const double coarse = schrodinger_residual(p, Grid::around(0.0, 1.0, 10.0, 32.0), 0.5);
  const double fine = schrodinger_residual(p, Grid::around(0.0, 1.0, 10.0, 64.0), 0.5);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.2));
  CHECK_THROWS_AS(schrodinger_residual(p, Grid(-1.0, 1.0, 64), 0.0), Error);
}

TEST_CASE("a corrupted packet is detected") {
  const auto p = packet(1.0, 1.0, 0.0, 0.0, 0.0);
  const auto g = Grid::around(0.0, 1.0, 10.0, 64.0);
  auto flipped = [&](double x, double t) { return std::conj(evaluate(p, x, t)); };
  CHECK(schrodinger_residual_of(flipped, 1.0, 1.0, g, 0.5) > 1e-2);
}
