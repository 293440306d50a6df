#include "idstat/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "idstat/error.hpp"

namespace idstat::wavepacket {

WavePacket::WavePacket(const Params& params) : p_(params) {
  const bool finite = std::isfinite(p_.mass) && std::isfinite(p_.sigma) &&
                      std::isfinite(p_.x0) && std::isfinite(p_.t0) &&
                      std::isfinite(p_.k0) && std::isfinite(p_.hbar);
  if (!finite || p_.mass <= 0.0 || p_.sigma <= 0.0 || p_.hbar <= 0.0) {
    std::ostringstream os;
    os << "wavepacket needs finite parameters with mass, sigma, hbar > 0 (mass="
       << p_.mass << ", sigma=" << p_.sigma << ", hbar=" << p_.hbar << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

Grid::Grid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points), dx_(0.0) {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs x_min < x_max");
  }
  if (n_points < 16) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least 16 points");
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
}

Grid Grid::around(double centre, double sigma, double half_width_sigmas,
                  double points_per_sigma) {
  const double half = half_width_sigmas * sigma;
  const auto intervals =
      static_cast<std::size_t>(std::llround(2.0 * half_width_sigmas * points_per_sigma));
  return Grid(centre - half, centre + half, intervals + 1);
}

double spreading_factor(const WavePacket& p, double t) {
  return 2.0 * p.hbar() * (t - p.t0()) / (p.mass() * p.sigma() * p.sigma());
}

double center(const WavePacket& p, double t) {
  return p.x0() + p.hbar() * p.k0() / p.mass() * (t - p.t0());
}

Complex evaluate(const WavePacket& p, double x, double t) {
  const double a = spreading_factor(p, t);
  const double w = p.sigma() * p.sigma() * (1.0 + a * a);
  const double y = x - center(p, t);
  const double modulus = std::pow(2.0 / (std::numbers::pi * w), 0.25) * std::exp(-y * y / w);
  const double phase = a * y * y / w - 0.5 * std::atan(a) + p.k0() * (x - p.x0()) -
                       p.hbar() * p.k0() * p.k0() / (2.0 * p.mass()) * (t - p.t0());
  return std::polar(modulus, phase);
}

double density(const WavePacket& p, double x, double t) {
  const double a = spreading_factor(p, t);
  const double w = p.sigma() * p.sigma() * (1.0 + a * a);
  const double y = x - center(p, t);
  return std::sqrt(2.0 / (std::numbers::pi * w)) * std::exp(-2.0 * y * y / w);
}

double density_width(const WavePacket& p, double t) {
  const double a = spreading_factor(p, t);
  return p.sigma() * std::sqrt(1.0 + a * a) / std::numbers::sqrt2;
}

std::vector<Complex> sample(const WavePacket& p, const Grid& g, double t) {
  std::vector<Complex> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = evaluate(p, g[i], t);
  return out;
}

double norm(const WavePacket& p, const Grid& g, double t) {
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
    sum += w * density(p, g[i], t);
  }
  return sum * g.spacing();
}

double boundary_density(const WavePacket& p, const Grid& g, double t) {
  return std::max(density(p, g.x_min(), t), density(p, g.x_max(), t));
}

namespace {

void require_wide_enough(const WavePacket& p, const Grid& g, double t) {
  const double edge = boundary_density(p, g, t);
  if (edge > kBoundaryDensityLimit) {
    std::ostringstream os;
    os << "grid [" << g.x_min() << ", " << g.x_max() << "] truncates packet centred at "
       << center(p, t) << " (boundary density " << edge << ")";
    throw Error(ErrorCode::kGridTooNarrow, os.str());
  }
}

}  // namespace

Complex overlap(const WavePacket& p1, const WavePacket& p2, double t, const Grid& g) {
  require_wide_enough(p1, g, t);
  require_wide_enough(p2, g, t);
  Complex sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
    sum += w * std::conj(evaluate(p1, g[i], t)) * evaluate(p2, g[i], t);
  }
  return sum * g.spacing();
}

double schrodinger_residual(const WavePacket& p, const Grid& g, double t) {
  require_wide_enough(p, g, t);
  return schrodinger_residual_of([&p](double x, double tt) { return evaluate(p, x, tt); },
                                 p.mass(), p.hbar(), g, t);
}

}  // namespace idstat::wavepacket
