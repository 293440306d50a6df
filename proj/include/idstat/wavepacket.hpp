#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace idstat::wavepacket {

using Complex = std::complex<double>;

/// Free one-dimensional Gaussian packet. `sigma` is the width parameter of
/// the packet at its minimum-width time `t0`; the density falls to 1/e of its
/// peak at a distance sigma/sqrt(2) from the centre at that time.
class WavePacket {
 public:
  struct Params {
    double mass = 1.0;
    double sigma = 1.0;
    double x0 = 0.0;
    double t0 = 0.0;
    double k0 = 0.0;
    double hbar = 1.0;
  };

  /// Throws Error(kInvalidArgument) unless mass, sigma and hbar are positive
  /// and every field is finite.
  explicit WavePacket(const Params& params);
  WavePacket() : WavePacket(Params{}) {}

  double mass() const { return p_.mass; }
  double sigma() const { return p_.sigma; }
  double x0() const { return p_.x0; }
  double t0() const { return p_.t0; }
  double k0() const { return p_.k0; }
  double hbar() const { return p_.hbar; }
  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Uniform quadrature grid [x_min, x_max] with n_points nodes (both ends
/// included).
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_points);

  /// Grid centred on `centre` with `points_per_sigma` nodes per sigma out to
  /// +-`half_width_sigmas` sigma.
  static Grid around(double centre, double sigma, double half_width_sigmas,
                     double points_per_sigma);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double spacing() const { return dx_; }
  double operator[](std::size_t i) const { return x_min_ + dx_ * static_cast<double>(i); }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

/// A(t) = 2 hbar (t - t0) / (m sigma^2).
double spreading_factor(const WavePacket& p, double t);

Complex evaluate(const WavePacket& p, double x, double t);

/// x0 + (hbar k0 / m)(t - t0).
double center(const WavePacket& p, double t);

double density(const WavePacket& p, double x, double t);

/// 1/e half-width of the density at time t: sigma sqrt(1 + A^2) / sqrt(2).
double density_width(const WavePacket& p, double t);

std::vector<Complex> sample(const WavePacket& p, const Grid& g, double t);

/// Trapezoid estimate of the integral of |psi|^2 over the grid.
double norm(const WavePacket& p, const Grid& g, double t);

/// Trapezoid estimate of <p1|p2> at time t. Throws kGridTooNarrow if either
/// density exceeds 1e-10 at a grid boundary.
Complex overlap(const WavePacket& p1, const WavePacket& p2, double t, const Grid& g);

/// Discrete L2 norm of i hbar dpsi/dt + (hbar^2/2m) d2psi/dx2 divided by the
/// discrete L2 norm of psi. Centered differences in x and t with
/// dt = dx^2 m / hbar; second order in the grid spacing.
double schrodinger_residual(const WavePacket& p, const Grid& g, double t);

/// Same as above for an arbitrary amplitude function; used to show that a
/// non-solution is detected.
template <typename Fn>
double schrodinger_residual_of(Fn&& psi, double mass, double hbar, const Grid& g, double t);

/// Largest boundary density of `p` on `g`; overlap and residual reject
/// grids where this exceeds kBoundaryDensityLimit.
double boundary_density(const WavePacket& p, const Grid& g, double t);

inline constexpr double kBoundaryDensityLimit = 1e-10;

template <typename Fn>
double schrodinger_residual_of(Fn&& psi, double mass, double hbar, const Grid& g,
                               double t) {
  const double dx = g.spacing();
  const double dt = dx * dx * mass / hbar;
  const double kinetic = hbar * hbar / (2.0 * mass);
  double res2 = 0.0;
  double norm2 = 0.0;
  Complex left = psi(g[0], t);
  Complex mid = psi(g[1], t);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const Complex right = psi(g[i + 1], t);
    const Complex dpsi_dt = (psi(g[i], t + dt) - psi(g[i], t - dt)) / (2.0 * dt);
    const Complex d2psi_dx2 = (right - 2.0 * mid + left) / (dx * dx);
    const Complex r = Complex(0.0, hbar) * dpsi_dt + kinetic * d2psi_dx2;
    res2 += std::norm(r);
    norm2 += std::norm(mid);
    left = mid;
    mid = right;
  }
  return std::sqrt(res2 / norm2);
}

}  // namespace idstat::wavepacket
