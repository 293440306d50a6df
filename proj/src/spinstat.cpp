#include "idstat/spinstat.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "idstat/error.hpp"

namespace idstat::spinstat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngleTolerance = 1e-12;

double ccw_distance(double from, double to) {
  const double d = normalize_angle(to) - normalize_angle(from);
  return d > 0.0 ? d : d + kTwoPi;
}

const SpinorMode& spinor_at(const ModeTable& table, ModeId id) {
  const auto* s = std::get_if<SpinorMode>(&table.at(id));
  if (s == nullptr) {
    std::ostringstream os;
    os << "mode " << id.index << " is not a spinor mode";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return *s;
}

}  // namespace

Complex rotation_phase(HalfInt m, double chi_from, double chi_to) {
  return std::polar(1.0, m.value() * ccw_distance(chi_from, chi_to));
}

ExchangePhase exchange_phase(HalfInt m, double chi_a, double chi_b) {
  // Angles that agree modulo 2 pi up to rounding count as coinciding.
  const double d = ccw_distance(chi_a, chi_b);
  if (d < kAngleTolerance || d > kTwoPi - kAngleTolerance) {
    throw Error(ErrorCode::kDegenerateAngles,
                "exchange phase undefined for coinciding azimuthal angles");
  }
  // psi(u_b, chi_b) = exp(i m d1) psi(u_b, chi_a), so the exchanged slot-1
  // function equals exp(-i m d1) times the restored one; likewise for slot 2.
  ExchangePhase out;
  out.first = std::conj(rotation_phase(m, chi_a, chi_b));
  out.second = std::conj(rotation_phase(m, chi_b, chi_a));
  out.total = out.first * out.second;
  return out;
}

symmetry::NParticleState exchanged_pair_state(const ModeTable& table, ModeId a, ModeId b) {
  const SpinorMode& sa = spinor_at(table, a);
  const SpinorMode& sb = spinor_at(table, b);
  if (sa.s() != sb.s() || sa.m() != sb.m()) {
    std::ostringstream os;
    os << "pair needs equal s and m (s=" << sa.s().value() << "/" << sb.s().value()
       << ", m=" << sa.m().value() << "/" << sb.m().value() << ")";
    throw Error(ErrorCode::kSpinMismatch, os.str());
  }
  const ExchangePhase f = exchange_phase(sa.m(), sa.chi(), sb.chi());
  // After parameter exchange and restoration the slot-1 function is
  // psi(u_b, chi_b) = mode b and the slot-2 function is psi(u_a, chi_a) = mode a.
  const Complex norm = 1.0 / std::sqrt(2.0);
  return symmetry::NParticleState(
      2, {symmetry::ProductTerm{norm, {a, b}}, symmetry::ProductTerm{norm * f.total, {b, a}}});
}

}  // namespace idstat::spinstat
