#pragma once

#include "idstat/modes.hpp"
#include "idstat/symmetry.hpp"

namespace idstat::spinstat {

/// exp(i m delta) with delta the counterclockwise angular distance from
/// chi_from to chi_to, taken in (0, 2 pi]; coinciding angles give a full turn.
Complex rotation_phase(HalfInt m, double chi_from, double chi_to);

/// Exchange factor F and the two restoration factors it is built from.
struct ExchangePhase {
  /// Factor on the slot-1 function after rotating chi_a -> chi_b back to chi_a.
  Complex first;
  /// Factor on the slot-2 function after rotating chi_b -> chi_a back to chi_b.
  Complex second;
  /// first * second = (-1)^(2m).
  Complex total;
};

/// Parameters u_a, u_b of psi(u_a, chi_a) psi(u_b, chi_b) are exchanged and
/// both angles are restored by counterclockwise rotation; the product picks
/// up F = exp(-i m d1) exp(-i m d2) with d1 + d2 = 2 pi, i.e. (-1)^(2m).
/// Throws kDegenerateAngles if the angles coincide (modulo 2 pi, within 1e-12).
ExchangePhase exchange_phase(HalfInt m, double chi_a, double chi_b);

/// (1/sqrt2)[a(1) b(2) + F b(1) a(2)] for two spinor modes registered in
/// `table` with equal s and m. Symmetric for integral spin, antisymmetric for
/// half-odd spin. Throws kSpinMismatch, kDegenerateAngles, or
/// kInvalidArgument if an id does not name a SpinorMode.
symmetry::NParticleState exchanged_pair_state(const ModeTable& table, ModeId a, ModeId b);

}  // namespace idstat::spinstat
