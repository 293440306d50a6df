#pragma once

#include <compare>
#include <complex>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>

#include "idstat/wavepacket.hpp"

namespace idstat {

using Complex = std::complex<double>;

/// Index into a ModeTable.
struct ModeId {
  std::uint32_t index = 0;
  constexpr auto operator<=>(const ModeId&) const = default;
};

/// Integer or half-odd-integer quantity stored as twice its value.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  /// Throws kInvalidArgument unless 2*value is an integer.
  static HalfInt from_double(double value);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_half_odd() const { return twice_ % 2 != 0; }
  constexpr auto operator<=>(const HalfInt&) const = default;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

/// Orthonormality class with no internal structure: distinct abstract modes
/// are orthogonal.
struct AbstractMode {
  std::string name;
};

/// Spin-component eigenfunction exp(i m chi) attached to an external
/// (spatial) mode `payload`.
class SpinorMode {
 public:
  /// Throws kInvalidArgument for s < 0, |m| > s, or m - s non-integral.
  /// chi is reduced into [0, 2 pi).
  SpinorMode(HalfInt s, HalfInt m, double chi, ModeId payload);

  HalfInt s() const { return s_; }
  HalfInt m() const { return m_; }
  double chi() const { return chi_; }
  ModeId payload() const { return payload_; }

 private:
  HalfInt s_;
  HalfInt m_;
  double chi_;
  ModeId payload_;
};

/// Reduce an angle into [0, 2 pi).
double normalize_angle(double chi);

using Mode = std::variant<AbstractMode, wavepacket::WavePacket, SpinorMode>;

/// Complex inner product <a|b> of two registered modes.
using OverlapProvider = std::function<Complex(ModeId, ModeId)>;

/// Append-only registry of single-particle modes. Registration is serialized;
/// lookups may run concurrently with it. References returned by `at` stay
/// valid for the lifetime of the table.
class ModeTable {
 public:
  ModeTable() = default;
  ModeTable(const ModeTable&) = delete;
  ModeTable& operator=(const ModeTable&) = delete;

  ModeId add(Mode mode);
  ModeId add_abstract(std::string name) { return add(AbstractMode{std::move(name)}); }

  /// Throws kInvalidArgument for an unknown id.
  const Mode& at(ModeId id) const;
  std::size_t size() const;

  /// Id of the first abstract mode called `name`, if any.
  std::optional<ModeId> find_abstract(const std::string& name) const;

 private:
  mutable std::shared_mutex mutex_;
  std::deque<Mode> modes_;
};

/// Kronecker delta on ids.
OverlapProvider orthonormal_overlap();

/// Overlaps computed from table contents at time t:
///   abstract/abstract  -> delta of ids
///   packet/packet      -> wavepacket::overlap on `grid`
///   spinor/spinor      -> delta_{s s'} delta_{m m'} exp(i m (chi_b - chi_a)) <u_a|u_b>
///   mixed kinds        -> 0
/// The table must outlive the provider.
OverlapProvider table_overlap(const ModeTable& table, double t, const wavepacket::Grid& grid);

}  // namespace idstat
