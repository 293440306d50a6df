#include "idstat/modes.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "idstat/error.hpp"

namespace idstat {

HalfInt HalfInt::from_double(double value) {
  const double twice = 2.0 * value;
  const double rounded = std::round(twice);
  if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9 || std::abs(rounded) > 1e6) {
    std::ostringstream os;
    os << value << " is not an integer or half-integer";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return HalfInt(static_cast<int>(rounded));
}

double normalize_angle(double chi) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(chi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

SpinorMode::SpinorMode(HalfInt s, HalfInt m, double chi, ModeId payload)
    : s_(s), m_(m), chi_(normalize_angle(chi)), payload_(payload) {
  if (!std::isfinite(chi)) {
    throw Error(ErrorCode::kInvalidArgument, "spinor angle must be finite");
  }
  if (s.twice() < 0 || std::abs(m.twice()) > s.twice() || (s.twice() - m.twice()) % 2 != 0) {
    std::ostringstream os;
    os << "spin component m=" << m.value() << " not on the ladder of s=" << s.value();
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

ModeId ModeTable::add(Mode mode) {
  std::unique_lock lock(mutex_);
  modes_.push_back(std::move(mode));
  return ModeId{static_cast<std::uint32_t>(modes_.size() - 1)};
}

const Mode& ModeTable::at(ModeId id) const {
  std::shared_lock lock(mutex_);
  if (id.index >= modes_.size()) {
    std::ostringstream os;
    os << "unknown mode id " << id.index;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return modes_[id.index];
}

std::size_t ModeTable::size() const {
  std::shared_lock lock(mutex_);
  return modes_.size();
}

std::optional<ModeId> ModeTable::find_abstract(const std::string& name) const {
  std::shared_lock lock(mutex_);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (const auto* a = std::get_if<AbstractMode>(&modes_[i]); a && a->name == name) {
      return ModeId{static_cast<std::uint32_t>(i)};
    }
  }
  return std::nullopt;
}

OverlapProvider orthonormal_overlap() {
  return [](ModeId a, ModeId b) { return a == b ? Complex(1.0) : Complex(0.0); };
}

namespace {

Complex table_overlap_impl(const ModeTable& table, double t, const wavepacket::Grid& grid,
                           ModeId a, ModeId b) {
  const Mode& ma = table.at(a);
  const Mode& mb = table.at(b);
  if (ma.index() != mb.index()) return 0.0;
  if (std::holds_alternative<AbstractMode>(ma)) {
    return a == b ? Complex(1.0) : Complex(0.0);
  }
  if (const auto* pa = std::get_if<wavepacket::WavePacket>(&ma)) {
    return wavepacket::overlap(*pa, std::get<wavepacket::WavePacket>(mb), t, grid);
  }
  const auto& sa = std::get<SpinorMode>(ma);
  const auto& sb = std::get<SpinorMode>(mb);
  if (sa.s() != sb.s() || sa.m() != sb.m()) return 0.0;
  const Complex spin = std::polar(1.0, sa.m().value() * (sb.chi() - sa.chi()));
  return spin * table_overlap_impl(table, t, grid, sa.payload(), sb.payload());
}

}  // namespace

OverlapProvider table_overlap(const ModeTable& table, double t, const wavepacket::Grid& grid) {
  return [&table, t, grid](ModeId a, ModeId b) {
    return table_overlap_impl(table, t, grid, a, b);
  };
}

}  // namespace idstat
