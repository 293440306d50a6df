#include "idstat/balance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>
#include <utility>

#include "idstat/error.hpp"

namespace idstat::balance {

namespace {

constexpr double kTailLimit = 1e-14;
constexpr std::size_t kMaxAutoOrder = 1'000'000;

[[noreturn]] void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

// One of the four slots of a channel. A "giving" slot holds packets of order
// x that drop to x - n; a "receiving" slot holds packets of order x that rise
// to x + n. Either way the forward factor is p(x) and the reverse factor is
// p(partner(x)).
struct Slot {
  std::span<double> col;
  std::size_t n;
  bool giving;

  std::size_t first() const { return giving ? n : 0; }
  std::size_t last_plus_one() const { return giving ? col.size() : col.size() - n; }
  bool empty() const { return n >= col.size(); }
  std::size_t partner(std::size_t x) const { return giving ? x - n : x + n; }
};

std::array<Slot, 4> slots_of(std::span<double> c1i, std::span<double> c1f, std::span<double> c2i,
                             std::span<double> c2f, const CollisionChannel& ch) {
  return {Slot{c1i, ch.n, true}, Slot{c1f, ch.n, false}, Slot{c2i, ch.n2, true},
          Slot{c2f, ch.n2, false}};
}

void check_bins(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                const CollisionChannel& ch) {
  if (ch.bin_1i >= pop1.bins() || ch.bin_1f >= pop1.bins() || ch.bin_2i >= pop2.bins() ||
      ch.bin_2f >= pop2.bins()) {
    std::ostringstream os;
    os << "channel bins (" << ch.bin_1i << "," << ch.bin_1f << "," << ch.bin_2i << ","
       << ch.bin_2f << ") lie off a grid of " << pop1.bins() << " and " << pop2.bins() << " bins";
    fail(ErrorCode::kOffGrid, os.str());
  }
}

// Absolute accuracy of max_residual.
constexpr double kResidualSlack = 1e-15;

struct Point {
  double x;
  double y;
};

// Vertices of the convex hull that maximize c1 x - c2 y for some c1, c2 >= 0:
// the stretch of the lower hull from the lowest point to the rightmost one.
// A vertex within `flat` of the chord past it is dropped; with |(c1, c2)| <= 1
// that moves the supported max by at most `flat`. Without this, rounding
// noise in the nearly collinear sets of populations close to balance keeps
// almost every point on the hull.
std::vector<Point> frontier(std::vector<Point> pts, double flat) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<Point> lower;
  for (const auto& p : pts) {
    while (lower.size() >= 2) {
      const Point& o = lower[lower.size() - 2];
      const Point& a = lower.back();
      const double vx = p.x - o.x;
      const double vy = p.y - o.y;
      const double turn = (a.x - o.x) * vy - (a.y - o.y) * vx;
      if (turn > flat * std::hypot(vx, vy)) break;
      lower.pop_back();
    }
    lower.push_back(p);
  }
  std::size_t begin = 0;
  for (std::size_t i = 1; i < lower.size(); ++i) {
    if (lower[i].y <= lower[begin].y) begin = i;
  }
  std::size_t end = lower.size();
  for (std::size_t i = begin; i < lower.size(); ++i) {
    if (lower[i].x == lower.back().x) {
      end = i + 1;
      break;
    }
  }
  return {lower.begin() + static_cast<std::ptrdiff_t>(begin),
          lower.begin() + static_cast<std::ptrdiff_t>(end)};
}

// max over one point per set of prod(x) - prod(y), all coordinates >= 0,
// given each set's frontier and the largest coordinate in each set. The
// objective is linear in each set's point, so the sets can be folded one at a
// time, keeping only frontier points. Each pruning is scaled by the largest
// coefficient the remaining sets can put on it, so the result is within a
// few kResidualSlack of the true max.
double max_product_gap(const std::array<const std::vector<Point>*, 4>& sets,
                       const std::array<double, 4>& scale) {
  std::vector<Point> acc = *sets[0];
  for (std::size_t j = 1; j < sets.size(); ++j) {
    std::vector<Point> combined;
    combined.reserve(acc.size() * sets[j]->size());
    for (const auto& a : acc) {
      for (const auto& b : *sets[j]) combined.push_back({a.x * b.x, a.y * b.y});
    }
    double rest = 1.0;
    for (std::size_t i = j + 1; i < sets.size(); ++i) rest *= scale[i];
    acc = frontier(std::move(combined), rest > 0.0 ? kResidualSlack / (4.0 * rest) : 0.0);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : acc) best = std::max(best, p.x - p.y);
  return best;
}

// Frontiers of one slot's (forward, reverse) factor pairs, for the residual
// and for its negative.
struct SlotFrontier {
  std::vector<Point> forward;
  std::vector<Point> reverse;
  double scale = 0.0;
};

SlotFrontier slot_frontier(std::span<const double> col, std::size_t n, bool giving,
                           double coefficient_bound) {
  SlotFrontier out;
  if (n >= col.size()) return out;
  std::vector<Point> fwd;
  std::vector<Point> rev;
  const std::size_t first = giving ? n : 0;
  const std::size_t last = giving ? col.size() : col.size() - n;
  for (std::size_t x = first; x < last; ++x) {
    const double a = col[x];
    const double b = col[giving ? x - n : x + n];
    fwd.push_back({a, b});
    rev.push_back({b, a});
    out.scale = std::max({out.scale, a, b});
  }
  const double flat = coefficient_bound > 0.0 ? kResidualSlack / (4.0 * coefficient_bound) : 0.0;
  out.forward = frontier(std::move(fwd), flat);
  out.reverse = frontier(std::move(rev), flat);
  return out;
}

double channel_residual(const std::array<const SlotFrontier*, 4>& slots) {
  std::array<double, 4> scale{};
  for (std::size_t j = 0; j < 4; ++j) {
    if (slots[j]->forward.empty()) return 0.0;
    scale[j] = slots[j]->scale;
  }
  const double up = max_product_gap({&slots[0]->forward, &slots[1]->forward, &slots[2]->forward,
                                     &slots[3]->forward},
                                    scale);
  const double down = max_product_gap({&slots[0]->reverse, &slots[1]->reverse,
                                       &slots[2]->reverse, &slots[3]->reverse},
                                      scale);
  return std::max({0.0, up, down});
}

double largest_entry(const CondensatePopulation& pop) {
  double m = 0.0;
  for (std::size_t bin = 0; bin < pop.bins(); ++bin) {
    for (double p : pop.column(bin)) m = std::max(m, p);
  }
  return m;
}

double stirling_entropy(const CondensatePopulation& pop) {
  double total = 0.0;
  for (std::size_t bin = 0; bin < pop.bins(); ++bin) {
    const double g = pop.mode_count(bin);
    double s = g * std::log(g);
    for (double p : pop.column(bin)) {
      const double packets = p * pop.width(bin);
      if (packets > 0.0) s -= packets * std::log(packets);
    }
    total += s;
  }
  return total;
}

}  // namespace

CondensatePopulation::CondensatePopulation(int kind, Species species, std::vector<double> energies,
                                           std::vector<double> widths, std::vector<double> modes,
                                           std::size_t s_max)
    : kind_(kind),
      species_(species),
      energies_(std::move(energies)),
      widths_(std::move(widths)),
      modes_(std::move(modes)),
      s_max_(s_max) {
  if (kind_ != 1 && kind_ != 2) fail(ErrorCode::kInvalidArgument, "packet kind must be 1 or 2");
  if (energies_.empty() || energies_.size() != widths_.size() ||
      energies_.size() != modes_.size()) {
    fail(ErrorCode::kInvalidArgument, "energies, widths and mode counts need one entry per bin");
  }
  if (!std::is_sorted(energies_.begin(), energies_.end()) ||
      std::any_of(energies_.begin(), energies_.end(), [](double e) { return !std::isfinite(e); })) {
    fail(ErrorCode::kInvalidArgument, "energies must be finite and sorted");
  }
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!std::all_of(widths_.begin(), widths_.end(), positive) ||
      !std::all_of(modes_.begin(), modes_.end(), positive)) {
    fail(ErrorCode::kInvalidArgument, "bin widths and mode counts must be positive");
  }
  if (species_ == Species::kFermi && s_max_ != 1) {
    fail(ErrorCode::kInvalidArgument, "Fermi packets hold at most one quantum (s_max = 1)");
  }
  table_.assign(energies_.size() * (s_max_ + 1), 0.0);
}

double CondensatePopulation::at(std::size_t s, std::size_t bin) const {
  if (s > s_max_ || bin >= bins()) fail(ErrorCode::kOffGrid, "population index off the table");
  return table_[bin * (s_max_ + 1) + s];
}

double& CondensatePopulation::at(std::size_t s, std::size_t bin) {
  if (s > s_max_ || bin >= bins()) fail(ErrorCode::kOffGrid, "population index off the table");
  return table_[bin * (s_max_ + 1) + s];
}

std::span<double> CondensatePopulation::column(std::size_t bin) {
  if (bin >= bins()) fail(ErrorCode::kOffGrid, "bin off the grid");
  return {table_.data() + bin * (s_max_ + 1), s_max_ + 1};
}

std::span<const double> CondensatePopulation::column(std::size_t bin) const {
  if (bin >= bins()) fail(ErrorCode::kOffGrid, "bin off the grid");
  return {table_.data() + bin * (s_max_ + 1), s_max_ + 1};
}

double CondensatePopulation::packets(std::size_t bin) const {
  const auto col = column(bin);
  return std::accumulate(col.begin(), col.end(), 0.0) * widths_[bin];
}

void CondensatePopulation::check_invariants(double tolerance) const {
  for (double p : table_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      fail(ErrorCode::kInvariantViolation, "population entry is negative or not finite");
    }
  }
  for (std::size_t bin = 0; bin < bins(); ++bin) {
    const double drift = std::abs(packets(bin) - modes_[bin]);
    if (drift > tolerance * std::max(1.0, modes_[bin])) {
      std::ostringstream os;
      os << "bin " << bin << " holds " << packets(bin) << " packets, mode count is " << modes_[bin];
      fail(ErrorCode::kInvariantViolation, os.str());
    }
  }
}

std::vector<double> uniform_energies(std::size_t bins, double e0, double de) {
  if (bins == 0 || !(de > 0.0)) fail(ErrorCode::kInvalidArgument, "need bins > 0 and de > 0");
  std::vector<double> out(bins);
  for (std::size_t i = 0; i < bins; ++i) out[i] = e0 + static_cast<double>(i) * de;
  return out;
}

void validate_channel(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                      const CollisionChannel& ch) {
  check_bins(pop1, pop2, ch);
  const double lhs = ch.n * (pop1.energy(ch.bin_1i) - pop1.energy(ch.bin_1f));
  const double rhs = ch.n2 * (pop2.energy(ch.bin_2f) - pop2.energy(ch.bin_2i));
  const double half_bin =
      0.5 * std::min({pop1.width(ch.bin_1i), pop1.width(ch.bin_1f), pop2.width(ch.bin_2i),
                      pop2.width(ch.bin_2f)});
  if (std::abs(lhs - rhs) > half_bin) {
    std::ostringstream os;
    os << "channel does not conserve energy: n(e1i - e1f) = " << lhs
       << ", n'(e2f - e2i) = " << rhs;
    fail(ErrorCode::kInvalidArgument, os.str());
  }
}

std::vector<CollisionChannel> generate_channels(const CondensatePopulation& pop1,
                                                const CondensatePopulation& pop2,
                                                unsigned max_transfer) {
  const double w1 = *std::min_element(pop1.widths().begin(), pop1.widths().end());
  const double w2 = *std::min_element(pop2.widths().begin(), pop2.widths().end());
  const double tol = 1e-9 * std::min(w1, w2);
  const unsigned max1 = static_cast<unsigned>(std::min<std::size_t>(max_transfer, pop1.s_max()));
  const unsigned max2 = static_cast<unsigned>(std::min<std::size_t>(max_transfer, pop2.s_max()));
  std::vector<CollisionChannel> out;
  for (std::size_t i1 = 0; i1 < pop1.bins(); ++i1) {
    for (std::size_t f1 = 0; f1 < pop1.bins(); ++f1) {
      if (f1 == i1) continue;
      const double d1 = pop1.energy(i1) - pop1.energy(f1);
      for (std::size_t i2 = 0; i2 < pop2.bins(); ++i2) {
        for (std::size_t f2 = 0; f2 < pop2.bins(); ++f2) {
          if (f2 == i2) continue;
          const double d2 = pop2.energy(f2) - pop2.energy(i2);
          if ((d1 > 0.0) != (d2 > 0.0)) continue;
          for (unsigned n = 1; n <= max1; ++n) {
            for (unsigned n2 = 1; n2 <= max2; ++n2) {
              if (std::abs(n * d1 - n2 * d2) <= tol) out.push_back({i1, f1, i2, f2, n, n2});
            }
          }
        }
      }
    }
  }
  return out;
}

double balance_residual(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                        const CollisionChannel& ch, const Orders& o) {
  check_bins(pop1, pop2, ch);
  if (o.s < ch.n || o.s2 < ch.n2) {
    fail(ErrorCode::kOffGrid, "giving packets need at least n quanta (s >= n, s' >= n')");
  }
  if (o.s > pop1.s_max() || o.s2 > pop2.s_max()) {
    fail(ErrorCode::kOffGrid, "packet order above s_max");
  }
  if (o.r + ch.n > pop1.s_max() || o.r2 + ch.n2 > pop2.s_max()) {
    std::ostringstream os;
    os << "receiving packet would exceed s_max (r + n = " << o.r + ch.n
       << ", r' + n' = " << o.r2 + ch.n2 << ")";
    fail(ErrorCode::kOrderOverflow, os.str());
  }
  const double forward = pop1.at(o.s, ch.bin_1i) * pop1.at(o.r, ch.bin_1f) *
                         pop2.at(o.s2, ch.bin_2i) * pop2.at(o.r2, ch.bin_2f);
  const double reverse = pop1.at(o.s - ch.n, ch.bin_1i) * pop1.at(o.r + ch.n, ch.bin_1f) *
                         pop2.at(o.s2 - ch.n2, ch.bin_2i) * pop2.at(o.r2 + ch.n2, ch.bin_2f);
  return forward - reverse;
}

double max_residual(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                    const CollisionChannel& ch) {
  return max_residual(pop1, pop2, std::span<const CollisionChannel>(&ch, 1));
}

double max_residual(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                    std::span<const CollisionChannel> channels) {
  const double m = std::max(largest_entry(pop1), largest_entry(pop2));
  const double bound = m * m * m;
  // Slot frontiers depend only on (kind, bin, n, role) and are shared by
  // many channels.
  std::map<std::tuple<const CondensatePopulation*, std::size_t, unsigned, bool>, SlotFrontier> cache;
  auto get = [&](const CondensatePopulation& pop, std::size_t bin, unsigned n, bool giving) {
    const auto key = std::make_tuple(&pop, bin, n, giving);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, slot_frontier(pop.column(bin), n, giving, bound)).first;
    }
    return &it->second;
  };
  double worst = 0.0;
  for (const auto& ch : channels) {
    check_bins(pop1, pop2, ch);
    const std::array<const SlotFrontier*, 4> slots{
        get(pop1, ch.bin_1i, ch.n, true), get(pop1, ch.bin_1f, ch.n, false),
        get(pop2, ch.bin_2i, ch.n2, true), get(pop2, ch.bin_2f, ch.n2, false)};
    worst = std::max(worst, channel_residual(slots));
  }
  return worst;
}

double geometric_tail(double b, double c, double eps, std::size_t s_max) {
  return std::exp(-(b * eps - c) * static_cast<double>(s_max + 1));
}

CondensatePopulation stationary_population(int kind, Species species,
                                           const std::vector<double>& energies,
                                           const std::vector<double>& widths,
                                           const std::vector<double>& modes, double b, double c,
                                           std::optional<std::size_t> s_max) {
  if (!(b > 0.0) || !std::isfinite(b) || !std::isfinite(c)) {
    fail(ErrorCode::kInvalidArgument, "stationary population needs b = 1/kT > 0 and finite c");
  }
  std::size_t cap = 1;
  if (species == Species::kBose) {
    if (s_max) {
      cap = *s_max;
    } else {
      cap = 0;
      for (double e : energies) {
        const double gap = b * e - c;
        if (!(gap > 0.0)) {
          std::ostringstream os;
          os << "geometric series diverges at eps = " << e << " (b eps - c = " << gap << ")";
          fail(ErrorCode::kDivergentSeries, os.str());
        }
        std::size_t s = 0;
        while (std::exp(-gap * static_cast<double>(s + 1)) * static_cast<double>(s + 2) >=
               kTailLimit) {
          if (++s > kMaxAutoOrder) fail(ErrorCode::kTooLarge, "geometric tail too long to truncate");
        }
        cap = std::max(cap, s);
      }
    }
  }
  CondensatePopulation pop(kind, species, energies, widths, modes, cap);
  for (std::size_t bin = 0; bin < pop.bins(); ++bin) {
    const double log_x = -(b * energies[bin] - c);
    const double shift = std::max(0.0, log_x * static_cast<double>(cap));
    auto col = pop.column(bin);
    double sum = 0.0;
    for (std::size_t s = 0; s <= cap; ++s) {
      col[s] = std::exp(log_x * static_cast<double>(s) - shift);
      sum += col[s];
    }
    const double scale = modes[bin] / (widths[bin] * sum);
    for (double& p : col) p *= scale;
  }
  return pop;
}

Quanta total_quanta(const CondensatePopulation& pop) {
  Quanta q;
  q.per_bin.resize(pop.bins());
  for (std::size_t bin = 0; bin < pop.bins(); ++bin) {
    const auto col = pop.column(bin);
    double sum = 0.0;
    for (std::size_t s = 1; s < col.size(); ++s) sum += static_cast<double>(s) * col[s];
    q.per_bin[bin] = sum * pop.width(bin);
    q.total += q.per_bin[bin];
  }
  return q;
}

double packet_entropy(const CondensatePopulation& pop, EntropyForm form, double k) {
  pop.check_invariants(1e-6);
  if (form == EntropyForm::kStirling) return k * stirling_entropy(pop);
  double total = 0.0;
  for (std::size_t bin = 0; bin < pop.bins(); ++bin) {
    double s = std::lgamma(pop.mode_count(bin) + 1.0);
    for (double p : pop.column(bin)) s -= std::lgamma(p * pop.width(bin) + 1.0);
    total += s;
  }
  return k * total;
}

std::vector<double> fitted_slopes(const CondensatePopulation& pop, double cutoff) {
  std::vector<double> out(pop.bins(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t bin = 0; bin < pop.bins(); ++bin) {
    const auto col = pop.column(bin);
    const double peak = *std::max_element(col.begin(), col.end());
    double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t s = 0; s < col.size(); ++s) {
      if (!(col[s] > cutoff * peak)) continue;
      const double x = static_cast<double>(s);
      const double y = std::log(col[s]);
      n += 1.0;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    if (n >= 2.0) out[bin] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return out;
}

void perturb(CondensatePopulation& pop1, CondensatePopulation& pop2,
             std::span<const CollisionChannel> channels, std::size_t moves, std::uint64_t seed) {
  if (channels.empty() || moves == 0) return;
  for (const auto& ch : channels) validate_channel(pop1, pop2, ch);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_channel(0, channels.size() - 1);
  std::uniform_real_distribution<double> extent(-0.9, 0.9);
  for (std::size_t m = 0; m < moves; ++m) {
    const auto& ch = channels[pick_channel(rng)];
    auto slots = slots_of(pop1.column(ch.bin_1i), pop1.column(ch.bin_1f), pop2.column(ch.bin_2i),
                          pop2.column(ch.bin_2f), ch);
    if (std::any_of(slots.begin(), slots.end(), [](const Slot& s) { return s.empty() || s.n == 0; })) {
      continue;
    }
    std::array<std::size_t, 4> x{};
    double room_forward = std::numeric_limits<double>::infinity();
    double room_reverse = std::numeric_limits<double>::infinity();
    bool populated = true;
    for (std::size_t j = 0; j < 4 && populated; ++j) {
      // Orders are drawn in proportion to their population so that moves
      // land where the packets are.
      const auto first = slots[j].col.begin() + static_cast<std::ptrdiff_t>(slots[j].first());
      const auto last = slots[j].col.begin() + static_cast<std::ptrdiff_t>(slots[j].last_plus_one());
      populated = std::any_of(first, last, [](double p) { return p > 0.0; });
      if (!populated) break;
      std::discrete_distribution<std::size_t> pick(first, last);
      x[j] = slots[j].first() + pick(rng);
      room_forward = std::min(room_forward, slots[j].col[x[j]]);
      room_reverse = std::min(room_reverse, slots[j].col[slots[j].partner(x[j])]);
    }
    if (!populated) continue;
    const double u = extent(rng);
    const double amount = u >= 0.0 ? u * room_forward : u * room_reverse;
    for (std::size_t j = 0; j < 4; ++j) {
      slots[j].col[x[j]] -= amount;
      slots[j].col[slots[j].partner(x[j])] += amount;
    }
  }
}

namespace {

// Moves the populations along the aggregated net flux of one channel.
struct Flux {
  std::size_t slot;
  std::size_t x;
  double value;
};

// Scratch buffers reused across channel updates.
struct Workspace {
  std::array<std::vector<double>, 4> delta;
  std::vector<Flux> fluxes;
};

void relax_channel(CondensatePopulation& pop1, CondensatePopulation& pop2,
                   const CollisionChannel& ch, double rate, Workspace& work) {
  auto& delta = work.delta;
  auto slots = slots_of(pop1.column(ch.bin_1i), pop1.column(ch.bin_1f), pop2.column(ch.bin_2i),
                        pop2.column(ch.bin_2f), ch);
  if (std::any_of(slots.begin(), slots.end(), [](const Slot& s) { return s.empty(); })) return;

  // Slots that share a column (possible only for hand-made channels) share a
  // delta buffer.
  std::array<std::size_t, 4> owner{};
  for (std::size_t j = 0; j < 4; ++j) {
    owner[j] = j;
    for (std::size_t i = 0; i < j; ++i) {
      if (slots[i].col.data() == slots[j].col.data()) {
        owner[j] = owner[i];
        break;
      }
    }
    if (owner[j] == j) delta[j].assign(slots[j].col.size(), 0.0);
  }

  std::array<double, 4> fwd_sum{};
  std::array<double, 4> rev_sum{};
  for (std::size_t j = 0; j < 4; ++j) {
    const Slot& sl = slots[j];
    for (std::size_t x = sl.first(); x < sl.last_plus_one(); ++x) {
      fwd_sum[j] += sl.col[x];
      rev_sum[j] += sl.col[sl.partner(x)];
    }
  }
  auto& fluxes = work.fluxes;
  fluxes.clear();
  double gross_peak = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    double fwd_rest = 1.0;
    double rev_rest = 1.0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i == j) continue;
      fwd_rest *= fwd_sum[i];
      rev_rest *= rev_sum[i];
    }
    const Slot& sl = slots[j];
    auto& d = delta[owner[j]];
    for (std::size_t x = sl.first(); x < sl.last_plus_one(); ++x) {
      const double forward = sl.col[x] * fwd_rest;
      const double reverse = sl.col[sl.partner(x)] * rev_rest;
      gross_peak = std::max({gross_peak, forward, reverse});
      const double flux = forward - reverse;
      if (flux == 0.0) continue;
      fluxes.push_back({j, x, flux});
      d[x] -= flux;
      d[sl.partner(x)] += flux;
    }
  }
  if (fluxes.empty()) return;
  double flux_total = 0.0;
  double flux_peak = 0.0;
  for (const auto& fl : fluxes) {
    if (fl.slot == 0) flux_total += fl.value;
    flux_peak = std::max(flux_peak, std::abs(fl.value));
  }
  // A channel already balanced to rounding has no meaningful direction. A line
  // search along the noise would take huge steps and amplify the last-bit
  // mismatch between the slots' totals into a quanta leak.
  if (flux_peak <= 1e-13 * gross_peak) return;
  // Orders whose flux is negligible next to the largest one cannot move the
  // slope; leaving them out of the log sum saves most of its cost.
  std::erase_if(fluxes, [&](const Flux& fl) { return std::abs(fl.value) < 1e-30 * flux_peak; });

  // Exact line search for the Stirling entropy along the flux f. Its slope
  // -sum_e f_e ln p_e(t) equals sum over slots and orders of
  // Phi_j(x) ln[p_x(t) / p_partner(t)], and since every slot carries the same
  // total flux the log ratios can be centred per slot. Near balance the slope
  // is second order in the imbalance, so the centred form is what keeps it
  // above rounding noise. The slope falls monotonically to -inf as an entry
  // reaches zero.
  double t_max = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < 4; ++j) {
    if (owner[j] != j) continue;
    for (std::size_t x = 0; x < delta[j].size(); ++x) {
      if (delta[j][x] < 0.0) t_max = std::min(t_max, slots[j].col[x] / -delta[j][x]);
    }
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) return;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto value_at = [&](std::size_t j, std::size_t x, double t) {
    return slots[j].col[x] + t * delta[owner[j]][x];
  };
  auto slope = [&](double t) {
    std::array<double, 4> centre{};
    for (std::size_t j = 0; j < 4; ++j) {
      const Slot& sl = slots[j];
      double fwd = 0.0;
      double rev = 0.0;
      for (std::size_t x = sl.first(); x < sl.last_plus_one(); ++x) {
        fwd += value_at(j, x, t);
        rev += value_at(j, sl.partner(x), t);
      }
      centre[j] = fwd > 0.0 && rev > 0.0 ? fwd / rev : 1.0;
    }
    double g = 0.0;
    for (const auto& fl : fluxes) {
      const double u = value_at(fl.slot, fl.x, t);
      const double v = value_at(fl.slot, slots[fl.slot].partner(fl.x), t);
      if (u <= 0.0 || v <= 0.0) {
        if (u <= 0.0 && v <= 0.0) continue;
        return (u <= 0.0) == (fl.value < 0.0) ? kInf : -kInf;
      }
      g += fl.value * std::log((u / v) / centre[fl.slot]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < 4; ++j) total += std::log(centre[j]);
    return g + flux_total * total;
  };
  auto curvature = [&](double t) {
    double dg = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (owner[j] != j) continue;
      for (std::size_t x = 0; x < delta[j].size(); ++x) {
        const double f = delta[j][x];
        if (f != 0.0) dg -= f * f / value_at(j, x, t);
      }
    }
    return dg;
  };
  const double g0 = slope(0.0);
  if (!(g0 > 0.0)) return;
  // Safeguarded Newton on the slope, bracketed by [lo, hi], from the
  // quadratic model at t = 0 when that is available.
  double lo = 0.0;
  double hi = t_max;
  double t = 0.5 * t_max;
  if (std::isfinite(g0)) {
    const double guess = g0 / -curvature(0.0);
    if (guess > 0.0 && guess < t_max) t = guess;
  }
  for (int it = 0; it < 100; ++it) {
    const double g = slope(t);
    if (g == 0.0) break;
    if (g > 0.0) lo = t; else hi = t;
    const double dg = std::isfinite(g) ? curvature(t) : 0.0;
    double next = dg < 0.0 ? t - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - t) <= 1e-6 * t;
    t = next;
    if (done) break;
  }
  const double step = rate * t;
  if (!(step > 0.0)) return;
  for (std::size_t j = 0; j < 4; ++j) {
    if (owner[j] != j) continue;
    for (std::size_t x = 0; x < delta[j].size(); ++x) {
      slots[j].col[x] = std::max(0.0, slots[j].col[x] + step * delta[j][x]);
    }
  }
}

SweepReport report(const CondensatePopulation& pop1, const CondensatePopulation& pop2,
                   std::span<const CollisionChannel> channels, std::size_t sweep) {
  double drift = 0.0;
  for (const auto* pop : {&pop1, &pop2}) {
    for (std::size_t bin = 0; bin < pop->bins(); ++bin) {
      drift = std::max(drift, std::abs(pop->packets(bin) - pop->mode_count(bin)) /
                                  std::max(1.0, pop->mode_count(bin)));
    }
  }
  return {sweep, max_residual(pop1, pop2, channels),
          stirling_entropy(pop1) + stirling_entropy(pop2),
          total_quanta(pop1).total + total_quanta(pop2).total, drift};
}

}  // namespace

RelaxResult relax_until(CondensatePopulation pop1, CondensatePopulation pop2,
                        std::span<const CollisionChannel> channels, const RelaxOptions& options,
                        const std::function<void(const SweepReport&)>& observer) {
  if (!(options.rate > 0.0 && options.rate <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "relaxation rate must lie in (0, 1]");
  }
  for (const auto& ch : channels) validate_channel(pop1, pop2, ch);
  RelaxResult result{std::move(pop1), std::move(pop2), {}, false};
  auto record = [&](std::size_t sweep) {
    result.sweeps.push_back(report(result.pop1, result.pop2, channels, sweep));
    if (observer) observer(result.sweeps.back());
    return result.sweeps.back().max_residual <= options.tolerance;
  };
  result.converged = record(0);

  std::vector<std::size_t> order(channels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed);
  Workspace work;
  for (std::size_t sweep = 1; sweep <= options.steps && !result.converged; ++sweep) {
    if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      relax_channel(result.pop1, result.pop2, channels[idx], options.rate, work);
    }
    result.converged = record(sweep);
  }
  return result;
}

RelaxResult relax(CondensatePopulation pop1, CondensatePopulation pop2,
                  std::span<const CollisionChannel> channels, const RelaxOptions& options,
                  const std::function<void(const SweepReport&)>& observer) {
  auto result = relax_until(std::move(pop1), std::move(pop2), channels, options, observer);
  if (!result.converged) {
    std::ostringstream os;
    os << "max residual " << result.sweeps.back().max_residual << " above " << options.tolerance
       << " after " << options.steps << " sweeps";
    fail(ErrorCode::kNoConvergence, os.str());
  }
  return result;
}

}  // namespace idstat::balance
