#include "idstat/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"

#include "idstat/balance.hpp"
#include "idstat/config.hpp"
#include "idstat/counting.hpp"
#include "idstat/distributions.hpp"
#include "idstat/error.hpp"
#include "idstat/selftest.hpp"
#include "idstat/spinstat.hpp"
#include "idstat/symmetry.hpp"
#include "idstat/wavepacket.hpp"

namespace idstat::cli {

namespace {

using json = nlohmann::json;

std::string real(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

// A rectangular result printed as CSV (header row, 17 significant digits) or
// as {"columns": [...], "rows": [[...], ...]}.
class Table {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row) { rows_.push_back(std::move(row)); }

  void write_csv(std::ostream& out) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << "\n";
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ",";
        std::visit([&](const auto& v) { out << text(v); }, row[i]);
      }
      out << "\n";
    }
  }

  json to_json() const {
    json rows = json::array();
    for (const auto& row : rows_) {
      json r = json::array();
      for (const auto& cell : row) std::visit([&](const auto& v) { r.push_back(v); }, cell);
      rows.push_back(std::move(r));
    }
    return {{"columns", columns_}, {"rows", std::move(rows)}};
  }

 private:
  static std::string text(double v) { return real(v); }
  static std::string text(long long v) { return std::to_string(v); }
  static std::string text(const std::string& v) { return v; }

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

void write_json(std::ostream& out, const json& doc) { out << doc.dump(2) << "\n"; }

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

// "1/2", "3/2", "0.5", "2" -> HalfInt.
HalfInt parse_spin(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    int num = 0;
    int den = 0;
    const auto* b = text.data();
    const auto r1 = std::from_chars(b, b + slash, num);
    const auto r2 = std::from_chars(b + slash + 1, b + text.size(), den);
    if (r1.ec != std::errc() || r1.ptr != b + slash || r2.ec != std::errc() ||
        r2.ptr != b + text.size() || (den != 1 && den != 2)) {
      throw Error(ErrorCode::kInvalidArgument, "spin must look like 3/2, 1 or 0.5: " + text);
    }
    return HalfInt::from_twice(den == 1 ? 2 * num : num);
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "spin must look like 3/2, 1 or 0.5: " + text);
  }
  return HalfInt::from_double(v);
}

struct Globals {
  std::string config_path;
  std::string format;
  Config config;
  std::optional<std::uint64_t> env_seed;

  OutputFormat output() const {
    if (format == "json") return OutputFormat::kJson;
    if (format == "csv") return OutputFormat::kCsv;
    return config.output_format;
  }
  // --seed beats IDSTAT_SEED beats the config file.
  std::uint64_t seed(const std::optional<std::uint64_t>& flag) const {
    if (flag) return *flag;
    if (env_seed) return *env_seed;
    return config.seed;
  }
};

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("IDSTAT_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  const auto r = std::from_chars(raw, end, v);
  if (r.ec != std::errc() || r.ptr != end) {
    throw Error(ErrorCode::kParseError, std::string("IDSTAT_SEED is not an unsigned integer: ") + raw);
  }
  return v;
}

// ---- evolve ---------------------------------------------------------------

struct EvolveArgs {
  double mass = 1.0, sigma = 1.0, x0 = 0.0, t0 = 0.0, k0 = 0.0;
  double t_start = 0.0, t_end = 1.0;
  std::size_t times = 5;
  std::optional<double> x_min, x_max;
  std::size_t points = 256;
};

int do_evolve(const EvolveArgs& a, const Globals& g, std::ostream& out) {
  const wavepacket::WavePacket packet({a.mass, a.sigma, a.x0, a.t0, a.k0, g.config.hbar});
  if (a.times == 0) throw Error(ErrorCode::kInvalidArgument, "--times must be at least 1");
  std::vector<double> ts(a.times);
  for (std::size_t i = 0; i < a.times; ++i) {
    ts[i] = a.times == 1 ? a.t_start
                         : a.t_start + (a.t_end - a.t_start) * static_cast<double>(i) /
                                           static_cast<double>(a.times - 1);
  }
  double lo = a.x_min.value_or(std::numeric_limits<double>::infinity());
  double hi = a.x_max.value_or(-std::numeric_limits<double>::infinity());
  if (!a.x_min || !a.x_max) {
    // Default window: eight density widths around every sampled centre.
    for (double t : ts) {
      const double c = wavepacket::center(packet, t);
      const double w = wavepacket::density_width(packet, t);
      if (!a.x_min) lo = std::min(lo, c - 8.0 * w);
      if (!a.x_max) hi = std::max(hi, c + 8.0 * w);
    }
  }
  const wavepacket::Grid grid(lo, hi, a.points);
  Table table({"t", "x", "re", "im", "density"});
  for (double t : ts) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Complex psi = wavepacket::evaluate(packet, grid[i], t);
      table.add({t, grid[i], psi.real(), psi.imag(), std::norm(psi)});
    }
  }
  if (g.output() == OutputFormat::kJson) {
    write_json(out, table.to_json());
  } else {
    table.write_csv(out);
  }
  return kExitOk;
}

// ---- symmetrize -----------------------------------------------------------

int do_symmetrize(const std::string& input, bool anti, std::ostream& out) {
  std::string text;
  if (input == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    text = buf.str();
  } else {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw Error(ErrorCode::kParseError, input + ": cannot open state file");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("state is not valid JSON: ") + e.what());
  }
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kParseError, "state: " + what); };
  if (!doc.is_object()) bad("top level must be an object");
  if (doc.contains("schema") && doc["schema"] != 1) bad("unsupported schema version");
  if (!doc.contains("n") || !doc["n"].is_number_unsigned()) bad("\"n\" must be a nonnegative integer");
  if (!doc.contains("terms") || !doc["terms"].is_array()) bad("\"terms\" must be an array");
  const auto n = doc["n"].get<std::size_t>();

  // Mode labels are strings or integers; each distinct label gets one id.
  std::vector<json> labels;
  std::map<std::string, ModeId> ids;
  std::vector<symmetry::ProductTerm> terms;
  for (const auto& t : doc["terms"]) {
    if (!t.is_object() || !t.contains("coeff") || !t.contains("modes")) {
      bad("each term needs \"coeff\" and \"modes\"");
    }
    const auto& c = t["coeff"];
    Complex coeff;
    if (c.is_number()) {
      coeff = c.get<double>();
    } else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number()) {
      coeff = {c[0].get<double>(), c[1].get<double>()};
    } else {
      bad("\"coeff\" must be [re, im] or a number");
    }
    if (!t["modes"].is_array()) bad("\"modes\" must be an array");
    std::vector<ModeId> modes;
    for (const auto& m : t["modes"]) {
      if (!m.is_string() && !m.is_number_integer()) bad("mode labels must be strings or integers");
      const std::string key = m.dump();
      auto it = ids.find(key);
      if (it == ids.end()) {
        it = ids.emplace(key, ModeId{static_cast<std::uint32_t>(labels.size())}).first;
        labels.push_back(m);
      }
      modes.push_back(it->second);
    }
    terms.push_back({coeff, std::move(modes)});
  }
  const symmetry::NParticleState state(n, std::move(terms));
  const auto result = anti ? symmetry::antisymmetrize(state) : symmetry::symmetrize(state);

  json out_terms = json::array();
  for (const auto& t : result.terms()) {
    json modes = json::array();
    for (ModeId m : t.modes) modes.push_back(labels[m.index]);
    out_terms.push_back({{"coeff", complex_json(t.coeff)}, {"modes", std::move(modes)}});
  }
  write_json(out, {{"schema", 1}, {"n", n}, {"terms", std::move(out_terms)}});
  return kExitOk;
}

// ---- exchange-phase -------------------------------------------------------

int do_exchange_phase(const std::string& spin_text, const std::string& m_text, double chi_a,
                      double chi_b, std::ostream& out) {
  const HalfInt s = parse_spin(spin_text);
  const HalfInt m = m_text.empty() ? s : parse_spin(m_text);
  if (s.twice() < 0 || m.twice() > s.twice() || m.twice() < -s.twice() ||
      (s.twice() - m.twice()) % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "need s >= 0 and m in {-s, -s+1, ..., s}");
  }
  const auto phase = spinstat::exchange_phase(m, chi_a, chi_b);
  write_json(out, {{"spin", s.value()},
                   {"m", m.value()},
                   {"chi_a", chi_a},
                   {"chi_b", chi_b},
                   {"F", complex_json(phase.total)},
                   {"first", complex_json(phase.first)},
                   {"second", complex_json(phase.second)}});
  return kExitOk;
}

// ---- count ----------------------------------------------------------------

counting::Statistics parse_counting_stat(const std::string& s) {
  if (s == "bose") return counting::Statistics::kBose;
  if (s == "fermi") return counting::Statistics::kFermi;
  return counting::Statistics::kBoltzmann;
}

int do_count(std::uint64_t n, std::uint64_t g, const std::string& stat_name, bool oracle,
             bool entropy, const Globals& globals, std::ostream& out) {
  const counting::OccupancyRegion region{n, g};
  const auto stat = parse_counting_stat(stat_name);
  std::string count;
  if (oracle) {
    count = counting::oracle_count(region, stat).str();
  } else if (stat == counting::Statistics::kBose) {
    count = counting::bose_w(region).str();
  } else if (stat == counting::Statistics::kFermi) {
    count = counting::fermi_w(region).str();
  } else {
    count = counting::boltzmann_w(region).str();
  }
  std::optional<double> s;
  if (entropy) s = globals.config.k_boltzmann * counting::log_w(region, stat);
  if (globals.output() == OutputFormat::kJson) {
    json doc = {{"n", n}, {"g", g}, {"stat", stat_name}, {"count", count}};
    if (s) doc["entropy"] = *s;
    write_json(out, doc);
  } else {
    out << count << "\n";
    if (s) out << real(*s) << "\n";
  }
  return kExitOk;
}

// ---- distribute -----------------------------------------------------------

struct DistributeArgs {
  std::string stat = "bose";
  double temperature = 1.0;
  double n = 1.0;
  double volume = 1.0;
  double mass = 1.0;
  std::size_t bins = 64;
  double p_max = 10.0;
  std::string via = "closed";
};

int do_distribute(const DistributeArgs& a, const Globals& g, std::ostream& out) {
  using namespace distributions;
  GasSpec spec;
  spec.volume = a.volume;
  spec.temperature = a.temperature;
  spec.mass = a.mass;
  spec.c = g.config.c_light;
  spec.h = g.config.h_planck;
  spec.k = g.config.k_boltzmann;
  spec.species = a.stat == "fermi" ? Species::kFermi : Species::kBose;
  const MomentumGrid grid(0.0, a.p_max, a.bins);
  const Spectrum spectrum = make_spectrum(spec, grid);
  const double mu = solve_mu(a.n, spec, spectrum);
  std::vector<double> per_mode(spectrum.size());
  double temperature = a.temperature;
  double chem = mu;
  if (a.via == "maxent") {
    // Same N and E as the closed-form gas at T; the multipliers then give
    // back T and mu.
    const auto r = max_entropy_occupancies(spec, spectrum, a.n, total_energy(spectrum, mu, spec));
    for (std::size_t i = 0; i < spectrum.size(); ++i) per_mode[i] = r.occupancies[i] / spectrum.modes[i];
    temperature = r.temperature;
    chem = r.mu;
  } else {
    for (std::size_t i = 0; i < spectrum.size(); ++i) per_mode[i] = occupancy(spectrum.energies[i], mu, spec);
  }
  Table table({"p", "eps", "g_p", "occupancy"});
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    table.add({spectrum.momenta[i], spectrum.energies[i], spectrum.modes[i], per_mode[i]});
  }
  if (g.output() == OutputFormat::kJson) {
    json doc = table.to_json();
    doc["mu"] = chem;
    doc["temperature"] = temperature;
    doc["via"] = a.via;
    write_json(out, doc);
  } else {
    table.write_csv(out);
  }
  return kExitOk;
}

// ---- balance --------------------------------------------------------------

struct BalanceArgs {
  std::size_t bins = 16;
  std::size_t s_max = 64;
  double beta = 1.0;
  double mu = 0.0;
  std::size_t steps = 1000;
  std::optional<std::uint64_t> seed;
  double de = 0.5;
  std::size_t moves = 2000;
  double rate = 0.1;
  double tolerance = 1e-10;
  int kind = 1;
};

int do_balance(const BalanceArgs& a, const Globals& g, std::ostream& out) {
  using namespace balance;
  const std::uint64_t seed = g.seed(a.seed);
  const auto energies = uniform_energies(a.bins, a.de, a.de);
  const std::vector<double> widths(a.bins, a.de);
  // One mode per unit energy.
  const std::vector<double> modes(a.bins, a.de);
  const double c = a.beta * a.mu;
  auto pop1 = stationary_population(1, Species::kBose, energies, widths, modes, a.beta, c, a.s_max);
  auto pop2 = stationary_population(2, Species::kBose, energies, widths, modes, a.beta, c, a.s_max);
  const auto channels = generate_channels(pop1, pop2, 1);
  perturb(pop1, pop2, channels, a.moves, seed);

  RelaxOptions options;
  options.steps = a.steps;
  options.seed = seed;
  options.rate = a.rate;
  options.tolerance = a.tolerance;
  const bool as_json = g.output() == OutputFormat::kJson;
  Table sweeps({"sweep", "max_residual", "entropy", "total_quanta"});
  if (!as_json) out << "sweep,max_residual,entropy,total_quanta\n";
  auto result = relax_until(std::move(pop1), std::move(pop2), channels, options,
                            [&](const SweepReport& r) {
                              if (as_json) {
                                sweeps.add({static_cast<long long>(r.sweep), r.max_residual,
                                            r.entropy, r.total_quanta});
                              } else {
                                out << r.sweep << "," << real(r.max_residual) << ","
                                    << real(r.entropy) << "," << real(r.total_quanta) << "\n";
                              }
                            });
  const CondensatePopulation& shown = a.kind == 2 ? result.pop2 : result.pop1;
  Table final_table({"eps", "s", "p"});
  for (std::size_t bin = 0; bin < shown.bins(); ++bin) {
    for (std::size_t s = 0; s <= shown.s_max(); ++s) {
      final_table.add({shown.energy(bin), static_cast<long long>(s), shown.at(s, bin)});
    }
  }
  if (as_json) {
    write_json(out, {{"seed", seed},
                     {"converged", result.converged},
                     {"sweeps", sweeps.to_json()},
                     {"kind", a.kind},
                     {"table", final_table.to_json()}});
  } else {
    out << "\n";
    final_table.write_csv(out);
  }
  if (!result.converged) {
    std::ostringstream os;
    os << "max residual " << real(result.sweeps.back().max_residual) << " above "
       << real(a.tolerance) << " after " << a.steps << " sweeps";
    throw Error(ErrorCode::kNoConvergence, os.str());
  }
  return kExitOk;
}

// ---- selftest -------------------------------------------------------------

int do_selftest(std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_selftest()) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) out << ": " << r.detail;
    out << "\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitSelftestFailed;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParseError:
      return kExitUsage;
    case ErrorCode::kNoConvergence:
      return kExitNoConvergence;
    default:
      return kExitDomain;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identical-particle statistics toolkit", "idstat"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--config", globals.config_path, "JSON file with units, output_format and seed")
      ->check(CLI::ExistingFile);
  app.add_option("--format", globals.format, "Output format (overrides the config)")
      ->check(CLI::IsMember({"csv", "json"}));

  EvolveArgs ev;
  auto* evolve = app.add_subcommand("evolve", "Sample the free Gaussian packet on a grid");
  evolve->add_option("--mass", ev.mass, "Particle mass m0")->capture_default_str();
  evolve->add_option("--sigma", ev.sigma, "Width sigma at the minimum-width time")->capture_default_str();
  evolve->add_option("--x0", ev.x0, "Centre at t0")->capture_default_str();
  evolve->add_option("--t0", ev.t0, "Minimum-width time")->capture_default_str();
  evolve->add_option("--k0", ev.k0, "Centre wavenumber")->capture_default_str();
  evolve->add_option("--t-start", ev.t_start, "First sampled time")->capture_default_str();
  evolve->add_option("--t-end", ev.t_end, "Last sampled time")->capture_default_str();
  evolve->add_option("--times", ev.times, "Number of sampled times")->capture_default_str();
  evolve->add_option("--xmin", ev.x_min, "Grid start (default: 8 widths left of every centre)");
  evolve->add_option("--xmax", ev.x_max, "Grid end (default: 8 widths right of every centre)");
  evolve->add_option("--points", ev.points, "Grid points")->capture_default_str();

  std::string sym_input = "-";
  bool sym_anti = false;
  auto* symmetrize = app.add_subcommand("symmetrize", "Apply the (anti)symmetrizer to a JSON state");
  symmetrize->add_option("--input", sym_input, "State file, - for standard input")->capture_default_str();
  symmetrize->add_flag("--anti", sym_anti, "Use the antisymmetrizer");

  std::string spin_text;
  std::string m_text;
  double chi_a = 0.0;
  double chi_b = 0.0;
  auto* exchange = app.add_subcommand("exchange-phase", "Exchange phase F from one-sense rotations");
  exchange->add_option("--spin", spin_text, "Spin s, e.g. 1/2 or 1.5")->required();
  exchange->add_option("--m", m_text, "Spin component (default s)");
  exchange->add_option("--chi-a", chi_a, "Azimuth of the first packet")->required();
  exchange->add_option("--chi-b", chi_b, "Azimuth of the second packet")->required();

  std::uint64_t count_n = 0;
  std::uint64_t count_g = 1;
  std::string count_stat;
  bool count_oracle = false;
  bool count_entropy = false;
  auto* count = app.add_subcommand("count", "Number of states of n particles in g cells");
  count->add_option("--n", count_n, "Particles")->required();
  count->add_option("--g", count_g, "Quantum cells")->required();
  count->add_option("--stat", count_stat, "bose, fermi or boltzmann")
      ->required()
      ->check(CLI::IsMember({"bose", "fermi", "boltzmann"}));
  count->add_flag("--oracle", count_oracle, "Count by explicit enumeration");
  count->add_flag("--entropy", count_entropy, "Also print k ln w");

  DistributeArgs dist;
  auto* distribute = app.add_subcommand("distribute", "Bose/Fermi occupancies on a momentum grid");
  distribute->add_option("--stat", dist.stat, "bose or fermi")
      ->check(CLI::IsMember({"bose", "fermi"}))
      ->capture_default_str();
  distribute->add_option("--T", dist.temperature, "Temperature")->capture_default_str();
  distribute->add_option("--N", dist.n, "Particle number")->capture_default_str();
  distribute->add_option("--V", dist.volume, "Volume")->capture_default_str();
  distribute->add_option("--mass", dist.mass, "Rest mass")->capture_default_str();
  distribute->add_option("--bins", dist.bins, "Momentum bins")->capture_default_str();
  distribute->add_option("--pmax", dist.p_max, "Largest momentum")->capture_default_str();
  distribute->add_option("--via", dist.via, "closed or maxent")
      ->check(CLI::IsMember({"closed", "maxent"}))
      ->capture_default_str();

  BalanceArgs bal;
  auto* balance_cmd = app.add_subcommand("balance", "Relax two packet populations to detailed balance");
  balance_cmd->add_option("--bins", bal.bins, "Energy bins")->capture_default_str();
  balance_cmd->add_option("--smax", bal.s_max, "Largest condensation order")->capture_default_str();
  balance_cmd->add_option("--beta", bal.beta, "b = 1/kT of the starting state")->capture_default_str();
  balance_cmd->add_option("--mu", bal.mu, "Chemical potential of the starting state")->capture_default_str();
  balance_cmd->add_option("--steps", bal.steps, "Maximum number of sweeps")->capture_default_str();
  balance_cmd->add_option("--seed", bal.seed, "Seed (overrides IDSTAT_SEED and the config)");
  balance_cmd->add_option("--de", bal.de, "Bin width and lowest energy")->capture_default_str();
  balance_cmd->add_option("--moves", bal.moves, "Random reactions applied to the start")->capture_default_str();
  balance_cmd->add_option("--rate", bal.rate, "Fraction of the optimal step per channel")->capture_default_str();
  balance_cmd->add_option("--tol", bal.tolerance, "Target max residual")->capture_default_str();
  balance_cmd->add_option("--kind", bal.kind, "Population shown in the final table")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle cross-checks");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("idstat");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (!globals.config_path.empty()) globals.config = load_config(globals.config_path);
    globals.env_seed = seed_from_env();
    if (*evolve) return do_evolve(ev, globals, out);
    if (*symmetrize) return do_symmetrize(sym_input, sym_anti, out);
    if (*exchange) return do_exchange_phase(spin_text, m_text, chi_a, chi_b, out);
    if (*count) {
      return do_count(count_n, count_g, count_stat, count_oracle, count_entropy, globals, out);
    }
    if (*distribute) return do_distribute(dist, globals, out);
    if (*balance_cmd) return do_balance(bal, globals, out);
    if (*selftest) return do_selftest(out);
  } catch (const Error& e) {
    err << "error: " << code_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kExitUsage;
}

}  // namespace idstat::cli
