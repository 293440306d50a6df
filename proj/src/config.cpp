#include "idstat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "idstat/error.hpp"

namespace idstat {

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" in the text; 1 if it cannot be found.
std::size_t line_of_key(std::string_view text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string_view::npos ? 1 : line_of_offset(text, pos);
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << what;
  throw Error(ErrorCode::kParseError, os.str());
}

}  // namespace

Config parse_config(std::string_view text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    parse_fail(origin, line_of_offset(text, offset), "invalid JSON");
  }
  if (!doc.is_object()) parse_fail(origin, 1, "config must be a JSON object");

  Config cfg;
  for (const auto& [key, value] : doc.items()) {
    const std::size_t line = line_of_key(text, key);
    auto positive_real = [&](double& slot) {
      if (!value.is_number()) parse_fail(origin, line, "\"" + key + "\" must be a number");
      const double v = value.get<double>();
      if (!(v > 0.0) || !std::isfinite(v)) {
        parse_fail(origin, line, "\"" + key + "\" must be positive");
      }
      slot = v;
    };
    if (key == "hbar") {
      positive_real(cfg.hbar);
    } else if (key == "k_boltzmann") {
      positive_real(cfg.k_boltzmann);
    } else if (key == "h_planck") {
      positive_real(cfg.h_planck);
    } else if (key == "c_light") {
      positive_real(cfg.c_light);
    } else if (key == "output_format") {
      if (value == "csv") {
        cfg.output_format = OutputFormat::kCsv;
      } else if (value == "json") {
        cfg.output_format = OutputFormat::kJson;
      } else {
        parse_fail(origin, line, "\"output_format\" must be \"csv\" or \"json\"");
      }
    } else if (key == "seed") {
      if (!value.is_number_integer() || (value.is_number_integer() && !value.is_number_unsigned() &&
                                         value.get<std::int64_t>() < 0)) {
        parse_fail(origin, line, "\"seed\" must be a nonnegative integer");
      }
      cfg.seed = value.get<std::uint64_t>();
    } else {
      parse_fail(origin, line, "unknown key \"" + key + "\"");
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, path.string() + ":0: cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

}  // namespace idstat
