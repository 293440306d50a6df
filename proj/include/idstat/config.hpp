#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace idstat {

enum class OutputFormat { kCsv, kJson };

/// Units and run settings shared by all CLI subcommands.
struct Config {
  double hbar = 1.0;
  double k_boltzmann = 1.0;
  double h_planck = 1.0;
  double c_light = 1.0;
  OutputFormat output_format = OutputFormat::kCsv;
  std::uint64_t seed = 0;
};

/// Parses a JSON object with any of the Config keys. Missing keys keep their
/// defaults; unknown keys, wrong types and nonpositive units are rejected.
/// Throws Error(kParseError) whose message starts with "<origin>:<line>:".
Config parse_config(std::string_view text, const std::string& origin = "<config>");

/// Reads and parses a config file. A missing or unreadable file is a
/// kParseError too.
Config load_config(const std::filesystem::path& path);

}  // namespace idstat
