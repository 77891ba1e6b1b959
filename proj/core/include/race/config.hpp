#pragma once

/// Run configuration shared by the command-line tools: a plain `key = value`
/// file whose canonical form is hashed into every artifact.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "race/arith.hpp"
#include "race/lzeros.hpp"

namespace race {

struct RunConfig {
  std::filesystem::path zero_dir;  // empty: RACE_ZERO_DIR or ./zeros
  std::filesystem::path output_dir = ".";
  double height = 0;  // zero height T; 0 selects height_for(q)
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 20240917;
  double c1 = 0.1;             // decay-envelope validity: r <= c1 log q
  double theorem_c = 5.0;      // O-constant for the asymptotic envelopes
  double slack_log = 2.0;      // zero-count slack: slack_log log(q* T) + slack_const
  double slack_const = 5.0;
  double correlation_alpha = 1.5;  // max |corr| <= alpha / log q
  double t13_epsilon = 0.2;
  std::size_t grid_intervals = 4096;
  double scan_step = 0.05;
  double abs_error = 1e-8;

  /// Explicit height, or clamp(round(12000 / q), 100, 1000).
  double height_for(Int q) const;
  std::filesystem::path zero_directory() const;
  lzeros::LzerosConfig lzeros() const;

  /// Sorted `key = value` lines with round-trip number formatting.
  std::string canonical() const;
  /// FNV-1a of canonical().
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

/// Sets one key; throws parse-error for unknown keys or malformed values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Blank lines and `#` comments are ignored. Errors carry the line number.
RunConfig parse_config(std::istream& in, const std::string& source_name = "config");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace race
