#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "race/arith.hpp"
#include "race/config.hpp"
#include "race/lzeros.hpp"

namespace race::cli {

/// "3,1" -> {3, 1}. Throws invalid-argument on malformed lists.
std::vector<Int> parse_classes(const std::string& text);
std::string join_classes(const std::vector<Int>& classes, char sep = ',');

/// `# race <command> seed=<seed> config=<hash> ...` line for CSV artifacts.
std::string artifact_comment(const RunConfig& config, const std::string& command, const std::string& extra = "");

/// Relative paths are placed under the configured output directory.
std::filesystem::path output_path(const RunConfig& config, const std::filesystem::path& path);

/// Output file opened for writing, or the fallback stream when path is empty.
class Sink {
 public:
  Sink(const RunConfig& config, const std::string& path, std::ostream& fallback);
  std::ostream& stream() { return file_ ? *file_ : *fallback_; }
  bool to_file() const { return static_cast<bool>(file_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* fallback_;
  std::filesystem::path path_;
};

lzeros::ZeroStore make_store(const RunConfig& config);

// Subcommand bodies.
int cmd_zeros_compute(const RunConfig& config, Int q, std::ostream& out);
int cmd_zeros_import(const RunConfig& config, const std::vector<std::string>& files, std::ostream& out);
int cmd_zeros_verify(const RunConfig& config, Int q, double height, std::ostream& out);
int cmd_covariance(const RunConfig& config, const RaceSpec& spec, const std::string& csv, std::ostream& out);
int cmd_density(const RunConfig& config, const std::string& method, const RaceSpec& spec, const std::string& csv,
                const std::string& svg, std::ostream& out);
int cmd_race(const RunConfig& config, const RaceSpec& spec, Int x_max, std::size_t intervals, bool exact,
             const std::string& csv, const std::string& svg, std::ostream& out);
int cmd_report(const RunConfig& config, const RaceSpec& spec, Int x_max, std::ostream& out);

}  // namespace race::cli
