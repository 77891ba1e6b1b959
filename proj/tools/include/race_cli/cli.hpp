#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "race/config.hpp"

namespace race::cli {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2, exit_data = 3 };

/// Runs the `race` command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Deterministic property-suite report. Returns exit_check_failed when any
/// check fails.
int verify_paper(const RunConfig& config, std::ostream& out);

/// Maps a library error category to the command-line exit code.
int exit_code_for(const std::exception& error);

}  // namespace race::cli
