#include "race_cli/cli.hpp"

#include <CLI11.hpp>

#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "common.hpp"
#include "race/error.hpp"

namespace race::cli {

int exit_code_for(const std::exception& error) {
  const auto* e = dynamic_cast<const Error*>(&error);
  if (!e) return exit_data;
  switch (e->code()) {
    case Errc::invalid_modulus:
    case Errc::invalid_class:
    case Errc::invalid_spec:
    case Errc::invalid_pair:
    case Errc::invalid_argument:
    case Errc::q_too_small:
    case Errc::invalid_scale:
    case Errc::invalid_comparison:
      return exit_usage;
    default:
      return exit_data;
  }
}

namespace {

struct GlobalOptions {
  std::string config_file;
  std::string zero_dir;
  std::string output_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> height;
  std::optional<std::size_t> samples;
};

// Config file first, then --set pairs, then dedicated flags.
RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig config = g.config_file.empty() ? RunConfig{} : load_config(g.config_file);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(Errc::invalid_argument, "--set expects key=value, got '" + kv + "'");
    // A bad --set is a usage error; a bad config file stays a data error.
    try {
      set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(Errc::invalid_argument, "--set " + kv + ": " + e.what());
    }
  }
  if (!g.zero_dir.empty()) config.zero_dir = g.zero_dir;
  if (!g.output_dir.empty()) config.output_dir = g.output_dir;
  if (g.seed) config.seed = *g.seed;
  if (g.height) config.height = *g.height;
  if (g.samples) config.samples = *g.samples;
  return config;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prime number races: zeros of Dirichlet L-functions, limiting distributions and densities", "race"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--zero-dir", g.zero_dir, "zero-data directory (default $RACE_ZERO_DIR or ./zeros)");
  app.add_option("--output-dir", g.output_dir, "directory for relative output paths");
  app.add_option("--set", g.overrides, "override a configuration key (key=value)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--height", g.height, "zero height T")->check(CLI::PositiveNumber);
  app.add_option("--samples,--n", g.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);

  std::function<int(const RunConfig&)> action;

  auto* zeros = app.add_subcommand("zeros", "compute, import or verify zero files");
  zeros->require_subcommand(1);
  zeros->fallthrough();
  Int zq = 0;
  auto* zc = zeros->add_subcommand("compute", "compute zeros for every nontrivial character mod q");
  zc->add_option("--q", zq, "modulus")->required();
  zc->callback([&] { action = [&](const RunConfig& c) { return cmd_zeros_compute(c, zq, out); }; });
  std::vector<std::string> import_files;
  auto* zi = zeros->add_subcommand("import", "validate zero files and copy them into the zero directory");
  zi->add_option("files", import_files, "zero CSV files")->required()->check(CLI::ExistingFile);
  zi->callback([&] { action = [&](const RunConfig& c) { return cmd_zeros_import(c, import_files, out); }; });
  auto* zv = zeros->add_subcommand("verify", "re-read zero files for q and rerun the zero-count check");
  zv->add_option("--q", zq, "modulus")->required();
  zv->callback([&] {
    action = [&](const RunConfig& c) { return cmd_zeros_verify(c, zq, c.height, out); };
  });

  Int q = 0;
  std::string classes, csv, svg;
  auto add_spec = [&](CLI::App* sub) {
    sub->add_option("--q", q, "modulus")->required();
    sub->add_option("--classes", classes, "comma-separated residue classes, in race order")->required();
  };
  auto spec = [&] { return RaceSpec(q, parse_classes(classes)); };

  auto* cov = app.add_subcommand("covariance", "covariance and correlation matrix of a race");
  add_spec(cov);
  cov->add_option("--csv", csv, "output CSV (default stdout)");
  cov->callback([&] { action = [&](const RunConfig& c) { return cmd_covariance(c, spec(), csv, out); }; });

  std::string method;
  auto* den = app.add_subcommand("density", "logarithmic density of a race");
  den->add_option("method", method, "mc | invert2 | gauss | asymptotic | all")
      ->required()
      ->check(CLI::IsMember({"mc", "invert2", "gauss", "asymptotic", "all"}));
  add_spec(den);
  den->add_option("--csv", csv, "output CSV (default stdout)");
  den->add_option("--svg", svg, "histogram of the Monte Carlo sample");
  den->callback([&] { action = [&](const RunConfig& c) { return cmd_density(c, method, spec(), csv, svg, out); }; });

  double x_max = 1e7;
  std::size_t intervals = 0;
  bool no_exact = false;
  auto* race = app.add_subcommand("race", "race between actual primes up to x_max");
  add_spec(race);
  race->add_option("--xmax", x_max, "sieve limit (at most 1e9)")->check(CLI::Range(100.0, 1e9));
  race->add_option("--intervals", intervals, "log-uniform checkpoint cells (default from config)");
  race->add_flag("--no-exact", no_exact, "skip the exact prime-by-prime density pass");
  race->add_option("--csv", csv, "output CSV (default stdout)");
  race->add_option("--svg", svg, "plot of E-vector trajectories and the running density");
  race->callback([&] {
    action = [&](const RunConfig& c) {
      return cmd_race(c, spec(), static_cast<Int>(x_max), intervals ? intervals : c.grid_intervals, !no_exact, csv,
                      svg, out);
    };
  });

  std::string report_file;
  auto* ver = app.add_subcommand("verify-paper", "run the property suite and print a PASS/FAIL report");
  ver->add_option("--report", report_file, "also write the report to this file");
  ver->callback([&] {
    action = [&](const RunConfig& c) {
      if (report_file.empty()) return verify_paper(c, out);
      Sink sink(c, report_file, out);
      std::ostringstream text;
      const int code = verify_paper(c, text);
      sink.stream() << text.str();
      out << text.str();
      return code;
    };
  });

  double report_xmax = 0;
  auto* rep = app.add_subcommand("report", "summary of one race: moments, densities and (optionally) primes");
  add_spec(rep);
  rep->add_option("--xmax", report_xmax, "also sieve primes up to this limit")->check(CLI::Range(0.0, 1e9));
  rep->callback([&] {
    action = [&](const RunConfig& c) { return cmd_report(c, spec(), static_cast<Int>(report_xmax), out); };
  });

  std::vector<const char*> argv{"race"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  }

  try {
    const RunConfig config = resolve_config(g);
    return action ? action(config) : exit_usage;
  } catch (const std::exception& e) {
    err << "race: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace race::cli
