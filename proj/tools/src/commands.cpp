#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "common.hpp"
#include "race/density.hpp"
#include "race/empirical.hpp"
#include "race/error.hpp"
#include "race/racemodel.hpp"
#include "race/spectrum.hpp"
#include "race_cli/cli.hpp"
#include "race_cli/svg.hpp"

namespace race::cli {

namespace {

using numerics::RandomStream;
using numerics::StreamKind;

std::string fmt_number(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::string spec_label(const RaceSpec& spec) {
  return "q=" + std::to_string(spec.q()) + " classes=" + join_classes(spec.classes());
}

std::string svg_comment(const RunConfig& config, const std::string& command, const RaceSpec& spec) {
  return "<!-- race " + command + " " + spec_label(spec) + " seed=" + std::to_string(config.seed) +
         " config=" + config.hash_hex() + " -->\n";
}

// Inserts a comment after the XML declaration.
void write_svg_with_comment(const std::string& svg_text, const std::string& comment, std::ostream& out) {
  const auto eol = svg_text.find('\n');
  out << svg_text.substr(0, eol + 1) << comment << svg_text.substr(eol + 1);
}

struct AsymptoticRows {
  std::vector<density::DensityEstimate> rows;
  std::vector<std::string> notes;
};

AsymptoticRows asymptotic_rows(const RunConfig& config, const RaceSpec& spec) {
  AsymptoticRows out;
  const int r = static_cast<int>(spec.r());
  density::DensityEstimate base{spec};
  base.seed = config.seed;
  base.rigorous_bound = true;

  const auto t11 = density::delta_asymptotic_t11(spec.q(), r, config.theorem_c);
  auto e = base;
  e.method = density::Method::asymptotic_t11;
  e.value = t11.baseline;
  e.uncertainty = t11.envelope;
  out.rows.push_back(e);
  if (!t11.in_range) out.notes.push_back("asymptotic-T11: r outside 2 <= r <= sqrt(log q)");

  const auto t12 = density::delta_asymptotic_t12(spec.q(), r, config.theorem_c);
  e = base;
  e.method = density::Method::asymptotic_t12;
  e.value = std::exp(t12.log_main);
  e.uncertainty = e.value * std::expm1(t12.log_envelope());
  out.rows.push_back(e);
  if (!t12.in_range) out.notes.push_back("asymptotic-T12: r outside sqrt(log q) <= r <= (1-eps) log q / log log q");

  try {
    const auto t13 = density::delta_upper_t13(spec.q(), r, config.t13_epsilon, config.theorem_c);
    e = base;
    e.method = density::Method::upper_bound_t13;
    e.value = t13.clamped;
    e.uncertainty = 0;
    out.rows.push_back(e);
    if (!t13.r_in_range) out.notes.push_back("upper-bound-T13: r < s=" + std::to_string(t13.s));
  } catch (const Error& err) {
    if (err.code() != Errc::q_too_small) throw;
    out.notes.push_back(std::string("upper-bound-T13 skipped: ") + err.what());
  }
  return out;
}

}  // namespace

int cmd_covariance(const RunConfig& config, const RaceSpec& spec, const std::string& csv, std::ostream& out) {
  const double height = config.height_for(spec.q());
  auto store = make_store(config);
  const auto zeros = lzeros::load_modulus_zeros(store, spec.q(), height);
  const auto cov = spectrum::covariance_data(spec, zeros);
  Sink sink(config, csv, out);
  auto& s = sink.stream();
  std::ostringstream extra;
  extra.precision(10);
  extra << spec_label(spec) << " T=" << lzeros::format_height(height) << " var_q=" << cov.var_q
        << " epsilon=" << cov.epsilon << " min_eigenvalue=" << cov.min_eigenvalue;
  s << artifact_comment(config, "covariance", extra.str()) << '\n';
  spectrum::write_covariance_csv(cov, s);
  if (sink.to_file()) out << "wrote " << sink.path().generic_string() << '\n';
  return exit_ok;
}

int cmd_density(const RunConfig& config, const std::string& method, const RaceSpec& spec, const std::string& csv,
                const std::string& svg, std::ostream& out) {
  const bool all = method == "all";
  if (method == "invert2" && spec.r() != 2) {
    throw Error(Errc::invalid_spec, "two-way inversion needs exactly two classes");
  }
  if (!svg.empty() && method != "mc" && !all) {
    throw Error(Errc::invalid_argument, "--svg needs the Monte Carlo sample (method mc or all)");
  }
  const double height = config.height_for(spec.q());
  std::vector<density::DensityEstimate> rows;
  std::vector<std::string> notes;
  std::optional<lzeros::ModulusZeroData> zeros;
  auto load = [&]() -> const lzeros::ModulusZeroData& {
    if (!zeros) {
      auto store = make_store(config);
      zeros.emplace(lzeros::load_modulus_zeros(store, spec.q(), height));
    }
    return *zeros;
  };

  std::optional<racemodel::SampleBatch> batch;
  if (method == "mc" || all) {
    racemodel::RaceModel model(spec, load());
    batch = racemodel::sample_x(model, config.samples, RandomStream::for_task(config.seed, StreamKind::race_sampling));
    std::vector<std::size_t> columns(spec.r());
    std::iota(columns.begin(), columns.end(), 0);
    auto e = density::delta_mc(*batch, spec, columns);
    e.imported_zeros = load().any_imported();
    rows.push_back(e);
    if (e.ties) notes.push_back("monte-carlo: " + std::to_string(e.ties) + " tied samples excluded");
  }
  if (method == "invert2" || (all && spec.r() == 2)) {
    auto e = density::delta_invert_2way(spec.classes()[0], spec.classes()[1], load());
    e.seed = config.seed;
    e.imported_zeros = load().any_imported();
    rows.push_back(e);
  }
  if (method == "gauss" || all) {
    const auto cov = spectrum::covariance_data(spec, load());
    auto e = density::delta_gauss(cov, config.samples, RandomStream::for_task(config.seed, StreamKind::gaussian_ordering));
    e.imported_zeros = load().any_imported();
    rows.push_back(e);
  }
  if (method == "asymptotic" || all) {
    auto a = asymptotic_rows(config, spec);
    rows.insert(rows.end(), a.rows.begin(), a.rows.end());
    notes.insert(notes.end(), a.notes.begin(), a.notes.end());
  }

  Sink sink(config, csv, out);
  auto& s = sink.stream();
  s << artifact_comment(config, "density " + method, spec_label(spec) + " theorem_c=" + fmt_number(config.theorem_c))
    << '\n';
  density::write_density_csv_header(s);
  for (const auto& e : rows) density::write_density_csv_row(e, s);
  for (const auto& n : notes) s << "# " << n << '\n';
  if (zeros && zeros->any_imported()) s << "# zero data includes imported files\n";
  if (sink.to_file()) out << "wrote " << sink.path().generic_string() << '\n';

  if (!svg.empty() && batch) {
    std::vector<std::vector<double>> columns(spec.r());
    std::vector<std::string> names;
    for (std::size_t j = 0; j < spec.r(); ++j) {
      const auto col = batch->samples.col(static_cast<Eigen::Index>(j));
      columns[j].assign(col.data(), col.data() + col.size());
      names.push_back("X(" + std::to_string(spec.classes()[j]) + ")");
    }
    std::ostringstream text;
    write_histogram_svg("Sample of X, " + spec_label(spec), names, columns, 80, text);
    Sink svg_sink(config, svg, out);
    write_svg_with_comment(text.str(), svg_comment(config, "density", spec), svg_sink.stream());
    out << "wrote " << svg_sink.path().generic_string() << '\n';
  }
  return exit_ok;
}

int cmd_race(const RunConfig& config, const RaceSpec& spec, Int x_max, std::size_t intervals, bool exact,
             const std::string& csv, const std::string& svg, std::ostream& out) {
  const auto grid = empirical::checkpoint_grid(x_max, intervals);
  const auto series = empirical::sieve_checkpoints(spec.q(), grid);
  const auto running = empirical::running_log_density(series, spec);
  const auto estimate = empirical::empirical_log_density(series, spec);

  Sink sink(config, csv, out);
  auto& s = sink.stream();
  s.precision(10);
  s << artifact_comment(config, "race", spec_label(spec) + " xmax=" + std::to_string(x_max) +
                                            " intervals=" + std::to_string(intervals))
    << '\n';
  s << "x,pi_total";
  for (Int a : spec.classes()) s << ",pi_" << a;
  for (Int a : spec.classes()) s << ",E_" << a;
  s << ",running_density\n";
  const std::size_t r = spec.r();
  std::vector<std::vector<double>> e_columns(r);
  std::vector<double> xs;
  const auto& xk = series.checkpoints();
  for (std::size_t k = 0; k < xk.size(); ++k) {
    const auto e = empirical::e_vector(series, static_cast<double>(xk[k]), spec);
    s << xk[k] << ',' << series.pi(k);
    for (Int a : spec.classes()) s << ',' << series.pi(k, a);
    for (std::size_t j = 0; j < r; ++j) {
      s << ',' << e.values(static_cast<Eigen::Index>(j));
      e_columns[j].push_back(e.values(static_cast<Eigen::Index>(j)));
    }
    s << ',' << running[k] << '\n';
    xs.push_back(static_cast<double>(xk[k]));
  }
  s << "# grid_density=" << estimate.value << " lower=" << estimate.lower << " upper=" << estimate.upper
    << " flips=" << estimate.flips << " tie_mass=" << estimate.tie_mass << '\n';
  std::optional<empirical::LogDensityEstimate> exact_estimate;
  if (exact) {
    exact_estimate = empirical::exact_log_density(spec, x_max);
    s << "# exact_density=" << exact_estimate->value << " primes=" << exact_estimate->grid_points << '\n';
  }
  if (sink.to_file()) {
    out << "wrote " << sink.path().generic_string() << '\n';
    out.precision(10);
    out << "log-density at x=" << x_max << ": grid " << estimate.value << " [" << estimate.lower << ", "
        << estimate.upper << "]";
    if (exact_estimate) out << ", exact " << exact_estimate->value;
    out << '\n';
  }

  if (!svg.empty()) {
    SvgPlot plot("Prime race " + spec_label(spec), "x", "E(x; q, a) and running log-density");
    plot.set_log_x(true);
    for (std::size_t j = 0; j < r; ++j) {
      plot.add_series("E(x; " + std::to_string(spec.q()) + ", " + std::to_string(spec.classes()[j]) + ")", xs,
                      e_columns[j]);
    }
    plot.add_series("running density", xs, running);
    plot.add_hline(0.0, "0");
    std::ostringstream text;
    plot.write(text);
    Sink svg_sink(config, svg, out);
    write_svg_with_comment(text.str(), svg_comment(config, "race", spec), svg_sink.stream());
    out << "wrote " << svg_sink.path().generic_string() << '\n';
  }
  return exit_ok;
}

int cmd_report(const RunConfig& config, const RaceSpec& spec, Int x_max, std::ostream& out) {
  const double height = config.height_for(spec.q());
  auto store = make_store(config);
  const auto zeros = lzeros::load_modulus_zeros(store, spec.q(), height);
  const auto cov = spectrum::covariance_data(spec, zeros);
  out.precision(8);
  out << artifact_comment(config, "report", spec_label(spec)) << '\n';
  out << "zeros: T=" << lzeros::format_height(height) << ", " << zeros.total_ordinates() << " ordinates over "
      << zeros.entries().size() << " nontrivial characters" << (zeros.any_imported() ? " (some imported)" : "")
      << '\n';
  const double phi = static_cast<double>(spec.modulus().phi());
  const double lq = std::log(static_cast<double>(spec.q()));
  out << "Var(q) = " << cov.var_q << " (phi(q) log q = " << phi * lq << ", ratio " << cov.var_q / (phi * lq) << ")\n";
  out << "max |correlation| = " << cov.epsilon << ", min eigenvalue = " << cov.min_eigenvalue << '\n';
  out << "mean -C_q(a):";
  for (Eigen::Index j = 0; j < cov.mean.size(); ++j) out << ' ' << cov.mean(j);
  out << '\n';

  racemodel::RaceModel model(spec, zeros);
  std::vector<density::DensityEstimate> rows;
  rows.push_back(density::delta_mc(model, config.samples, RandomStream::for_task(config.seed, StreamKind::race_sampling)));
  if (spec.r() == 2) rows.push_back(density::delta_invert_2way(spec.classes()[0], spec.classes()[1], zeros));
  rows.push_back(
      density::delta_gauss(cov, config.samples, RandomStream::for_task(config.seed, StreamKind::gaussian_ordering)));
  const auto asym = asymptotic_rows(config, spec);
  rows.insert(rows.end(), asym.rows.begin(), asym.rows.end());
  out << "densities:\n";
  for (const auto& e : rows) {
    out << "  " << density::to_string(e.method) << ": " << e.value << " +- " << e.uncertainty
        << (e.rigorous_bound ? " (envelope)" : "") << '\n';
  }
  for (const auto& n : asym.notes) out << "  note: " << n << '\n';

  if (x_max > 0) {
    const auto exact = empirical::exact_log_density(spec, x_max);
    out << "primes up to " << x_max << ": log-density " << exact.value << '\n';
    const auto cmp = empirical::compare_with_model(exact, rows.front());
    out << "  |empirical - monte-carlo| = " << cmp.difference << '\n';
  }
  return exit_ok;
}

}  // namespace race::cli
