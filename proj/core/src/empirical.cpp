#include "race/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "race/error.hpp"
#include "race/parallel.hpp"

namespace race::empirical {

std::vector<Int> checkpoint_grid(Int x_max, std::size_t intervals, Int dense_below) {
  if (x_max < 2) throw Error(Errc::invalid_argument, "x_max must be at least 2");
  if (intervals == 0) throw Error(Errc::invalid_argument, "need at least one grid interval");
  std::vector<Int> grid;
  for (Int x = 2; x < std::min(dense_below, x_max); ++x) grid.push_back(x);
  if (x_max <= dense_below) {
    grid.push_back(x_max);
    return grid;
  }
  const double lo = std::log(static_cast<double>(dense_below));
  const double span = std::log(static_cast<double>(x_max)) - lo;
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(intervals);
    Int x = k == intervals ? x_max : static_cast<Int>(std::llround(std::exp(lo + frac * span)));
    x = std::clamp(x, dense_below, x_max);
    if (grid.empty() || x > grid.back()) grid.push_back(x);
  }
  return grid;
}

PrimeCheckpointSeries::PrimeCheckpointSeries(Int q, std::vector<Int> checkpoints, std::vector<Int> pi_total,
                                             std::vector<std::vector<Int>> pi_by_class)
    : q_(q),
      classes_(Modulus(q).units()),
      x_(std::move(checkpoints)),
      pi_total_(std::move(pi_total)),
      pi_by_class_(std::move(pi_by_class)) {
  if (x_.empty() || x_.size() != pi_total_.size() || x_.size() != pi_by_class_.size()) {
    throw Error(Errc::invalid_argument, "checkpoint series has inconsistent lengths");
  }
}

std::size_t PrimeCheckpointSeries::class_column(Int a) const {
  const Int c = Modulus(q_).canonical(a);
  auto it = std::lower_bound(classes_.begin(), classes_.end(), c);
  if (it == classes_.end() || *it != c) {
    throw Error(Errc::invalid_class, std::to_string(a) + " is not a reduced class mod " + std::to_string(q_));
  }
  return static_cast<std::size_t>(it - classes_.begin());
}

Int PrimeCheckpointSeries::pi(std::size_t k, Int a) const { return pi_by_class_.at(k)[class_column(a)]; }

Int PrimeCheckpointSeries::pi_ramified(std::size_t k) const {
  const Modulus m(q_);
  Int n = 0;
  for (const auto& [p, e] : m.factors()) n += p <= x_.at(k);
  return n;
}

namespace {

std::vector<Int> small_primes(Int limit) {
  std::vector<char> composite(static_cast<std::size_t>(limit) + 1, 0);
  std::vector<Int> primes;
  for (Int n = 2; n <= limit; ++n) {
    if (composite[static_cast<std::size_t>(n)]) continue;
    primes.push_back(n);
    for (Int m = n * n; m <= limit; m += n) composite[static_cast<std::size_t>(m)] = 1;
  }
  return primes;
}

Int isqrt(Int n) {
  Int r = static_cast<Int>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace

PrimeCheckpointSeries sieve_checkpoints(Int q, const std::vector<Int>& checkpoints, const SieveOptions& options) {
  const Modulus mod(q);
  if (q < 1) throw Error(Errc::invalid_modulus, "modulus must be positive");
  if (checkpoints.empty() || checkpoints.front() < 2) {
    throw Error(Errc::invalid_argument, "checkpoints must start at 2 or above");
  }
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end()) {
    throw Error(Errc::invalid_argument, "checkpoints must be strictly increasing");
  }
  const Int x_max = checkpoints.back();
  if (x_max > kMaxSieveLimit) throw Error(Errc::invalid_argument, "x_max above the 1e9 sieve ceiling");

  const std::vector<Int> classes = mod.units();
  std::vector<std::ptrdiff_t> column(static_cast<std::size_t>(q), -1);
  for (std::size_t c = 0; c < classes.size(); ++c) column[static_cast<std::size_t>(classes[c] % q)] = static_cast<std::ptrdiff_t>(c);
  const std::size_t n_classes = classes.size();

  const std::size_t workers = std::max(1u, worker_count());
  std::size_t segment = options.segment_bytes;
  while (segment * workers > options.memory_budget && segment > 4096) segment /= 2;
  if (segment * workers > options.memory_budget) {
    throw Error(Errc::memory_budget, "sieve segment does not fit the memory budget");
  }
  const auto seg = static_cast<Int>(segment);
  const std::vector<Int> base = small_primes(isqrt(x_max));

  // Segment s covers [2 + s*seg, 2 + (s+1)*seg). Each segment tallies primes into
  // buckets keyed by the first checkpoint >= p; buckets are merged in order.
  const std::size_t n_segments = static_cast<std::size_t>((x_max - 2) / seg + 1);
  struct Partial {
    std::size_t first_checkpoint = 0;
    std::vector<Int> totals;                   // per checkpoint bucket
    std::vector<Int> by_class;                 // bucket * n_classes + column
  };
  std::vector<Partial> partials(n_segments);
  parallel_for(n_segments, [&](std::size_t s) {
    const Int lo = 2 + static_cast<Int>(s) * seg;
    const Int hi = std::min(x_max + 1, lo + seg);
    std::vector<char> composite(static_cast<std::size_t>(hi - lo), 0);
    for (Int p : base) {
      if (p * p >= hi) break;
      Int start = std::max(p * p, (lo + p - 1) / p * p);
      for (Int m = start; m < hi; m += p) composite[static_cast<std::size_t>(m - lo)] = 1;
    }
    Partial part;
    part.first_checkpoint =
        static_cast<std::size_t>(std::lower_bound(checkpoints.begin(), checkpoints.end(), lo) - checkpoints.begin());
    const std::size_t last =
        static_cast<std::size_t>(std::lower_bound(checkpoints.begin(), checkpoints.end(), hi - 1) - checkpoints.begin());
    const std::size_t buckets = last - part.first_checkpoint + 1;
    part.totals.assign(buckets, 0);
    part.by_class.assign(buckets * n_classes, 0);
    std::size_t bucket = 0;
    for (Int n = lo; n < hi; ++n) {
      if (composite[static_cast<std::size_t>(n - lo)]) continue;
      while (checkpoints[part.first_checkpoint + bucket] < n) ++bucket;
      ++part.totals[bucket];
      const auto col = column[static_cast<std::size_t>(n % q)];
      if (col >= 0) ++part.by_class[bucket * n_classes + static_cast<std::size_t>(col)];
    }
    partials[s] = std::move(part);
  });

  const std::size_t n_points = checkpoints.size();
  std::vector<Int> bucket_total(n_points, 0);
  std::vector<std::vector<Int>> bucket_class(n_points, std::vector<Int>(n_classes, 0));
  for (const auto& part : partials) {
    for (std::size_t b = 0; b < part.totals.size(); ++b) {
      const std::size_t k = part.first_checkpoint + b;
      if (k >= n_points) break;
      bucket_total[k] += part.totals[b];
      for (std::size_t c = 0; c < n_classes; ++c) bucket_class[k][c] += part.by_class[b * n_classes + c];
    }
  }
  for (std::size_t k = 1; k < n_points; ++k) {
    bucket_total[k] += bucket_total[k - 1];
    for (std::size_t c = 0; c < n_classes; ++c) bucket_class[k][c] += bucket_class[k - 1][c];
  }
  return PrimeCheckpointSeries(q, checkpoints, std::move(bucket_total), std::move(bucket_class));
}

PrimeCheckpointSeries sieve_checkpoints(Int q, Int x_max, std::size_t intervals) {
  return sieve_checkpoints(q, checkpoint_grid(x_max, intervals));
}

EVector e_vector(const PrimeCheckpointSeries& series, double x, const RaceSpec& spec) {
  if (spec.q() != series.q()) throw Error(Errc::invalid_spec, "race modulus differs from the series modulus");
  const auto& xs = series.checkpoints();
  // Nearest checkpoint in log scale.
  auto it = std::lower_bound(xs.begin(), xs.end(), x, [](Int a, double b) { return static_cast<double>(a) < b; });
  std::size_t k;
  if (it == xs.end()) {
    k = xs.size() - 1;
  } else if (it == xs.begin()) {
    k = 0;
  } else {
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const double d_hi = std::log(static_cast<double>(xs[hi])) - std::log(x);
    const double d_lo = std::log(x) - std::log(static_cast<double>(xs[hi - 1]));
    k = d_lo <= d_hi ? hi - 1 : hi;
  }
  EVector out;
  out.x = xs[k];
  out.snapped = static_cast<double>(out.x) != x;
  const double xd = static_cast<double>(out.x);
  const double scale = std::log(xd) / std::sqrt(xd);
  const double phi = static_cast<double>(spec.modulus().phi());
  out.values.resize(static_cast<Eigen::Index>(spec.r()));
  for (std::size_t j = 0; j < spec.r(); ++j) {
    out.values(static_cast<Eigen::Index>(j)) =
        scale * (phi * static_cast<double>(series.pi(k, spec.classes()[j])) - static_cast<double>(series.pi(k)));
  }
  return out;
}

namespace {

struct Indicator {
  bool in_set = false;
  bool tie = false;
};

Indicator ordering_at(const PrimeCheckpointSeries& series, std::size_t k, const std::vector<std::size_t>& cols) {
  const auto& c = series.counts(k);
  Indicator ind;
  ind.in_set = true;
  for (std::size_t j = 0; j + 1 < cols.size(); ++j) {
    if (!(c[cols[j]] > c[cols[j + 1]])) {
      ind.in_set = false;
      break;
    }
  }
  std::vector<Int> vals;
  for (std::size_t col : cols) vals.push_back(c[col]);
  std::sort(vals.begin(), vals.end());
  ind.tie = std::adjacent_find(vals.begin(), vals.end()) != vals.end();
  return ind;
}

std::vector<std::size_t> columns_for(const PrimeCheckpointSeries& series, const RaceSpec& spec) {
  if (spec.q() != series.q()) throw Error(Errc::invalid_spec, "race modulus differs from the series modulus");
  std::vector<std::size_t> cols;
  for (Int a : spec.classes()) cols.push_back(series.class_column(a));
  return cols;
}

}  // namespace

LogDensityEstimate empirical_log_density(const PrimeCheckpointSeries& series, const RaceSpec& spec) {
  const auto cols = columns_for(series, spec);
  const auto& xs = series.checkpoints();
  if (xs.front() != 2 || xs.size() < 2) {
    throw Error(Errc::invalid_argument, "series must start at x = 2 and contain at least two checkpoints");
  }
  LogDensityEstimate est{spec};
  est.x_max = series.x_max();
  est.grid_points = xs.size();
  const double norm = std::log(static_cast<double>(est.x_max));
  Indicator left = ordering_at(series, 0, cols);
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const Indicator right = ordering_at(series, k + 1, cols);
    const double width = std::log(static_cast<double>(xs[k + 1])) - std::log(static_cast<double>(xs[k]));
    est.max_cell = std::max(est.max_cell, width);
    // Counts are constant on [n, n + 1), so unit cells are resolved exactly.
    const bool unit_cell = xs[k + 1] == xs[k] + 1;
    if (left.in_set) est.value += width;
    if (left.in_set && (right.in_set || unit_cell)) est.lower += width;
    if (left.in_set || (right.in_set && !unit_cell)) est.upper += width;
    if (left.in_set != right.in_set && !unit_cell) ++est.flips;
    if (left.tie) est.tie_mass += width;
    left = right;
  }
  est.value /= norm;
  est.lower /= norm;
  est.upper /= norm;
  est.tie_mass /= norm;
  return est;
}

LogDensityEstimate exact_log_density(const RaceSpec& spec, Int x_max) {
  if (x_max < 2 || x_max > kMaxSieveLimit) throw Error(Errc::invalid_argument, "x_max must lie in [2, 1e9]");
  const Int q = spec.q();
  const std::size_t r = spec.r();
  std::vector<std::ptrdiff_t> slot(static_cast<std::size_t>(q), -1);
  for (std::size_t j = 0; j < r; ++j) slot[static_cast<std::size_t>(spec.classes()[j] % q)] = static_cast<std::ptrdiff_t>(j);
  std::vector<Int> counts(r, 0);
  auto state = [&] {
    Indicator ind;
    ind.in_set = true;
    for (std::size_t j = 0; j + 1 < r; ++j) {
      if (!(counts[j] > counts[j + 1])) {
        ind.in_set = false;
        break;
      }
    }
    std::vector<Int> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    ind.tie = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    return ind;
  };

  LogDensityEstimate est{spec};
  est.x_max = x_max;
  Indicator current = state();
  double last = std::log(2.0);
  auto close_run = [&](double upto) {
    const double width = upto - last;
    if (current.in_set) est.value += width;
    if (current.tie) est.tie_mass += width;
    est.max_cell = std::max(est.max_cell, width);
    last = upto;
  };

  const std::vector<Int> base = small_primes(isqrt(x_max));
  const Int seg = Int{1} << 20;
  std::vector<char> composite;
  for (Int lo = 2; lo <= x_max; lo += seg) {
    const Int hi = std::min(x_max + 1, lo + seg);
    composite.assign(static_cast<std::size_t>(hi - lo), 0);
    for (Int p : base) {
      if (p * p >= hi) break;
      for (Int m = std::max(p * p, (lo + p - 1) / p * p); m < hi; m += p) composite[static_cast<std::size_t>(m - lo)] = 1;
    }
    for (Int n = lo; n < hi; ++n) {
      if (composite[static_cast<std::size_t>(n - lo)]) continue;
      ++est.grid_points;
      const auto j = slot[static_cast<std::size_t>(n % q)];
      if (j < 0) continue;
      ++counts[static_cast<std::size_t>(j)];
      const Indicator next = state();
      if (next.in_set != current.in_set || next.tie != current.tie) {
        close_run(std::log(static_cast<double>(n)));
        if (next.in_set != current.in_set) ++est.flips;
        current = next;
      }
    }
  }
  close_run(std::log(static_cast<double>(x_max)));
  const double norm = std::log(static_cast<double>(x_max));
  est.value /= norm;
  est.tie_mass /= norm;
  est.lower = est.upper = est.value;
  return est;
}

std::vector<double> running_log_density(const PrimeCheckpointSeries& series, const RaceSpec& spec) {
  const auto cols = columns_for(series, spec);
  const auto& xs = series.checkpoints();
  std::vector<double> out(xs.size(), 0.0);
  double mass = 0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (ordering_at(series, k - 1, cols).in_set) {
      mass += std::log(static_cast<double>(xs[k])) - std::log(static_cast<double>(xs[k - 1]));
    }
    out[k] = mass / std::log(static_cast<double>(xs[k]));
  }
  return out;
}

ModelComparison compare_with_model(const LogDensityEstimate& empirical, const density::DensityEstimate& model) {
  if (!(empirical.spec == model.spec)) {
    throw Error(Errc::invalid_comparison, "empirical and model estimates are for different orderings");
  }
  ModelComparison cmp{empirical.spec};
  cmp.empirical = empirical.value;
  cmp.empirical_lower = empirical.lower;
  cmp.empirical_upper = empirical.upper;
  cmp.model = model.value;
  cmp.model_uncertainty = model.uncertainty;
  cmp.method = model.method;
  cmp.difference = std::abs(empirical.value - model.value);
  return cmp;
}

void write_checkpoints_csv(const PrimeCheckpointSeries& series, std::ostream& out) {
  out << "x,pi_total";
  for (Int a : series.classes()) out << ",pi_" << a;
  out << '\n';
  for (std::size_t k = 0; k < series.checkpoints().size(); ++k) {
    out << series.checkpoints()[k] << ',' << series.pi(k);
    for (Int c : series.counts(k)) out << ',' << c;
    out << '\n';
  }
}

}  // namespace race::empirical
