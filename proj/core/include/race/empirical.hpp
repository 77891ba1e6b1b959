#pragma once

/// Races between actual primes: a segmented sieve recording pi(x; q, a) on a
/// checkpoint grid, normalized error vectors and empirical logarithmic densities.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "race/arith.hpp"
#include "race/density.hpp"
#include "race/numerics.hpp"

namespace race::empirical {

inline constexpr Int kMaxSieveLimit = 1'000'000'000;

/// Every integer in [2, dense_below) followed by a log-uniform grid of
/// `intervals` cells from dense_below to x_max (rounded, deduplicated). Doubling
/// `intervals` gives a refinement of the same grid.
std::vector<Int> checkpoint_grid(Int x_max, std::size_t intervals = 4096, Int dense_below = 100);

class PrimeCheckpointSeries {
 public:
  PrimeCheckpointSeries(Int q, std::vector<Int> checkpoints, std::vector<Int> pi_total,
                        std::vector<std::vector<Int>> pi_by_class);

  Int q() const noexcept { return q_; }
  /// Reduced residues mod q in ascending order; column order of the counts.
  const std::vector<Int>& classes() const noexcept { return classes_; }
  const std::vector<Int>& checkpoints() const noexcept { return x_; }
  Int x_max() const { return x_.back(); }
  Int pi(std::size_t k) const { return pi_total_.at(k); }
  Int pi(std::size_t k, Int a) const;
  const std::vector<Int>& counts(std::size_t k) const { return pi_by_class_.at(k); }
  /// Primes p <= x_k dividing q.
  Int pi_ramified(std::size_t k) const;
  std::size_t class_column(Int a) const;

 private:
  Int q_;
  std::vector<Int> classes_;
  std::vector<Int> x_;
  std::vector<Int> pi_total_;
  std::vector<std::vector<Int>> pi_by_class_;
};

struct SieveOptions {
  std::size_t segment_bytes = std::size_t{1} << 20;
  std::size_t memory_budget = std::size_t{256} << 20;  // bytes across workers
};

/// Exact prime counts at every checkpoint (which must be ascending, >= 2, and end
/// at or below 1e9). Throws memory-budget when even a minimal segment does not fit.
PrimeCheckpointSeries sieve_checkpoints(Int q, const std::vector<Int>& checkpoints, const SieveOptions& options = {});
PrimeCheckpointSeries sieve_checkpoints(Int q, Int x_max, std::size_t intervals = 4096);

struct EVector {
  numerics::Vector values;  // (log x / sqrt x)(phi(q) pi(x; q, a_j) - pi(x))
  Int x = 0;
  bool snapped = false;  // requested x was not a checkpoint
};

EVector e_vector(const PrimeCheckpointSeries& series, double x, const RaceSpec& spec);

struct LogDensityEstimate {
  RaceSpec spec;
  Int x_max = 0;
  double value = 0;  // left-endpoint rule
  double lower = 0;  // cells with both endpoints in the set (unit cells: left endpoint)
  double upper = 0;  // cells with either endpoint in the set
  std::size_t grid_points = 0;
  std::size_t flips = 0;     // wider-than-unit cells whose endpoints disagree
  double tie_mass = 0;       // normalized mass of cells whose left endpoint has tied counts
  double max_cell = 0;       // largest cell width in log t
};

/// (1 / log x_max) * integral over [2, x_max] of the indicator of
/// pi(t; q, a_1) > ... > pi(t; q, a_r), dt / t. Ties count as outside the set.
LogDensityEstimate empirical_log_density(const PrimeCheckpointSeries& series, const RaceSpec& spec);

/// The same integral evaluated exactly: the indicator only changes at primes, so
/// a streaming sieve integrates it between consecutive primes. lower = upper =
/// value; grid_points counts the primes visited.
LogDensityEstimate exact_log_density(const RaceSpec& spec, Int x_max);

/// Running value of the left-endpoint estimate at every checkpoint.
std::vector<double> running_log_density(const PrimeCheckpointSeries& series, const RaceSpec& spec);

struct ModelComparison {
  RaceSpec spec;
  double empirical = 0;
  double empirical_lower = 0;
  double empirical_upper = 0;
  double model = 0;
  double model_uncertainty = 0;
  density::Method method = density::Method::monte_carlo;
  double difference = 0;  // |empirical - model|
};

/// Throws invalid-comparison when the orderings differ.
ModelComparison compare_with_model(const LogDensityEstimate& empirical, const density::DensityEstimate& model);

/// `x,pi_total,pi_<a>...` for every reduced class.
void write_checkpoints_csv(const PrimeCheckpointSeries& series, std::ostream& out);

}  // namespace race::empirical
