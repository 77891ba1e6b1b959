#pragma once

/// Logarithmic densities of prime number races: Monte Carlo, two-way Fourier
/// inversion, Gaussian approximation, and the large-q asymptotic evaluators.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "race/arith.hpp"
#include "race/numerics.hpp"
#include "race/racemodel.hpp"
#include "race/spectrum.hpp"

namespace race::density {

enum class Method { monte_carlo, inversion_2way, gaussian_approx, asymptotic_t11, asymptotic_t12, upper_bound_t13 };

std::string_view to_string(Method method) noexcept;

struct DensityEstimate {
  RaceSpec spec;
  Method method = Method::monte_carlo;
  double value = 0;
  double uncertainty = 0;       // standard error, quadrature error, or envelope
  bool rigorous_bound = false;  // uncertainty is a bound rather than a standard error
  double height = 0;            // zero-data truncation height
  bool imported_zeros = false;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t ties = 0;
};

struct OrderingCount {
  std::size_t hits = 0;
  std::size_t ties = 0;
  std::size_t samples = 0;
};

/// Rows with x[c_0] > x[c_1] > ... (strict). Rows with an exact equality among
/// the listed columns are tallied as ties and never counted as hits.
OrderingCount count_ordering(const numerics::Matrix& samples, const std::vector<std::size_t>& columns);

DensityEstimate delta_mc(const racemodel::RaceModel& model, std::size_t n, const numerics::RandomStream& stream);
/// Estimate for the ordering of batch columns given by `columns`, on an existing batch.
DensityEstimate delta_mc(const racemodel::SampleBatch& batch, const RaceSpec& batch_spec,
                         const std::vector<std::size_t>& columns);

struct PermutationCounts {
  std::vector<std::vector<std::size_t>> orderings;  // column orders, lexicographic
  std::vector<std::size_t> counts;
  std::size_t ties = 0;
  std::size_t samples = 0;
};

/// Tallies every one of the r! strict orderings on a shared batch (r <= 8).
PermutationCounts count_all_orderings(const numerics::Matrix& samples);

/// P(X_a > X_b) from the characteristic function of X_a - X_b. Returns exactly
/// 1/2 when C_q(a) = C_q(b).
DensityEstimate delta_invert_2way(Int a, Int b, const lzeros::ModulusZeroData& zeros);

/// Ordering probability of N(normalized mean, correlation) by Monte Carlo.
DensityEstimate delta_gauss(const RaceSpec& spec, const numerics::Matrix& correlation,
                            const numerics::Vector& normalized_mean, std::size_t n,
                            const numerics::RandomStream& stream);
/// Uses mean -C_q(a_j) / sqrt(Var(q)) unless centered is set.
DensityEstimate delta_gauss(const spectrum::CovarianceData& cov, std::size_t n, const numerics::RandomStream& stream,
                            bool centered = false);

struct AsymptoticT11 {
  double baseline = 0;  // 1 / r!
  double envelope = 0;  // c r^2 / log q
  bool in_range = false;  // 2 <= r <= sqrt(log q)
};

AsymptoticT11 delta_asymptotic_t11(Int q, int r, double c);

struct AsymptoticT12 {
  double log_main = 0;          // -r log r + r
  double envelope_log_r = 0;    // c log r
  double envelope_r2_log_q = 0; // c r^2 / log q
  bool in_range = false;        // sqrt(log q) <= r <= (1 - eps) log q / log log q
  double log_envelope() const { return envelope_log_r + envelope_r2_log_q; }
};

AsymptoticT12 delta_asymptotic_t12(Int q, int r, double c, double epsilon = 0.1);

struct UpperT13 {
  int s = 0;             // floor((1 - eps/2) log q / log log q)
  double bound = 0;      // exp(T12 main + envelope at s), not clamped
  double clamped = 0;    // min(1, bound)
  bool r_in_range = false;  // r >= s
};

/// Throws q-too-small when s < 2.
UpperT13 delta_upper_t13(Int q, int r, double epsilon, double c);

struct DecompositionReport {
  std::size_t base_count = 0;                    // (r-1)-ordering hits among untied rows
  std::vector<std::size_t> insertion_counts;     // r insertion positions
  std::size_t insertion_sum = 0;
  std::size_t ties = 0;                          // rows tied among the r columns
  bool exact = false;
};

/// Checks count(base ordering) = sum over insertion positions of the
/// extended ordering counts, on one batch.
DecompositionReport ordering_decomposition_check(const numerics::Matrix& samples,
                                                 const std::vector<std::size_t>& base_columns,
                                                 std::size_t inserted_column);

/// `q,classes,method,value,uncertainty,T,N,seed`
void write_density_csv_header(std::ostream& out);
void write_density_csv_row(const DensityEstimate& estimate, std::ostream& out);

}  // namespace race::density
