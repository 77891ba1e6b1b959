#pragma once

/// Zeros of Dirichlet L-functions on the critical line: Gauss sums, root
/// numbers, the Hardy Z-function, sign-change zero search, and the zero-file
/// format.

#include <complex>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "race/arith.hpp"

namespace race::lzeros {

struct LzerosConfig {
  double max_height = 1e4;    // |t| ceiling for Z evaluation
  Int max_conductor = 500;
  double scan_step = 0.05;    // sign-change grid spacing h
  double abs_error = 1e-8;    // bracket half-width of each reported ordinate
  double slack_log = 2.0;     // count slack: slack_log * log(q* T) + slack_const
  double slack_const = 5.0;
};

enum class ZeroSource { computed, imported };

/// Positive ordinates 0 < gamma <= height of one primitive L-function.
struct ZeroSet {
  Int conductor = 0;
  Int conrey_index = 0;
  std::vector<double> ordinates;
  double height = 0;
  double abs_error = 1e-8;
  ZeroSource source = ZeroSource::computed;
  bool possible_missed_zeros = false;

  /// Copy restricted to ordinates <= new_height (which must not exceed height).
  ZeroSet truncated(double new_height) const;
};

struct RootNumberData {
  std::complex<double> gauss_sum;
  std::complex<double> root_number;  // tau / (i^a sqrt(q*))
  int parity = 0;
};

/// tau(chi) = sum_{n=1}^{q} chi(n) e(n/q). Throws must-be-primitive.
std::complex<double> gauss_sum(const DirichletCharacter& chi);
RootNumberData root_number(const DirichletCharacter& chi);

std::complex<double> log_gamma(std::complex<double> z);

/// Hurwitz zeta values zeta(1/2 + it, a/k) for all a in [1, k] coprime to k,
/// by Euler-Maclaurin summation. Precomputes the summand tables up to a
/// maximum height so repeated evaluation is cheap.
class CriticalLine {
 public:
  CriticalLine(Int conductor, double max_height);

  Int conductor() const noexcept { return k_; }
  const std::vector<Int>& units() const noexcept { return units_; }

  /// out[u] = zeta(1/2 + it, units()[u] / k). Throws precision-failure if the
  /// Euler-Maclaurin correction does not converge.
  void hurwitz(double t, std::vector<std::complex<double>>& out) const;

 private:
  std::size_t terms_for(double t) const;

  Int k_;
  double max_height_;
  std::size_t max_terms_;
  std::vector<Int> units_;
  std::vector<double> log_;     // [u * max_terms_ + n] = log(n + a_u / k)
  std::vector<double> weight_;  // (n + a_u / k)^{-1/2}
};

struct ZValue {
  double value = 0;           // Z(t)
  double imag_residual = 0;   // |Im| of the rotated L-value
  double scale = 0;           // magnitude scale the residual should be compared to
  std::complex<double> l_value;
};

/// Hardy Z-function of a primitive character: L(1/2+it, chi) rotated by the
/// gamma-factor phase and the square root of the root number so that it is real.
class HardyZ {
 public:
  explicit HardyZ(const DirichletCharacter& chi, const LzerosConfig& config = {});

  ZValue operator()(double t) const;
  /// Evaluates from precomputed Hurwitz values at t.
  ZValue from_hurwitz(double t, const std::vector<std::complex<double>>& hurwitz) const;

  const DirichletCharacter& character() const noexcept { return *chi_; }
  const RootNumberData& root() const noexcept { return root_; }

 private:
  const DirichletCharacter* chi_;
  LzerosConfig config_;
  RootNumberData root_;
  std::vector<std::complex<double>> coefficients_;  // chi(a_u) for the CriticalLine unit order
  std::shared_ptr<const CriticalLine> line_;
};

ZValue hardy_z(const DirichletCharacter& chi, double t, const LzerosConfig& config = {});

struct ZeroCount {
  double main_term = 0;
  bool degenerate = false;  // q* T / (2 pi e) <= 1, main term reported as 0
};

/// (T / 2 pi) log(q* T / (2 pi e)).
ZeroCount zero_count_expected(Int q_star, double height);
double zero_count_slack(Int q_star, double height, const LzerosConfig& config = {});

/// (1 / 2 pi) * integral_T^inf log(q* t / 2 pi) / (1/4 + t^2) dt.
double tail_second_moment(Int q_star, double height);

/// All zeros on (0, T] of one primitive character.
ZeroSet find_zeros(const DirichletCharacter& chi, double height, const LzerosConfig& config = {});

/// Zeros for several primitive characters of the same conductor; the scan
/// grid shares Hurwitz evaluations across characters.
std::vector<ZeroSet> find_zeros_batch(const std::vector<const DirichletCharacter*>& characters, double height,
                                      const LzerosConfig& config = {});

// ---------------------------------------------------------------------------
// Zero files

inline constexpr const char* kZeroFileHeader = "conductor,conrey_index,ordinate,abs_error";

std::string format_height(double height);
/// `<dir>/q<conductor>/chi<index>_T<height>.csv`
std::filesystem::path zero_file_path(const std::filesystem::path& dir, Int conductor, Int conrey_index, double height);

void export_zeros(const ZeroSet& zeros, const std::filesystem::path& path);
/// Throws parse-error (with line number) or validation-error.
ZeroSet import_zeros(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Zero store and per-modulus zero data

/// Directory-backed cache of zero sets keyed by (conductor, Conrey index,
/// height, abs_error). Recomputes only on a miss. Writes are serialized.
class ZeroStore {
 public:
  explicit ZeroStore(std::filesystem::path directory, LzerosConfig config = {}, bool compute_missing = true);

  /// $RACE_ZERO_DIR, or ./zeros.
  static std::filesystem::path default_directory();

  const std::filesystem::path& directory() const noexcept { return dir_; }
  const LzerosConfig& config() const noexcept { return config_; }

  /// Cached or on-disk zero set truncated to height, or null.
  std::shared_ptr<const ZeroSet> find(Int conductor, Int conrey_index, double height);
  /// Like find, computing (and persisting) the whole conductor on a miss
  /// when compute_missing is set.
  std::shared_ptr<const ZeroSet> get(Int conductor, Int conrey_index, double height);
  /// Makes every listed (conductor, label) available, batching per conductor.
  void ensure(const std::vector<std::pair<Int, Int>>& characters, double height);

 private:
  std::shared_ptr<const ZeroSet> find_locked(Int conductor, Int conrey_index, double height);

  std::filesystem::path dir_;
  LzerosConfig config_;
  bool compute_missing_;
  std::mutex mutex_;
  std::map<std::pair<Int, Int>, std::shared_ptr<const ZeroSet>> memory_;
};

struct CharacterZeros {
  Int label = 0;  // Conrey label mod q
  Inducer inducer;
  std::shared_ptr<const ZeroSet> zeros;  // zeros of the primitive inducer
};

/// Zero data for every nontrivial character mod q, truncated at a common height.
/// Imprimitive characters borrow the zeros of their primitive inducer.
class ModulusZeroData {
 public:
  ModulusZeroData(std::shared_ptr<const CharacterTable> table, double height, std::vector<CharacterZeros> entries);

  const CharacterTable& table() const noexcept { return *table_; }
  std::shared_ptr<const CharacterTable> table_ptr() const noexcept { return table_; }
  Int q() const noexcept { return table_->q(); }
  double height() const noexcept { return height_; }
  /// Nontrivial characters in ascending label order.
  const std::vector<CharacterZeros>& entries() const noexcept { return entries_; }
  bool any_imported() const;
  std::size_t total_ordinates() const;

 private:
  std::shared_ptr<const CharacterTable> table_;
  double height_;
  std::vector<CharacterZeros> entries_;
};

/// Collects zero sets for all nontrivial characters mod q from the store.
/// Throws incomplete-zero-data naming every missing inducer.
ModulusZeroData load_modulus_zeros(ZeroStore& store, Int q, double height);

/// Builds zero data from explicit sets keyed by (conductor, label).
ModulusZeroData modulus_zeros_from_sets(Int q, double height, const std::map<std::pair<Int, Int>, ZeroSet>& sets);

}  // namespace race::lzeros
