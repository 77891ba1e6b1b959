#pragma once

/// Second moments of the limiting race distribution assembled from zero data:
/// Var(q), B_q(a, b), the mean vector and the covariance/correlation matrices.

#include <iosfwd>
#include <vector>

#include "race/arith.hpp"
#include "race/lzeros.hpp"
#include "race/numerics.hpp"

namespace race::spectrum {

/// sum over 0 < gamma <= T of 1 / (1/4 + gamma^2) for one character, plus the
/// estimated contribution of ordinates above T.
struct CharacterSum {
  Int label = 0;
  Int conductor = 0;
  std::size_t zero_count = 0;
  double head = 0;
  double tail = 0;
};

class Spectrum {
 public:
  explicit Spectrum(const lzeros::ModulusZeroData& zeros, bool tail_correction = true);

  Int q() const noexcept { return table_->q(); }
  double height() const noexcept { return height_; }
  bool tail_correction() const noexcept { return tail_correction_; }
  const CharacterTable& table() const noexcept { return *table_; }
  /// Nontrivial characters in ascending label order.
  const std::vector<CharacterSum>& sums() const noexcept { return sums_; }

  /// head + tail (tail only when correction is on).
  double weight(std::size_t index) const;
  double variance() const;
  /// Sum of the tail corrections that enter variance().
  double variance_tail() const;

  struct BValue {
    double value = 0;
    double imag_residual = 0;
  };
  /// B_q(a, b); throws invalid-pair for a = b mod q, invalid-class for non-units.
  BValue b_value(Int a, Int b) const;
  double b(Int a, Int b) const { return b_value(a, b).value; }

 private:
  std::shared_ptr<const CharacterTable> table_;
  double height_;
  bool tail_correction_;
  std::vector<CharacterSum> sums_;
};

double variance_q(const lzeros::ModulusZeroData& zeros, bool tail_correction = true);
double b_q(Int a, Int b, const lzeros::ModulusZeroData& zeros, bool tail_correction = true);

struct CovarianceData {
  RaceSpec spec;
  double var_q = 0;
  numerics::Matrix b_matrix{};   // Var(q) on the diagonal, B_q(a_j, a_k) off it
  numerics::Vector mean{};       // -C_q(a_j)
  numerics::Matrix correlation{};  // b_matrix / Var(q)
  double height = 0;
  bool tail_correction_applied = false;
  double epsilon = 0;             // max |correlation_jk|, j != k
  double min_eigenvalue = 0;      // of the correlation matrix
  bool positive_semidefinite = false;
  double max_imag_residual = 0;   // over the B_q sums
};

/// Throws invalid-covariance when the correlation matrix has an eigenvalue
/// below -1e-8.
CovarianceData covariance_data(const RaceSpec& spec, const Spectrum& spectrum);
CovarianceData covariance_data(const RaceSpec& spec, const lzeros::ModulusZeroData& zeros,
                               bool tail_correction = true);

/// Row-major matrix dump: `row,col,class_row,class_col,covariance,correlation,mean_row`.
void write_covariance_csv(const CovarianceData& data, std::ostream& out);

}  // namespace race::spectrum
