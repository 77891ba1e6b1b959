#pragma once

/// The limiting random vector of a prime number race: one uniform phase per
/// (character, zero) pair, its characteristic function, and the tail and decay
/// bounds it satisfies.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "race/arith.hpp"
#include "race/lzeros.hpp"
#include "race/numerics.hpp"
#include "race/spectrum.hpp"

namespace race::racemodel {

struct ModelCharacter {
  Int label = 0;
  std::vector<std::complex<double>> values;  // chi(a_j), j = 1..r
  std::vector<double> weights;               // 2 / sqrt(1/4 + gamma^2), ascending gamma
};

class RaceModel {
 public:
  RaceModel(RaceSpec spec, const lzeros::ModulusZeroData& zeros);

  const RaceSpec& spec() const noexcept { return spec_; }
  std::size_t r() const noexcept { return spec_.r(); }
  double height() const noexcept { return height_; }
  /// -C_q(a_j) unless replaced.
  const numerics::Vector& mean() const noexcept { return mean_; }
  const std::vector<ModelCharacter>& characters() const noexcept { return characters_; }
  std::size_t phase_count() const noexcept;

  /// Same model with a different mean vector (zero for the centered variant).
  RaceModel with_mean(numerics::Vector mean) const;

 private:
  RaceSpec spec_;
  double height_ = 0;
  numerics::Vector mean_;
  std::vector<ModelCharacter> characters_;
};

struct SampleBatch {
  numerics::Matrix samples;  // N x r
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  double height = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(samples.rows()); }
};

/// N independent draws of X. Phases are drawn with 24-bit resolution; blocks of
/// samples use substreams so the batch is identical for any worker count.
SampleBatch sample_x(const RaceModel& model, std::size_t n, const numerics::RandomStream& stream);

void write_samples_csv(const SampleBatch& batch, const RaceSpec& spec, std::ostream& out);

struct CharValue {
  std::complex<double> value;
  double log_abs = 0;  // log |value|, -inf when a factor vanishes
};

/// E exp(-i <t, X>) = exp(i sum C_j t_j) prod_chi prod_gamma J0(w_gamma |sum_j chi(a_j) t_j|),
/// truncated to the available ordinates.
CharValue char_function(const RaceModel& model, const numerics::Vector& t);
/// The product of J0 factors alone: the characteristic function of X - E X.
CharValue centered_char_function(const RaceModel& model, const numerics::Vector& t);

struct GaussianCheck {
  double max_deviation = 0;  // max |centered mu(t) / exp(-t^T Cov t / 2) - 1|
  std::size_t evaluated = 0;
  std::size_t skipped = 0;   // grid points beyond Var(q)^{-1/2} log^2 q
};

GaussianCheck gaussian_char_check(const RaceModel& model, const spectrum::CovarianceData& cov,
                                  const std::vector<numerics::Vector>& grid);

struct TailBound {
  double value = 0;       // 2 r exp(-R^2 / (4 phi(q) log q))
  bool asserted = false;  // R >= sqrt(phi(q) log q)
};

TailBound tail_bound(Int q, std::size_t r, double radius);

struct TailEstimate {
  double frequency = 0;  // fraction of samples with |X|_inf > R
  std::size_t exceed = 0;
  std::size_t samples = 0;
};

TailEstimate empirical_tail(const RaceModel& model, std::size_t n, double radius,
                            const numerics::RandomStream& stream);
TailEstimate empirical_tail(const SampleBatch& batch, double radius);

struct BigCharSet {
  std::vector<Int> labels;       // nontrivial chi with |sum chi(a_j) t_j| >= |t| / 2
  double floor = 0;              // phi(q) / (2 r)
  bool floor_applicable = false; // 2 <= r <= phi(q) / 4
  bool floor_holds = false;
};

/// Throws invalid-argument for t = 0.
BigCharSet big_char_set(const RaceSpec& spec, const numerics::Vector& t);

enum class Regime { large, middle, small };

struct Envelope {
  Regime regime = Regime::small;
  double log_value = 0;
  double value() const;
};

/// exp(-phi |t| / (8 r)) for |t| >= 400, exp(-phi / log^8 q) for
/// log^-2 q <= |t| <= 400, exp(-phi log q |t|^2 / 4) below; the smaller value on
/// a boundary.
Envelope decay_envelope(Int q, std::size_t r, double norm_t);

struct RegimeTally {
  std::size_t checked = 0;
  std::size_t passed = 0;
  double worst_log_margin = -std::numeric_limits<double>::infinity();  // max log|mu| - log envelope
};

struct EnvelopeReport {
  bool in_range = false;  // r <= c1 log q
  bool skipped = false;   // out of range and not forced
  RegimeTally large, middle, small;
  bool all_pass() const;
};

/// Compares |mu(t)| with the decay envelope. When r > c1 log q the check is
/// skipped unless force is set, in which case it runs and reports in_range = false.
EnvelopeReport envelope_check(const RaceModel& model, const std::vector<numerics::Vector>& points, double c1,
                              bool force = false);

}  // namespace race::racemodel
