#include "race/racemodel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include "race/error.hpp"
#include "race/parallel.hpp"

namespace race::racemodel {

using numerics::Vector;
using cplx = std::complex<double>;

RaceModel::RaceModel(RaceSpec spec, const lzeros::ModulusZeroData& zeros)
    : spec_(std::move(spec)), height_(zeros.height()) {
  if (spec_.q() != zeros.q()) throw Error(Errc::invalid_spec, "race modulus differs from the zero data modulus");
  const auto& cls = spec_.classes();
  mean_ = Vector(static_cast<Eigen::Index>(cls.size()));
  for (std::size_t j = 0; j < cls.size(); ++j) {
    mean_(static_cast<Eigen::Index>(j)) = -static_cast<double>(c_q(cls[j], spec_.q()));
  }
  for (const auto& e : zeros.entries()) {
    ModelCharacter mc;
    mc.label = e.label;
    const auto& chi = zeros.table().by_label(e.label);
    for (Int a : cls) mc.values.push_back(chi(a));
    mc.weights.reserve(e.zeros->ordinates.size());
    for (double g : e.zeros->ordinates) mc.weights.push_back(2.0 / std::sqrt(0.25 + g * g));
    characters_.push_back(std::move(mc));
  }
  if (phase_count() == 0) {
    throw Error(Errc::incomplete_zero_data, "no zeros below T=" + lzeros::format_height(height_) + " mod " +
                                                std::to_string(spec_.q()));
  }
}

std::size_t RaceModel::phase_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : characters_) n += c.weights.size();
  return n;
}

RaceModel RaceModel::with_mean(Vector mean) const {
  if (mean.size() != mean_.size()) throw Error(Errc::invalid_argument, "mean has the wrong dimension");
  RaceModel copy = *this;
  copy.mean_ = std::move(mean);
  return copy;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

constexpr int kPhaseBits = 12;
constexpr std::size_t kTableSize = std::size_t{1} << kPhaseBits;
constexpr std::size_t kBlock = 4096;

// e^{2 pi i k / 2^12} and e^{2 pi i k / 2^24}: a 24-bit phase is one product.
struct PhaseTables {
  std::array<double, kTableSize> coarse_re, coarse_im, fine_re, fine_im;
  PhaseTables() {
    for (std::size_t k = 0; k < kTableSize; ++k) {
      const double a = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(kTableSize);
      const double b = a / static_cast<double>(kTableSize);
      coarse_re[k] = std::cos(a);
      coarse_im[k] = std::sin(a);
      fine_re[k] = std::cos(b);
      fine_im[k] = std::sin(b);
    }
  }
};

const PhaseTables& phase_tables() {
  static const PhaseTables tables;
  return tables;
}

// sum_g w_g e^{i theta_g} with two 24-bit phases per 64-bit draw.
cplx random_phase_sum(const std::vector<double>& w, std::mt19937_64& eng, const PhaseTables& pt) {
  constexpr std::uint64_t mask = kTableSize - 1;
  double re = 0;
  double im = 0;
  auto add = [&](double weight, std::uint64_t bits) {
    const std::size_t hi = (bits >> kPhaseBits) & mask;
    const std::size_t lo = bits & mask;
    const double cr = pt.coarse_re[hi], ci = pt.coarse_im[hi];
    const double fr = pt.fine_re[lo], fi = pt.fine_im[lo];
    re += weight * (cr * fr - ci * fi);
    im += weight * (cr * fi + ci * fr);
  };
  const std::size_t n = w.size();
  std::size_t g = 0;
  for (; g + 1 < n; g += 2) {
    const std::uint64_t u = eng();
    add(w[g], u);
    add(w[g + 1], u >> 24);
  }
  if (g < n) add(w[g], eng());
  return {re, im};
}

}  // namespace

SampleBatch sample_x(const RaceModel& model, std::size_t n, const numerics::RandomStream& stream) {
  if (n == 0) throw Error(Errc::invalid_argument, "sample count must be positive");
  const auto r = static_cast<Eigen::Index>(model.r());
  SampleBatch batch;
  batch.samples.resize(static_cast<Eigen::Index>(n), r);
  batch.seed = stream.seed();
  batch.stream_id = stream.stream_id();
  batch.height = model.height();
  const auto& pt = phase_tables();
  const auto& chars = model.characters();
  const Vector& mean = model.mean();

  parallel_for((n + kBlock - 1) / kBlock, [&](std::size_t b) {
    auto eng = stream.substream(b).engine();
    std::vector<cplx> s(chars.size());
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      for (std::size_t c = 0; c < chars.size(); ++c) s[c] = random_phase_sum(chars[c].weights, eng, pt);
      for (Eigen::Index j = 0; j < r; ++j) {
        double x = mean(j);
        for (std::size_t c = 0; c < chars.size(); ++c) {
          const cplx v = chars[c].values[static_cast<std::size_t>(j)];
          x += v.real() * s[c].real() - v.imag() * s[c].imag();
        }
        batch.samples(static_cast<Eigen::Index>(i), j) = x;
      }
    }
  });
  return batch;
}

void write_samples_csv(const SampleBatch& batch, const RaceSpec& spec, std::ostream& out) {
  const auto precision = out.precision(17);
  for (std::size_t j = 0; j < spec.r(); ++j) out << (j ? "," : "") << "x_" << spec.classes()[j];
  out << '\n';
  for (Eigen::Index i = 0; i < batch.samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < batch.samples.cols(); ++j) out << (j ? "," : "") << batch.samples(i, j);
    out << '\n';
  }
  out.precision(precision);
}

// ---------------------------------------------------------------------------
// Characteristic function

CharValue centered_char_function(const RaceModel& model, const Vector& t) {
  if (static_cast<std::size_t>(t.size()) != model.r()) throw Error(Errc::invalid_argument, "t has the wrong dimension");
  double log_abs = 0;
  bool negative = false;
  for (const auto& c : model.characters()) {
    cplx lin = 0;
    for (std::size_t j = 0; j < c.values.size(); ++j) lin += c.values[j] * t(static_cast<Eigen::Index>(j));
    const double m = std::abs(lin);
    if (m == 0) continue;
    for (double w : c.weights) {
      const double j0 = numerics::bessel_j0(w * m);
      if (j0 < 0) negative = !negative;
      log_abs += std::log(std::abs(j0));
    }
  }
  const double mag = std::exp(log_abs);
  return {cplx(negative ? -mag : mag, 0.0), log_abs};
}

CharValue char_function(const RaceModel& model, const Vector& t) {
  CharValue v = centered_char_function(model, t);
  // The mean is -C, so the bias phase is exp(i sum C_j t_j) = exp(-i <mean, t>).
  v.value *= std::polar(1.0, -model.mean().dot(t));
  return v;
}

GaussianCheck gaussian_char_check(const RaceModel& model, const spectrum::CovarianceData& cov,
                                  const std::vector<Vector>& grid) {
  const double lq = std::log(static_cast<double>(model.spec().q()));
  const double limit = lq * lq / std::sqrt(cov.var_q);
  GaussianCheck out;
  for (const auto& t : grid) {
    if (t.norm() > limit * (1 + 1e-12)) {
      ++out.skipped;
      continue;
    }
    const CharValue mu = centered_char_function(model, t);
    const double log_gauss = -0.5 * t.dot(cov.b_matrix * t);
    const double ratio = (mu.value.real() < 0 ? -1.0 : 1.0) * std::exp(mu.log_abs - log_gauss);
    out.max_deviation = std::max(out.max_deviation, std::abs(ratio - 1.0));
    ++out.evaluated;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tail bound

TailBound tail_bound(Int q, std::size_t r, double radius) {
  const Modulus m(q);
  const double scale = static_cast<double>(m.phi()) * std::log(static_cast<double>(q));
  return {2.0 * static_cast<double>(r) * std::exp(-radius * radius / (4 * scale)), radius >= std::sqrt(scale)};
}

TailEstimate empirical_tail(const SampleBatch& batch, double radius) {
  TailEstimate out;
  out.samples = batch.size();
  for (Eigen::Index i = 0; i < batch.samples.rows(); ++i) {
    if (batch.samples.row(i).cwiseAbs().maxCoeff() > radius) ++out.exceed;
  }
  out.frequency = out.samples ? static_cast<double>(out.exceed) / static_cast<double>(out.samples) : 0.0;
  return out;
}

TailEstimate empirical_tail(const RaceModel& model, std::size_t n, double radius,
                            const numerics::RandomStream& stream) {
  return empirical_tail(sample_x(model, n, stream), radius);
}

// ---------------------------------------------------------------------------
// Character sets and decay envelopes

BigCharSet big_char_set(const RaceSpec& spec, const Vector& t) {
  const std::size_t r = spec.r();
  if (static_cast<std::size_t>(t.size()) != r) throw Error(Errc::invalid_argument, "t has the wrong dimension");
  const double norm = t.norm();
  if (norm == 0) throw Error(Errc::invalid_argument, "t must be nonzero");
  auto table = build_character_table(spec.q());
  BigCharSet out;
  for (const auto* chi : table->nontrivial()) {
    cplx lin = 0;
    for (std::size_t j = 0; j < r; ++j) lin += (*chi)(spec.classes()[j]) * t(static_cast<Eigen::Index>(j));
    // Tolerance for exactly balanced cases such as |chi(a)| = |t| / 2.
    if (std::abs(lin) >= norm / 2 - 1e-12 * norm) out.labels.push_back(chi->conrey_index());
  }
  const double phi = static_cast<double>(spec.modulus().phi());
  out.floor = phi / (2.0 * static_cast<double>(r));
  out.floor_applicable = r >= 2 && 4.0 * static_cast<double>(r) <= phi;
  out.floor_holds = static_cast<double>(out.labels.size()) >= out.floor;
  return out;
}

double Envelope::value() const { return std::exp(log_value); }

Envelope decay_envelope(Int q, std::size_t r, double norm_t) {
  const double phi = static_cast<double>(Modulus(q).phi());
  const double lq = std::log(static_cast<double>(q));
  const double low = 1.0 / (lq * lq);
  const double large = -phi * norm_t / (8.0 * static_cast<double>(r));
  const double middle = -phi / std::pow(lq, 8);
  const double small = -0.25 * phi * lq * norm_t * norm_t;
  if (norm_t > 400) return {Regime::large, large};
  if (norm_t == 400) return large <= middle ? Envelope{Regime::large, large} : Envelope{Regime::middle, middle};
  if (norm_t > low) return {Regime::middle, middle};
  if (norm_t == low) return small <= middle ? Envelope{Regime::small, small} : Envelope{Regime::middle, middle};
  return {Regime::small, small};
}

bool EnvelopeReport::all_pass() const {
  return !skipped && large.passed == large.checked && middle.passed == middle.checked &&
         small.passed == small.checked;
}

EnvelopeReport envelope_check(const RaceModel& model, const std::vector<Vector>& points, double c1, bool force) {
  EnvelopeReport report;
  const Int q = model.spec().q();
  report.in_range = static_cast<double>(model.r()) <= c1 * std::log(static_cast<double>(q));
  if (!report.in_range && !force) {
    report.skipped = true;
    return report;
  }
  for (const auto& t : points) {
    const Envelope env = decay_envelope(q, model.r(), t.norm());
    const double log_mu = centered_char_function(model, t).log_abs;
    RegimeTally& tally = env.regime == Regime::large ? report.large
                         : env.regime == Regime::middle ? report.middle
                                                        : report.small;
    ++tally.checked;
    // |mu| = exp(log_mu) <= exp(log env); equality at t = 0.
    if (log_mu <= env.log_value + 1e-12) ++tally.passed;
    tally.worst_log_margin = std::max(tally.worst_log_margin, log_mu - env.log_value);
  }
  return report;
}

}  // namespace race::racemodel
