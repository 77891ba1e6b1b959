#include "race/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "race/error.hpp"

namespace race::density {

using numerics::Matrix;
using numerics::Vector;

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::monte_carlo: return "monte-carlo";
    case Method::inversion_2way: return "inversion-2way";
    case Method::gaussian_approx: return "gaussian-approx";
    case Method::asymptotic_t11: return "asymptotic-T11";
    case Method::asymptotic_t12: return "asymptotic-T12";
    case Method::upper_bound_t13: return "upper-bound-T13";
  }
  return "unknown";
}

namespace {

double binomial_stderr(double p, std::size_t n) {
  return n ? std::sqrt(p * (1 - p) / static_cast<double>(n)) : 0.0;
}

}  // namespace

OrderingCount count_ordering(const Matrix& samples, const std::vector<std::size_t>& columns) {
  OrderingCount out;
  out.samples = static_cast<std::size_t>(samples.rows());
  std::vector<double> row(columns.size());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) row[j] = samples(i, static_cast<Eigen::Index>(columns[j]));
    bool ordered = true;
    for (std::size_t j = 0; j + 1 < columns.size(); ++j) {
      if (!(row[j] > row[j + 1])) {
        ordered = false;
        break;
      }
    }
    if (ordered) {
      ++out.hits;
      continue;
    }
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) ++out.ties;
  }
  return out;
}

DensityEstimate delta_mc(const racemodel::SampleBatch& batch, const RaceSpec& batch_spec,
                         const std::vector<std::size_t>& columns) {
  std::vector<Int> classes;
  for (std::size_t c : columns) {
    if (c >= batch_spec.r()) throw Error(Errc::invalid_argument, "ordering column out of range");
    classes.push_back(batch_spec.classes()[c]);
  }
  const OrderingCount count = count_ordering(batch.samples, columns);
  DensityEstimate e{RaceSpec(batch_spec.q(), classes)};
  e.method = Method::monte_carlo;
  e.samples = count.samples;
  e.value = count.samples ? static_cast<double>(count.hits) / static_cast<double>(count.samples) : 0.0;
  e.uncertainty = binomial_stderr(e.value, count.samples);
  e.height = batch.height;
  e.seed = batch.seed;
  e.ties = count.ties;
  return e;
}

DensityEstimate delta_mc(const racemodel::RaceModel& model, std::size_t n, const numerics::RandomStream& stream) {
  std::vector<std::size_t> columns(model.r());
  std::iota(columns.begin(), columns.end(), 0);
  return delta_mc(racemodel::sample_x(model, n, stream), model.spec(), columns);
}

PermutationCounts count_all_orderings(const Matrix& samples) {
  const auto r = static_cast<std::size_t>(samples.cols());
  if (r < 1 || r > 8) throw Error(Errc::invalid_argument, "all-orderings tally supports 1 <= r <= 8");
  PermutationCounts out;
  std::vector<std::size_t> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    out.orderings.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  out.counts.assign(out.orderings.size(), 0);
  out.samples = static_cast<std::size_t>(samples.rows());

  // Lexicographic rank of a permutation via the factorial number system.
  std::vector<std::size_t> fact(r + 1, 1);
  for (std::size_t k = 1; k <= r; ++k) fact[k] = fact[k - 1] * k;
  std::vector<std::size_t> order(r);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return samples(i, static_cast<Eigen::Index>(x)) > samples(i, static_cast<Eigen::Index>(y));
    });
    bool tied = false;
    for (std::size_t j = 0; j + 1 < r; ++j) {
      if (samples(i, static_cast<Eigen::Index>(order[j])) == samples(i, static_cast<Eigen::Index>(order[j + 1]))) {
        tied = true;
        break;
      }
    }
    if (tied) {
      ++out.ties;
      continue;
    }
    std::size_t rank = 0;
    for (std::size_t j = 0; j < r; ++j) {
      std::size_t smaller = 0;
      for (std::size_t k = j + 1; k < r; ++k) smaller += order[k] < order[j];
      rank += smaller * fact[r - 1 - j];
    }
    ++out.counts[rank];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-way inversion

DensityEstimate delta_invert_2way(Int a, Int b, const lzeros::ModulusZeroData& zeros) {
  const Int q = zeros.q();
  const RaceSpec spec(q, {a, b});
  a = spec.classes()[0];
  b = spec.classes()[1];
  DensityEstimate e{spec};
  e.method = Method::inversion_2way;
  e.height = zeros.height();
  e.imported_zeros = zeros.any_imported();

  const double shift = static_cast<double>(c_q(b, q) - c_q(a, q));  // E(X_a - X_b)
  if (shift == 0) {
    e.value = 0.5;
    return e;
  }

  // Scaled weights w |chi(a) - chi(b)| for every (chi, gamma); J0 arguments are t times these.
  std::vector<double> scales;
  for (const auto& entry : zeros.entries()) {
    const auto& chi = zeros.table().by_label(entry.label);
    const double diff = std::abs(chi(a) - chi(b));
    if (diff < 1e-15) continue;
    for (double g : entry.zeros->ordinates) scales.push_back(diff * 2.0 / std::sqrt(0.25 + g * g));
  }
  if (scales.empty()) {
    throw Error(Errc::incomplete_zero_data, "no zeros separate classes " + std::to_string(a) + " and " +
                                                std::to_string(b));
  }
  auto log_envelope = [&](double t) {
    double s = 0;
    for (double c : scales) s += std::log(numerics::j0_envelope(c * t));
    return s;
  };
  const double target = std::log(1e-12);
  double hi = 1;
  while (log_envelope(hi) > target) {
    hi *= 2;
    if (hi > 1e7) throw Error(Errc::precision_failure, "characteristic function does not decay");
  }
  double lo = hi / 2;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (log_envelope(mid) > target ? lo : hi) = mid;
  }
  const double t_cut = hi;

  auto integrand = [&](double t) {
    double prod = 1;
    for (double c : scales) prod *= numerics::bessel_j0(c * t);
    return std::sin(shift * t) / t * prod;
  };
  double total = 0;
  double error = 0;
  for (double left = 0; left < t_cut; left += 1.0) {
    const double right = std::min(t_cut, left + 1.0);
    const auto part = numerics::integrate(integrand, left, right, 1e-10, 15);
    total += part.value;
    error += part.error;
  }
  if (!(error < 1e-6)) {
    throw Error(Errc::precision_failure, "inversion quadrature error " + std::to_string(error));
  }
  e.value = std::clamp(0.5 + total / std::numbers::pi, 0.0, 1.0);
  e.uncertainty = (error + 1e-12 * t_cut) / std::numbers::pi;
  return e;
}

// ---------------------------------------------------------------------------
// Gaussian approximation

DensityEstimate delta_gauss(const RaceSpec& spec, const Matrix& correlation, const Vector& normalized_mean,
                            std::size_t n, const numerics::RandomStream& stream) {
  const auto est = numerics::ordering_probability_gaussian(correlation, normalized_mean, n, stream);
  DensityEstimate e{spec};
  e.method = Method::gaussian_approx;
  e.value = est.probability;
  e.uncertainty = est.standard_error;
  e.samples = est.samples;
  e.seed = stream.seed();
  return e;
}

DensityEstimate delta_gauss(const spectrum::CovarianceData& cov, std::size_t n, const numerics::RandomStream& stream,
                            bool centered) {
  const Vector mean = centered ? Vector::Zero(cov.mean.size()) : Vector(cov.mean / std::sqrt(cov.var_q));
  DensityEstimate e = delta_gauss(cov.spec, cov.correlation, mean, n, stream);
  e.height = cov.height;
  return e;
}

// ---------------------------------------------------------------------------
// Asymptotic evaluators

AsymptoticT11 delta_asymptotic_t11(Int q, int r, double c) {
  if (q < 3 || r < 1) throw Error(Errc::invalid_argument, "need q >= 3 and r >= 1");
  const double lq = std::log(static_cast<double>(q));
  AsymptoticT11 out;
  out.baseline = 1.0 / numerics::factorial(r);
  out.envelope = c * r * r / lq;
  out.in_range = r >= 2 && r <= std::sqrt(lq);
  return out;
}

AsymptoticT12 delta_asymptotic_t12(Int q, int r, double c, double epsilon) {
  if (q < 3 || r < 1) throw Error(Errc::invalid_argument, "need q >= 3 and r >= 1");
  const double lq = std::log(static_cast<double>(q));
  const double rd = r;
  AsymptoticT12 out;
  out.log_main = -rd * std::log(rd) + rd;
  out.envelope_log_r = c * std::log(rd);
  out.envelope_r2_log_q = c * rd * rd / lq;
  const double llq = std::log(lq);
  out.in_range = rd >= std::sqrt(lq) && llq > 0 && rd <= (1 - epsilon) * lq / llq;
  return out;
}

UpperT13 delta_upper_t13(Int q, int r, double epsilon, double c) {
  if (!(epsilon > 0 && epsilon < 1)) throw Error(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  const double lq = std::log(static_cast<double>(q));
  const double llq = std::log(lq);
  const double s_real = llq > 0 ? (1 - epsilon / 2) * lq / llq : 0.0;
  UpperT13 out;
  out.s = static_cast<int>(std::floor(s_real));
  if (out.s < 2) {
    throw Error(Errc::q_too_small, "q=" + std::to_string(q) + " gives s=" + std::to_string(out.s) + " < 2");
  }
  const auto t12 = delta_asymptotic_t12(q, out.s, c, epsilon);
  out.bound = std::exp(t12.log_main + t12.log_envelope());
  out.clamped = std::min(1.0, out.bound);
  out.r_in_range = r >= out.s;
  return out;
}

// ---------------------------------------------------------------------------

DecompositionReport ordering_decomposition_check(const Matrix& samples, const std::vector<std::size_t>& base_columns,
                                                 std::size_t inserted_column) {
  if (std::find(base_columns.begin(), base_columns.end(), inserted_column) != base_columns.end()) {
    throw Error(Errc::invalid_argument, "inserted column already in the base ordering");
  }
  const std::size_t r = base_columns.size() + 1;
  DecompositionReport rep;
  rep.insertion_counts.assign(r, 0);
  std::vector<std::size_t> all = base_columns;
  all.push_back(inserted_column);
  std::vector<double> vals(r);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (std::size_t j = 0; j < r; ++j) vals[j] = samples(i, static_cast<Eigen::Index>(all[j]));
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      ++rep.ties;
      continue;
    }
    bool base = true;
    for (std::size_t j = 0; j + 2 < r; ++j) {
      if (!(vals[j] > vals[j + 1])) {
        base = false;
        break;
      }
    }
    if (base) ++rep.base_count;
    // Count each insertion ordering independently of the base test.
    for (std::size_t pos = 0; pos < r; ++pos) {
      std::vector<double> seq(vals.begin(), vals.end() - 1);
      seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(pos), vals.back());
      bool ok = true;
      for (std::size_t j = 0; j + 1 < r; ++j) {
        if (!(seq[j] > seq[j + 1])) {
          ok = false;
          break;
        }
      }
      if (ok) ++rep.insertion_counts[pos];
    }
  }
  rep.insertion_sum = std::accumulate(rep.insertion_counts.begin(), rep.insertion_counts.end(), std::size_t{0});
  rep.exact = rep.insertion_sum == rep.base_count;
  return rep;
}

void write_density_csv_header(std::ostream& out) { out << "q,classes,method,value,uncertainty,T,N,seed\n"; }

void write_density_csv_row(const DensityEstimate& e, std::ostream& out) {
  const auto precision = out.precision(12);
  out << e.spec.q() << ',';
  for (std::size_t j = 0; j < e.spec.r(); ++j) out << (j ? " " : "") << e.spec.classes()[j];
  out << ',' << to_string(e.method) << ',' << e.value << ',' << e.uncertainty << ',' << e.height << ','
      << e.samples << ',' << e.seed << '\n';
  out.precision(precision);
}

}  // namespace race::density
