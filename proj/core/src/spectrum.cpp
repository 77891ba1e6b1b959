#include "race/spectrum.hpp"

#include <cmath>
#include <ostream>

#include "race/error.hpp"

namespace race::spectrum {

Spectrum::Spectrum(const lzeros::ModulusZeroData& zeros, bool tail_correction)
    : table_(zeros.table_ptr()), height_(zeros.height()), tail_correction_(tail_correction) {
  sums_.reserve(zeros.entries().size());
  for (const auto& e : zeros.entries()) {
    CharacterSum s;
    s.label = e.label;
    s.conductor = e.inducer.conductor;
    const auto& g = e.zeros->ordinates;
    s.zero_count = g.size();
    // Smallest terms first.
    for (auto it = g.rbegin(); it != g.rend(); ++it) s.head += 1.0 / (0.25 + *it * *it);
    s.tail = lzeros::tail_second_moment(s.conductor, height_);
    sums_.push_back(s);
  }
}

double Spectrum::weight(std::size_t index) const {
  const auto& s = sums_.at(index);
  return tail_correction_ ? s.head + s.tail : s.head;
}

double Spectrum::variance() const {
  double total = 0;
  for (std::size_t i = 0; i < sums_.size(); ++i) total += weight(i);
  return 2 * total;
}

double Spectrum::variance_tail() const {
  if (!tail_correction_) return 0;
  double total = 0;
  for (const auto& s : sums_) total += s.tail;
  return 2 * total;
}

Spectrum::BValue Spectrum::b_value(Int a, Int b) const {
  const Modulus& m = table_->modulus();
  if (!m.is_unit(a) || !m.is_unit(b)) {
    throw Error(Errc::invalid_class, "B_q needs reduced classes mod " + std::to_string(q()));
  }
  if (m.canonical(a) == m.canonical(b)) throw Error(Errc::invalid_pair, "B_q(a, a) is Var(q)");
  const Int b_over_a = mod_mul(mod(b, q()), mod_inverse(a, q()), q());
  const Int a_over_b = mod_mul(mod(a, q()), mod_inverse(b, q()), q());
  std::complex<double> total = 0;
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    const auto& chi = table_->by_label(sums_[i].label);
    total += (chi(b_over_a) + chi(a_over_b)) * weight(i);
  }
  return {total.real(), std::abs(total.imag())};
}

double variance_q(const lzeros::ModulusZeroData& zeros, bool tail_correction) {
  return Spectrum(zeros, tail_correction).variance();
}

double b_q(Int a, Int b, const lzeros::ModulusZeroData& zeros, bool tail_correction) {
  return Spectrum(zeros, tail_correction).b(a, b);
}

CovarianceData covariance_data(const RaceSpec& spec, const Spectrum& spectrum) {
  if (spec.q() != spectrum.q()) throw Error(Errc::invalid_spec, "race modulus differs from the zero data modulus");
  const auto r = static_cast<Eigen::Index>(spec.r());
  CovarianceData d{spec};
  d.var_q = spectrum.variance();
  d.height = spectrum.height();
  d.tail_correction_applied = spectrum.tail_correction();
  d.b_matrix = numerics::Matrix::Zero(r, r);
  d.mean = numerics::Vector::Zero(r);
  const auto& cls = spec.classes();
  for (Eigen::Index j = 0; j < r; ++j) {
    d.b_matrix(j, j) = d.var_q;
    d.mean(j) = -static_cast<double>(c_q(cls[j], spec.q()));
    for (Eigen::Index k = j + 1; k < r; ++k) {
      const auto bv = spectrum.b_value(cls[j], cls[k]);
      d.b_matrix(j, k) = d.b_matrix(k, j) = bv.value;
      d.max_imag_residual = std::max(d.max_imag_residual, bv.imag_residual);
    }
  }
  d.correlation = d.b_matrix / d.var_q;
  d.correlation.diagonal().setOnes();
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index k = 0; k < r; ++k) {
      if (j != k) d.epsilon = std::max(d.epsilon, std::abs(d.correlation(j, k)));
    }
  }
  d.min_eigenvalue = numerics::min_eigenvalue(d.correlation);
  d.positive_semidefinite = d.min_eigenvalue >= -1e-8;
  if (!d.positive_semidefinite) {
    throw Error(Errc::invalid_covariance,
                "correlation matrix has eigenvalue " + std::to_string(d.min_eigenvalue));
  }
  return d;
}

CovarianceData covariance_data(const RaceSpec& spec, const lzeros::ModulusZeroData& zeros, bool tail_correction) {
  return covariance_data(spec, Spectrum(zeros, tail_correction));
}

void write_covariance_csv(const CovarianceData& data, std::ostream& out) {
  const auto& cls = data.spec.classes();
  const auto precision = out.precision(17);
  out << "row,col,class_row,class_col,covariance,correlation,mean_row\n";
  for (Eigen::Index j = 0; j < data.b_matrix.rows(); ++j) {
    for (Eigen::Index k = 0; k < data.b_matrix.cols(); ++k) {
      out << j << ',' << k << ',' << cls[j] << ',' << cls[k] << ',' << data.b_matrix(j, k) << ','
          << data.correlation(j, k) << ',' << data.mean(j) << '\n';
    }
  }
  out.precision(precision);
}

}  // namespace race::spectrum
