#include "race/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "race/error.hpp"
#include "race/parallel.hpp"

namespace race {

unsigned worker_count() {
  if (const char* env = std::getenv("RACE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace race

namespace race::numerics {

namespace {

constexpr double kPi = std::numbers::pi;

double j0_series(double x) {
  const long double y = static_cast<long double>(x) * x / 4.0L;
  long double term = 1.0L, sum = 1.0L;
  for (int m = 1; m < 200; ++m) {
    term *= -y / (static_cast<long double>(m) * m);
    sum += term;
    if (std::fabs(term) < 1e-22L && m > x) break;
  }
  return static_cast<double>(sum);
}

double j0_hankel(double x) {
  // a_k = a_{k-1} * (-(2k-1)^2) / (8k); P takes even k, Q odd k.
  double p = 1.0, q = 0.0;
  double a = 1.0, xk = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    a *= -static_cast<double>((2 * k - 1) * (2 * k - 1)) / (8.0 * k);
    xk *= x;
    const double term = a / xk;
    if (std::fabs(term) >= previous) break;
    previous = std::fabs(term);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q += sign * term;
    }
    if (std::fabs(term) < 1e-17) break;
  }
  const double chi = x - kPi / 4;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double x) {
  x = std::fabs(x);
  return x <= 16.0 ? j0_series(x) : j0_hankel(x);
}

double j0_envelope(double x) {
  x = std::fabs(x);
  if (x <= 1.0) return std::exp(-x * x / 4);
  constexpr double j0_at_one = 0.76519768655796655145;
  return std::min(j0_at_one, std::sqrt(2.0 / (kPi * x)));
}

BesselI0 bessel_i0(double s) {
  s = std::fabs(s);
  if (s > 700.0) return {std::numeric_limits<double>::infinity(), true};
  const double y = s * s / 4;
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 2000; ++n) {
    term *= y / (static_cast<double>(n) * n);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return {sum, false};
}

Integral integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, unsigned max_depth) {
  Integral out;
  out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &out.error);
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::for_task(std::uint64_t seed, StreamKind kind, std::uint64_t index) {
  return RandomStream(seed, splitmix64(static_cast<std::uint64_t>(kind) * 0x100000001b3ULL ^ splitmix64(index)));
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  return RandomStream(seed_, splitmix64(stream_id_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

std::mt19937_64 RandomStream::engine() const {
  const std::uint64_t a = splitmix64(seed_);
  const std::uint64_t b = splitmix64(stream_id_ ^ a);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------

PerturbedIdentityMatrix::PerturbedIdentityMatrix(Matrix entries) : a_(std::move(entries)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) throw Error(Errc::invalid_argument, "matrix must be square and nonempty");
  for (Eigen::Index j = 0; j < a_.rows(); ++j) {
    if (a_(j, j) != 1.0) throw Error(Errc::invalid_argument, "diagonal entries must equal 1");
    for (Eigen::Index k = j + 1; k < a_.cols(); ++k) {
      if (a_(j, k) != a_(k, j)) throw Error(Errc::invalid_argument, "matrix must be symmetric");
      epsilon_ = std::max(epsilon_, std::fabs(a_(j, k)));
    }
  }
}

PerturbedIdentityMatrix random_perturbed_identity(int r, double eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-eps, eps);
  Matrix a = Matrix::Identity(r, r);
  for (int j = 0; j < r; ++j) {
    for (int k = j + 1; k < r; ++k) a(j, k) = a(k, j) = u(rng);
  }
  return PerturbedIdentityMatrix(std::move(a));
}

DeterminantReport det_perturbed(const PerturbedIdentityMatrix& a) {
  Eigen::PartialPivLU<Matrix> lu(a.matrix());
  DeterminantReport out;
  out.determinant = lu.determinant();
  if (!(std::fabs(out.determinant) > 1e-14)) throw Error(Errc::singular_matrix, "determinant vanishes to machine precision");
  out.residual = (lu.reconstructedMatrix() - a.matrix()).cwiseAbs().maxCoeff();
  const double er = a.epsilon_r();
  out.bound_applicable = er <= 0.5;
  out.bound = 2 * er * er;
  out.within_bound = std::fabs(out.determinant - 1) <= out.bound;
  return out;
}

InverseReport inverse_perturbed(const PerturbedIdentityMatrix& a) {
  Eigen::PartialPivLU<Matrix> lu(a.matrix());
  if (!(std::fabs(lu.determinant()) > 1e-14)) throw Error(Errc::singular_matrix, "matrix is singular to machine precision");
  InverseReport out;
  out.inverse = lu.inverse();
  const Eigen::Index r = a.dimension();
  for (Eigen::Index j = 0; j < r; ++j) {
    out.max_diagonal_deviation = std::max(out.max_diagonal_deviation, std::fabs(out.inverse(j, j) - 1));
    for (Eigen::Index k = 0; k < r; ++k) {
      if (k != j) out.max_off_diagonal = std::max(out.max_off_diagonal, std::fabs(out.inverse(j, k)));
    }
  }
  const double er = a.epsilon_r();
  out.bound_applicable = er <= 0.5;
  out.diagonal_bound = 8 * er * er;
  out.off_diagonal_bound = 4 * a.epsilon();
  out.within_bounds = out.max_diagonal_deviation <= out.diagonal_bound && out.max_off_diagonal <= out.off_diagonal_bound;
  return out;
}

QuadraticForm quadratic_form_floor(const PerturbedIdentityMatrix& a, const Vector& t) {
  QuadraticForm out;
  out.value = t.dot(a.matrix() * t);
  out.floor_applicable = a.epsilon() <= 1.0 / (2.0 * static_cast<double>(a.dimension()));
  out.floor_holds = out.value >= 0.5 * t.squaredNorm();
  return out;
}

double gaussian_density(const Matrix& a, const Vector& x) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw Error(Errc::invalid_covariance, "covariance is not positive definite");
  const Vector y = llt.matrixL().solve(x);
  const double log_det = 2 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double r = static_cast<double>(a.rows());
  return std::exp(-0.5 * y.squaredNorm() - 0.5 * log_det - 0.5 * r * std::log(2 * kPi));
}

namespace {

// Gauss-Legendre panels of width <= h over [lo, hi].
template <class F>
double panel_sum(F&& f, double lo, double hi, double h) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  if (hi <= lo) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
  const double w = (hi - lo) / panels;
  double sum = 0;
  for (int p = 0; p < panels; ++p) sum += rule::integrate(f, lo + p * w, lo + (p + 1) * w);
  return sum;
}

// Beyond this radius exp(-|t|^2/4) |t|^2 is below double resolution.
constexpr double kRadialCutoff = 16.0;

double radial_integral(const std::function<double(double)>& f, double radius) {
  const double inner = std::min(radius, kRadialCutoff);
  double sum = panel_sum(f, 0.0, inner, 0.5);
  if (radius > inner) sum += panel_sum(f, inner, radius, radius - inner);
  return sum;
}

}  // namespace

TruncatedFourier gaussian_fourier_truncated(const PerturbedIdentityMatrix& pa, const Vector& x, double radius,
                                            const FourierOptions& options) {
  const Matrix& a = pa.matrix();
  const int r = static_cast<int>(a.rows());
  if (x.size() != r) throw Error(Errc::invalid_argument, "x has the wrong dimension");
  if (!(radius > 0)) throw Error(Errc::invalid_argument, "radius must be positive");
  TruncatedFourier out;
  out.closed_form = gaussian_density(a, x);

  const double rho_max = std::min(radius, kRadialCutoff);
  const double xn = x.norm();
  const int angular = 64 + 4 * static_cast<int>(std::ceil(rho_max * xn + rho_max * rho_max * pa.epsilon()));

  if (r == 1) {
    auto f = [&](double t) { return std::cos(t * x(0)) * std::exp(-0.5 * a(0, 0) * t * t); };
    out.value = 2 * radial_integral(f, radius) / (2 * kPi);
  } else if (r == 2) {
    std::vector<double> dir_dot_x(angular), dir_form(angular);
    for (int k = 0; k < angular; ++k) {
      const double phi = 2 * kPi * k / angular;
      Vector u(2);
      u << std::cos(phi), std::sin(phi);
      dir_dot_x[k] = u.dot(x);
      dir_form[k] = u.dot(a * u);
    }
    auto f = [&](double rho) {
      double s = 0;
      for (int k = 0; k < angular; ++k) s += std::cos(rho * dir_dot_x[k]) * std::exp(-0.5 * rho * rho * dir_form[k]);
      return rho * s * (2 * kPi / angular);
    };
    out.value = radial_integral(f, radius) / std::pow(2 * kPi, 2);
  } else if (r == 3) {
    using rule = boost::math::quadrature::gauss<double, 20>;
    const int theta_panels = std::max(2, angular / 40);
    std::vector<double> dir_dot_x, dir_form, weight;
    const auto& nodes = rule::abscissa();
    const auto& weights = rule::weights();
    for (int p = 0; p < theta_panels; ++p) {
      const double lo = -1.0 + 2.0 * p / theta_panels, hi = -1.0 + 2.0 * (p + 1) / theta_panels;
      const double mid = (lo + hi) / 2, half = (hi - lo) / 2;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int sign : {-1, 1}) {
          if (nodes[i] == 0 && sign < 0) continue;
          const double c = mid + sign * half * nodes[i];
          const double s = std::sqrt(std::max(0.0, 1 - c * c));
          for (int k = 0; k < angular; ++k) {
            const double phi = 2 * kPi * k / angular;
            Vector u(3);
            u << s * std::cos(phi), s * std::sin(phi), c;
            dir_dot_x.push_back(u.dot(x));
            dir_form.push_back(u.dot(a * u));
            weight.push_back(half * weights[i] * 2 * kPi / angular);
          }
        }
      }
    }
    auto f = [&](double rho) {
      double s = 0;
      for (std::size_t k = 0; k < weight.size(); ++k) {
        s += weight[k] * std::cos(rho * dir_dot_x[k]) * std::exp(-0.5 * rho * rho * dir_form[k]);
      }
      return rho * rho * s;
    };
    out.value = radial_integral(f, radius) / std::pow(2 * kPi, 3);
  } else {
    // Importance sampling from N(0, 2I); exp(-t^T A t/2) <= exp(-|t|^2/4)
    // whenever A has off-diagonal entries below 1/(2r), so weights stay bounded.
    const std::size_t n = std::max<std::size_t>(options.samples, 1);
    constexpr std::size_t block = 8192;
    const std::size_t blocks = (n + block - 1) / block;
    std::vector<double> sums(blocks), squares(blocks);
    const double log_norm = -r * std::log(2 * kPi) + 0.5 * r * std::log(4 * kPi);
    parallel_for(blocks, [&](std::size_t b) {
      auto rng = options.stream.substream(b).engine();
      std::normal_distribution<double> g(0.0, std::numbers::sqrt2);
      Vector t(r);
      const std::size_t count = std::min(block, n - b * block);
      double s = 0, s2 = 0;
      for (std::size_t i = 0; i < count; ++i) {
        for (int j = 0; j < r; ++j) t(j) = g(rng);
        const double t2 = t.squaredNorm();
        double w = 0;
        if (t2 <= radius * radius) {
          w = std::cos(t.dot(x)) * std::exp(-0.5 * t.dot(a * t) + 0.25 * t2 + log_norm);
        }
        s += w;
        s2 += w * w;
      }
      sums[b] = s;
      squares[b] = s2;
    });
    double s = 0, s2 = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      s += sums[b];
      s2 += squares[b];
    }
    const double mean = s / static_cast<double>(n);
    const double var = std::max(0.0, s2 / static_cast<double>(n) - mean * mean);
    out.value = mean;
    out.standard_error = std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

// ---------------------------------------------------------------------------

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

OrderingEstimate ordering_probability_gaussian(const Matrix& c, const Vector& mean, std::size_t samples,
                                               const RandomStream& stream) {
  const Eigen::Index r = c.rows();
  if (c.cols() != r || mean.size() != r || r < 1) throw Error(Errc::invalid_argument, "dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw Error(Errc::invalid_covariance, "covariance has eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  }
  const Matrix factor = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  constexpr std::size_t block = 8192;
  const std::size_t blocks = (samples + block - 1) / block;
  std::vector<std::size_t> hits(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    auto rng = stream.substream(b).engine();
    std::normal_distribution<double> g;
    Vector z(r), y(r);
    const std::size_t count = std::min(block, samples - b * block);
    std::size_t h = 0;
    for (std::size_t i = 0; i < count; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) z(j) = g(rng);
      y.noalias() = mean + factor * z;
      bool ordered = true;
      for (Eigen::Index j = 0; j + 1 < r && ordered; ++j) ordered = y(j) > y(j + 1);
      h += ordered;
    }
    hits[b] = h;
  });
  OrderingEstimate out;
  out.samples = samples;
  for (std::size_t h : hits) out.hits += h;
  out.probability = samples ? static_cast<double>(out.hits) / static_cast<double>(samples) : 0.0;
  out.standard_error = samples ? std::sqrt(out.probability * (1 - out.probability) / static_cast<double>(samples)) : 0.0;
  return out;
}

OrderingEstimate ordering_probability_gaussian(const Matrix& c, std::size_t samples, const RandomStream& stream) {
  return ordering_probability_gaussian(c, Vector::Zero(c.rows()), samples, stream);
}

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double scaled_identity_order_integral(double kappa, int r) {
  if (!(kappa > -1)) throw Error(Errc::invalid_scale, "kappa must exceed -1");
  if (r < 1) throw Error(Errc::invalid_argument, "r must be positive");
  return 1.0 / (factorial(r) * std::pow(1 + kappa, 0.5 * r));
}

}  // namespace race::numerics
