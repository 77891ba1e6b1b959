#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace race::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Special functions

/// Bessel function of the first kind of order 0, absolute error below 1e-12.
/// Power series (extended precision) for |x| <= 16, Hankel expansion beyond.
double bessel_j0(double x);

/// An upper envelope for |J0| that is nonincreasing on [0, inf):
/// exp(-x^2/4) on [0, 1], min(J0(1), sqrt(2/(pi x))) beyond.
double j0_envelope(double x);

struct BesselI0 {
  double value = 0;
  bool saturated = false;  // |s| > 700; value is +inf
};

/// Modified Bessel function I0(s) = sum (s/2)^{2n} / n!^2.
BesselI0 bessel_i0(double s);

// ---------------------------------------------------------------------------
// Quadrature

struct Integral {
  double value = 0;
  double error = 0;
};

/// Adaptive Gauss-Kronrod on [a, b]; b may be +inf.
Integral integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10,
                   unsigned max_depth = 20);

// ---------------------------------------------------------------------------
// Random streams

/// Task kinds used to derive stream ids; distinct kinds never share a stream.
enum class StreamKind : std::uint64_t {
  race_sampling = 1,
  gaussian_ordering = 2,
  fourier_ball = 3,
  class_selection = 4,
  matrix_generation = 5,
  test_points = 6,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// A (seed, stream_id) pair naming one reproducible random sequence.
/// Parallel work splits a stream into substreams indexed by block number, so
/// results never depend on how blocks are scheduled onto threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}
  static RandomStream for_task(std::uint64_t seed, StreamKind kind, std::uint64_t index = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  RandomStream substream(std::uint64_t index) const;
  std::mt19937_64 engine() const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

// ---------------------------------------------------------------------------
// Perturbed identity matrices

/// Symmetric matrix with unit diagonal; epsilon is the largest off-diagonal
/// magnitude.
class PerturbedIdentityMatrix {
 public:
  explicit PerturbedIdentityMatrix(Matrix entries);

  const Matrix& matrix() const noexcept { return a_; }
  Eigen::Index dimension() const noexcept { return a_.rows(); }
  double epsilon() const noexcept { return epsilon_; }
  /// epsilon * r, the quantity the explicit lemma constants are stated in.
  double epsilon_r() const noexcept { return epsilon_ * static_cast<double>(a_.rows()); }

 private:
  Matrix a_;
  double epsilon_ = 0;
};

/// Uniformly random off-diagonal entries in [-eps, eps].
PerturbedIdentityMatrix random_perturbed_identity(int r, double eps, std::mt19937_64& rng);

struct DeterminantReport {
  double determinant = 1;
  double residual = 0;  // max |A - P^T L U|
  bool bound_applicable = false;  // eps r <= 1/2
  double bound = 0;               // 2 (eps r)^2
  bool within_bound = false;
};

DeterminantReport det_perturbed(const PerturbedIdentityMatrix& a);

struct InverseReport {
  Matrix inverse;
  bool bound_applicable = false;
  double max_diagonal_deviation = 0;  // max |inv_jj - 1|
  double max_off_diagonal = 0;        // max |inv_jk|
  double diagonal_bound = 0;          // 8 (eps r)^2
  double off_diagonal_bound = 0;      // 4 eps
  bool within_bounds = false;
};

InverseReport inverse_perturbed(const PerturbedIdentityMatrix& a);

struct QuadraticForm {
  double value = 0;
  bool floor_applicable = false;  // eps <= 1/(2r)
  bool floor_holds = false;       // value >= |t|^2 / 2
};

QuadraticForm quadratic_form_floor(const PerturbedIdentityMatrix& a, const Vector& t);

/// Centered Gaussian density with covariance a, evaluated at x.
double gaussian_density(const Matrix& a, const Vector& x);

struct TruncatedFourier {
  double value = 0;
  double standard_error = 0;  // zero for the deterministic (r <= 3) rules
  double closed_form = 0;     // gaussian_density(A, x)
};

struct FourierOptions {
  std::size_t samples = 1'000'000;  // r >= 4 only
  RandomStream stream{0, static_cast<std::uint64_t>(StreamKind::fourier_ball)};
};

/// (2 pi)^{-r} times the integral over |t| <= R of exp(i<t,x>) exp(-t^T A t / 2).
/// Product quadrature in polar/spherical coordinates for r <= 3, importance
/// sampled Monte Carlo over the ball for r >= 4.
TruncatedFourier gaussian_fourier_truncated(const PerturbedIdentityMatrix& a, const Vector& x, double radius,
                                            const FourierOptions& options = {});

// ---------------------------------------------------------------------------
// Gaussian ordering probabilities

double min_eigenvalue(const Matrix& m);

struct OrderingEstimate {
  double probability = 0;
  double standard_error = 0;
  std::size_t hits = 0;
  std::size_t samples = 0;
};

/// Monte Carlo estimate of P(Z_1 > Z_2 > ... > Z_r) for Z ~ N(mean, c).
/// Throws invalid-covariance when c is not PSD within 1e-8 (scaled).
OrderingEstimate ordering_probability_gaussian(const Matrix& c, const Vector& mean, std::size_t samples,
                                               const RandomStream& stream);
OrderingEstimate ordering_probability_gaussian(const Matrix& c, std::size_t samples, const RandomStream& stream);

/// 1 / (r! (1 + kappa)^{r/2}); throws invalid-scale for kappa <= -1.
double scaled_identity_order_integral(double kappa, int r);

double factorial(int n);

}  // namespace race::numerics
