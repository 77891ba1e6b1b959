#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "race/config.hpp"
#include "race/error.hpp"
#include "race/racemodel.hpp"
#include "test_support.hpp"

using namespace race;
using namespace race::racemodel;
using numerics::RandomStream;
using numerics::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

RaceModel model_for(Int q, std::vector<Int> classes, double height = 200.0) {
  return RaceModel(RaceSpec(q, std::move(classes)), race::testing::modulus_zeros(q, height));
}

}  // namespace

TEST(RaceModel, MeanIsMinusSquareRootCount) {
  const auto m = model_for(8, {1, 3, 5});
  EXPECT_EQ(m.mean()(0), -3.0);
  EXPECT_EQ(m.mean()(1), 1.0);
  EXPECT_EQ(m.mean()(2), 1.0);
  EXPECT_EQ(m.characters().size(), 3u);
  EXPECT_EQ(m.with_mean(Vector::Zero(3)).mean().norm(), 0.0);
}

TEST(RaceModel, PhaseCountIsTotalOrdinates) {
  const auto& data = race::testing::modulus_zeros(5, 200.0);
  const auto m = model_for(5, {1, 2});
  EXPECT_EQ(m.phase_count(), data.total_ordinates());
}

TEST(SampleX, DeterministicForSeed) {
  const auto m = model_for(5, {2, 3});
  const auto a = sample_x(m, 5000, RandomStream(9, 1));
  const auto b = sample_x(m, 5000, RandomStream(9, 1));
  const auto c = sample_x(m, 5000, RandomStream(10, 1));
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  EXPECT_EQ(a.size(), 5000u);
}

TEST(SampleX, MomentsMatchSpectrum) {
  const auto m = model_for(5, {1, 2, 4});
  const auto& data = race::testing::modulus_zeros(5, 200.0);
  const auto cov = spectrum::covariance_data(m.spec(), data, false);
  const auto batch = sample_x(m, 200000, RandomStream(3, 1));
  const Vector mean = batch.samples.colwise().mean();
  const Eigen::MatrixXd centered = batch.samples.rowwise() - mean.transpose();
  const Eigen::MatrixXd sample_cov = centered.transpose() * centered / static_cast<double>(batch.size() - 1);
  const double sd = std::sqrt(cov.var_q / static_cast<double>(batch.size()));
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(mean(j), m.mean()(j), 5 * sd);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(sample_cov(j, k), cov.b_matrix(j, k), 0.02 * cov.var_q);
  }
}

TEST(SampleX, SingleZeroTermIsBounded) {
  // With one ordinate gamma, X - E X = Re(w chi(a) U) with |U| = 1 and w = 2 / sqrt(1/4 + gamma^2).
  lzeros::ZeroSet z;
  z.conductor = 4;
  z.conrey_index = 3;
  z.height = 10.0;
  z.ordinates = {6.020948904697597};
  const auto data = lzeros::modulus_zeros_from_sets(4, 10.0, {{{4, 3}, z}});
  const RaceModel m(RaceSpec(4, {1, 3}), data);
  const double w = 2 / std::sqrt(0.25 + z.ordinates[0] * z.ordinates[0]);
  const auto batch = sample_x(m, 20000, RandomStream(4, 1));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ASSERT_LE(std::fabs(batch.samples(i, 0) - m.mean()(0)), w + 1e-12);
    ASSERT_NEAR(batch.samples(i, 0) - m.mean()(0), -(batch.samples(i, 1) - m.mean()(1)), 1e-12);
  }
}

TEST(CharFunction, BasicProperties) {
  const auto m = model_for(7, {1, 3, 5});
  const auto zero = char_function(m, Vector::Zero(3));
  EXPECT_NEAR(zero.value.real(), 1.0, 1e-15);
  EXPECT_EQ(zero.log_abs, 0.0);
  for (const auto& t : {vec({0.1, -0.2, 0.05}), vec({1.0, 0.5, -2.0})}) {
    const auto v = char_function(m, t);
    const auto w = char_function(m, -t);
    EXPECT_LE(std::abs(v.value), 1.0 + 1e-15);
    EXPECT_NEAR(v.value.real(), w.value.real(), 1e-14);
    EXPECT_NEAR(v.value.imag(), -w.value.imag(), 1e-14);
    EXPECT_NEAR(std::abs(v.value), std::abs(centered_char_function(m, t).value), 1e-14);
  }
}

TEST(CharFunction, MatchesEmpiricalTransform) {
  const auto m = model_for(5, {1, 2});
  const auto batch = sample_x(m, 200000, RandomStream(5, 1));
  for (const auto& t : {vec({0.1, 0.0}), vec({0.2, -0.3}), vec({0.05, 0.4})}) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double dot = batch.samples.row(static_cast<Eigen::Index>(i)).dot(t);
      acc += std::polar(1.0, -dot);
    }
    acc /= static_cast<double>(batch.size());
    EXPECT_LT(std::abs(acc - char_function(m, t).value), 5 / std::sqrt(static_cast<double>(batch.size())));
  }
}

TEST(CharFunction, GaussianApproximationImprovesWithModulus) {
  double previous = 1e9;
  for (Int q : {11, 61}) {
    const double h = RunConfig{}.height_for(q);
    const RaceModel m(RaceSpec(q, {1, 2}), race::testing::modulus_zeros(q, h));
    const auto cov = spectrum::covariance_data(m.spec(), race::testing::modulus_zeros(q, h));
    std::vector<Vector> grid;
    const double s = 1 / std::sqrt(cov.var_q);
    for (int i = -4; i <= 4; ++i) {
      for (int j = -4; j <= 4; ++j) grid.push_back(vec({0.5 * i * s, 0.5 * j * s}));
    }
    const auto check = gaussian_char_check(m, cov, grid);
    EXPECT_EQ(check.evaluated, grid.size());
    EXPECT_LT(check.max_deviation, previous);
    previous = check.max_deviation;
  }
}

TEST(TailBound, FormulaAndMonotonicity) {
  const double phi_log = 4 * std::log(5.0);
  const auto b = tail_bound(5, 2, 10.0);
  EXPECT_NEAR(b.value, 4 * std::exp(-100 / (4 * phi_log)), 1e-15);
  EXPECT_TRUE(b.asserted);
  EXPECT_FALSE(tail_bound(5, 2, 0.5 * std::sqrt(phi_log)).asserted);
  EXPECT_GT(tail_bound(5, 2, 5.0).value, tail_bound(5, 2, 6.0).value);
}

TEST(TailBound, EmpiricalFrequencyBelowBound) {
  const auto m = model_for(5, {1, 2, 3});
  const auto batch = sample_x(m, 100000, RandomStream(6, 1));
  for (double radius : {5.0, 8.0, 12.0}) {
    const auto est = empirical_tail(batch, radius);
    const auto bound = tail_bound(5, 3, radius);
    if (bound.asserted) {
      EXPECT_LE(est.frequency, bound.value) << radius;
    }
  }
  EXPECT_EQ(empirical_tail(batch, 0.0).frequency, 1.0);
}

TEST(BigCharSet, UnitVectorSelectsEveryCharacter) {
  const auto set = big_char_set(RaceSpec(5, {1, 2}), vec({1.0, 0.0}));
  EXPECT_EQ(set.labels.size(), 3u);
}

TEST(BigCharSet, ClosedUnderConjugationForRealVectors) {
  const RaceSpec spec(13, {1, 2, 5});
  const auto table = build_character_table(13);
  const auto set = big_char_set(spec, vec({0.7, -0.4, 0.2}));
  for (Int label : set.labels) {
    EXPECT_NE(std::find(set.labels.begin(), set.labels.end(), table->conjugate_label(label)), set.labels.end());
  }
  EXPECT_TRUE(set.floor_applicable);
  EXPECT_TRUE(set.floor_holds);
  EXPECT_GE(static_cast<double>(set.labels.size()), set.floor);
}

TEST(BigCharSet, ZeroVectorIsRejected) {
  EXPECT_THROW(big_char_set(RaceSpec(5, {1, 2}), Vector::Zero(2)), Error);
}

TEST(DecayEnvelope, RegimeValues) {
  EXPECT_EQ(decay_envelope(61, 2, 0.0).value(), 1.0);
  EXPECT_EQ(decay_envelope(61, 2, 0.0).regime, Regime::small);
  const auto mid = decay_envelope(61, 2, 1.0);
  EXPECT_EQ(mid.regime, Regime::middle);
  EXPECT_NEAR(mid.log_value, -60 / std::pow(std::log(61.0), 8), 1e-15);
  const auto big = decay_envelope(61, 2, 500.0);
  EXPECT_EQ(big.regime, Regime::large);
  EXPECT_NEAR(big.log_value, -60 * 500.0 / 16, 1e-9);
}

TEST(EnvelopeCheck, SkippedOutsidePreconditionUnlessForced) {
  const auto m = model_for(5, {1, 2});
  const std::vector<Vector> pts{vec({0.5, 0.5})};
  const auto skipped = envelope_check(m, pts, 0.1);
  EXPECT_TRUE(skipped.skipped);
  EXPECT_FALSE(skipped.all_pass());
  const auto forced = envelope_check(m, pts, 0.1, true);
  EXPECT_FALSE(forced.skipped);
  EXPECT_FALSE(forced.in_range);
  EXPECT_EQ(forced.middle.checked, 1u);
}
