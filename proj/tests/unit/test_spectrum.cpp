#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "race/config.hpp"
#include "race/error.hpp"
#include "race/spectrum.hpp"
#include "test_support.hpp"

using namespace race;
using namespace race::spectrum;

namespace {

double height(Int q) { return RunConfig{}.height_for(q); }

const Spectrum& spectrum_for(Int q) {
  static std::map<Int, std::unique_ptr<Spectrum>> cache;
  auto& s = cache[q];
  if (!s) s = std::make_unique<Spectrum>(race::testing::modulus_zeros(q, height(q)));
  return *s;
}

double ratio(Int q) {
  const Modulus m(q);
  return spectrum_for(q).variance() / (static_cast<double>(m.phi()) * std::log(static_cast<double>(q)));
}

}  // namespace

TEST(Spectrum, DefaultHeights) {
  EXPECT_EQ(height(3), 1000.0);
  EXPECT_EQ(height(61), 197.0);
  EXPECT_EQ(height(151), 100.0);
}

TEST(Spectrum, VarianceMatchesExplicitFormula) {
  for (Int q : {3, 4, 5, 8, 11, 12, 61}) {
    const double want = static_cast<double>(race::testing::explicit_variance(q));
    EXPECT_NEAR(spectrum_for(q).variance() / want, 1.0, 1e-4) << q;
  }
}

TEST(Spectrum, CovarianceMatchesExplicitFormula) {
  for (auto [q, a, b] : {std::tuple<Int, Int, Int>{5, 1, 4}, {5, 2, 3}, {8, 1, 3}, {11, 1, 2}, {11, 1, 10}}) {
    const double want = static_cast<double>(race::testing::explicit_b(q, a, b));
    EXPECT_NEAR(spectrum_for(q).b(a, b), want, 1e-4 * std::max(1.0, spectrum_for(q).variance())) << q;
  }
}

TEST(Spectrum, TailCorrectionIsSmallAndPositive) {
  const auto& s = spectrum_for(11);
  EXPECT_GT(s.variance_tail(), 0.0);
  EXPECT_LT(s.variance_tail(), 0.05 * s.variance());
  const Spectrum head_only(race::testing::modulus_zeros(11, height(11)), false);
  EXPECT_NEAR(head_only.variance() + s.variance_tail(), s.variance(), 1e-12 * s.variance());
}

TEST(Spectrum, NormalizedVarianceIncreasesWithModulus) {
  const double r11 = ratio(11), r61 = ratio(61), r151 = ratio(151);
  EXPECT_LT(r11, r61);
  EXPECT_LT(r61, r151);
  EXPECT_GT(r151, 0.4);
}

TEST(Spectrum, QuadraticPairIsStronglyAntiCorrelated) {
  for (Int q : {11, 61, 151}) {
    const auto& s = spectrum_for(q);
    const double b = s.b(1, q - 1);
    EXPECT_LT(b, 0.0) << q;
    EXPECT_GE(std::fabs(b) / static_cast<double>(Modulus(q).phi()), 0.05) << q;
  }
}

TEST(Spectrum, ModFourPairIsMinusVariance) {
  const auto& s = spectrum_for(4);
  EXPECT_NEAR(s.b(1, 3), -s.variance(), 1e-12 * s.variance());
}

TEST(Spectrum, StableUnderHeightIncrease) {
  const Spectrum low(race::testing::modulus_zeros(4, 1000.0));
  const Spectrum high(race::testing::modulus_zeros(4, 2000.0));
  EXPECT_NEAR(low.variance() / high.variance(), 1.0, 5e-3);
}

TEST(Spectrum, SymmetricWithSmallImaginaryResidual) {
  const auto& s = spectrum_for(13);
  for (Int a = 1; a < 13; ++a) {
    for (Int b = 1; b < 13; ++b) {
      if (a == b) continue;
      const auto ab = s.b_value(a, b);
      EXPECT_NEAR(ab.value, s.b(b, a), 1e-12 * s.variance());
      EXPECT_LT(ab.imag_residual, 1e-9 * s.variance());
    }
  }
}

TEST(Spectrum, RejectsBadPairs) {
  const auto& s = spectrum_for(12);
  try {
    s.b(5, 17);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_pair);
  }
  try {
    s.b(2, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_class);
  }
}

TEST(CovarianceData, ShapeMeanAndDiagonal) {
  const auto cov = covariance_data(RaceSpec(8, {1, 3}), spectrum_for(8));
  EXPECT_EQ(cov.b_matrix.rows(), 2);
  EXPECT_EQ(cov.mean(0), -3.0);
  EXPECT_EQ(cov.mean(1), 1.0);
  EXPECT_EQ(cov.b_matrix(0, 0), cov.var_q);
  EXPECT_EQ(cov.b_matrix(1, 1), cov.var_q);
  EXPECT_EQ(cov.correlation(0, 0), 1.0);
  EXPECT_TRUE(cov.positive_semidefinite);
  EXPECT_TRUE(cov.tail_correction_applied);
}

TEST(CovarianceData, CorrelationDecaysForLargeModulus) {
  const auto cov = covariance_data(RaceSpec(101, {1, 2, 3}), spectrum_for(101));
  EXPECT_LE(cov.epsilon, 0.5);
  EXPECT_LE(cov.epsilon, RunConfig{}.correlation_alpha / std::log(101.0));
  EXPECT_GT(cov.min_eigenvalue, 0.0);
}

TEST(CovarianceData, CsvRowsPerEntry) {
  const auto cov = covariance_data(RaceSpec(5, {1, 2, 3}), spectrum_for(5));
  std::ostringstream out;
  write_covariance_csv(cov, out);
  std::istringstream in(out.str());
  std::string line;
  int data_rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("row,", 0) != 0) ++data_rows;
  }
  EXPECT_EQ(data_rows, 9);
  EXPECT_NE(out.str().find("row,col,class_row,class_col,covariance,correlation,mean_row"), std::string::npos);
}
