#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "race/density.hpp"
#include "race/error.hpp"
#include "test_support.hpp"

using namespace race;
using namespace race::density;
using numerics::RandomStream;

namespace {

racemodel::RaceModel model_for(Int q, std::vector<Int> classes, double height) {
  return racemodel::RaceModel(RaceSpec(q, std::move(classes)), race::testing::modulus_zeros(q, height));
}

}  // namespace

TEST(CountOrdering, StrictAndTies) {
  numerics::Matrix s(4, 3);
  s << 3, 2, 1,  //
      1, 2, 3,   //
      2, 2, 1,   //
      5, 0, 4;
  const auto c = count_ordering(s, {0, 1, 2});
  EXPECT_EQ(c.hits, 1u);
  EXPECT_EQ(c.ties, 1u);
  EXPECT_EQ(c.samples, 4u);
  EXPECT_EQ(count_ordering(s, {0, 2, 1}).hits, 1u);
}

TEST(DeltaMc, ComplementaryOrderingsOnSharedBatch) {
  const auto m = model_for(5, {1, 2}, 200.0);
  const auto batch = racemodel::sample_x(m, 100000, RandomStream(1, 1));
  const auto ab = delta_mc(batch, m.spec(), {0, 1});
  const auto ba = delta_mc(batch, m.spec(), {1, 0});
  EXPECT_EQ(ab.samples, batch.size());
  EXPECT_NEAR(ab.value + ba.value + static_cast<double>(ab.ties) / static_cast<double>(batch.size()), 1.0, 1e-12);
  EXPECT_THROW(delta_mc(batch, m.spec(), {0, 2}), Error);
}

TEST(DeltaMc, AllOrderingsPartitionTheBatch) {
  const auto m = model_for(7, {1, 2, 3}, 200.0);
  const auto batch = racemodel::sample_x(m, 20000, RandomStream(2, 1));
  const auto all = count_all_orderings(batch.samples);
  EXPECT_EQ(all.orderings.size(), 6u);
  std::size_t total = all.ties;
  for (auto c : all.counts) total += c;
  EXPECT_EQ(total, batch.size());
  for (std::size_t i = 0; i < all.orderings.size(); ++i) {
    EXPECT_EQ(all.counts[i], count_ordering(batch.samples, all.orderings[i]).hits);
  }
}

TEST(DeltaInvert, EqualSquareRootCountsGiveExactlyOneHalf) {
  const auto& data = race::testing::modulus_zeros(5, 200.0);
  EXPECT_EQ(delta_invert_2way(2, 3, data).value, 0.5);
  EXPECT_EQ(delta_invert_2way(3, 2, data).value, 0.5);
}

TEST(DeltaInvert, AgreesWithMonteCarlo) {
  for (auto [q, a, b] : {std::tuple<Int, Int, Int>{3, 2, 1}, {4, 3, 1}, {5, 2, 1}}) {
    const auto& data = race::testing::modulus_zeros(q, 1000.0);
    const auto inv = delta_invert_2way(a, b, data);
    const racemodel::RaceModel m(RaceSpec(q, {a, b}), data);
    const auto mc = delta_mc(m, 200000, RandomStream(3, static_cast<std::uint64_t>(q)));
    EXPECT_LE(std::fabs(inv.value - mc.value), 4 * mc.uncertainty + inv.uncertainty + 1e-5) << q;
    EXPECT_LT(inv.uncertainty, 1e-6);
  }
}

TEST(DeltaInvert, KnownModFourAndModThreeBiases) {
  // Full-spectrum values are 0.9959 (mod 4) and 0.9990 (mod 3); truncation at T = 1000 moves them by < 1e-3.
  EXPECT_NEAR(delta_invert_2way(3, 1, race::testing::modulus_zeros(4, 1000.0)).value, 0.9959, 1e-3);
  EXPECT_NEAR(delta_invert_2way(2, 1, race::testing::modulus_zeros(3, 1000.0)).value, 0.9990, 1e-3);
}

TEST(DeltaInvert, ComplementSumsToOne) {
  const auto& data = race::testing::modulus_zeros(8, 500.0);
  EXPECT_NEAR(delta_invert_2way(3, 1, data).value + delta_invert_2way(1, 3, data).value, 1.0, 1e-9);
}

TEST(DeltaGauss, IdentityCorrelationGivesOneOverFactorial) {
  const RaceSpec spec(7, {1, 2, 3});
  const auto est = delta_gauss(spec, numerics::Matrix::Identity(3, 3), numerics::Vector::Zero(3), 400000,
                               RandomStream(4, 1));
  EXPECT_LE(std::fabs(est.value - 1.0 / 6), 4 * est.uncertainty);
}

TEST(DeltaGauss, LargeMeansDecideTheOrdering) {
  const RaceSpec spec(7, {1, 2});
  numerics::Vector mean(2);
  mean << 1e3, -1e3;
  EXPECT_EQ(delta_gauss(spec, numerics::Matrix::Identity(2, 2), mean, 1000, RandomStream(5, 1)).value, 1.0);
  EXPECT_EQ(delta_gauss(spec, numerics::Matrix::Identity(2, 2), -mean, 1000, RandomStream(5, 1)).value, 0.0);
}

TEST(DeltaGauss, CloseToMonteCarloForModerateModulus) {
  const auto& data = race::testing::modulus_zeros(61, 197.0);
  const RaceSpec spec(61, {2, 1});
  const auto cov = spectrum::covariance_data(spec, data, false);
  const auto gauss = delta_gauss(cov, 200000, RandomStream(6, 1));
  const auto mc = delta_mc(racemodel::RaceModel(spec, data), 200000, RandomStream(6, 2));
  EXPECT_NEAR(gauss.value, mc.value, 0.02);
}

TEST(Asymptotic, T11Values) {
  const auto t = delta_asymptotic_t11(1000003, 3, 5.0);
  EXPECT_NEAR(t.baseline, 1.0 / 6, 1e-15);
  EXPECT_NEAR(t.envelope, 45 / std::log(1000003.0), 1e-12);
  EXPECT_TRUE(t.in_range);
  EXPECT_FALSE(delta_asymptotic_t11(11, 3, 5.0).in_range);
  EXPECT_THROW(delta_asymptotic_t11(2, 3, 5.0), Error);
}

TEST(Asymptotic, T12MainTermIsLogOfRToTheMinusR) {
  const auto t = delta_asymptotic_t12(1000003, 4, 5.0);
  EXPECT_NEAR(t.log_main, -4 * std::log(4.0) + 4, 1e-14);
  EXPECT_NEAR(t.log_envelope(), 5 * std::log(4.0) + 80 / std::log(1000003.0), 1e-12);
  EXPECT_TRUE(t.in_range);
}

TEST(Asymptotic, T13Threshold) {
  const auto u = delta_upper_t13(5, 3, 0.2, 5.0);
  EXPECT_EQ(u.s, 3);
  EXPECT_TRUE(u.r_in_range);
  EXPECT_FALSE(delta_upper_t13(5, 2, 0.2, 5.0).r_in_range);
  EXPECT_LE(u.clamped, 1.0);
  EXPECT_EQ(u.clamped, std::min(1.0, u.bound));
  try {
    delta_upper_t13(2, 3, 0.2, 5.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::q_too_small);
  }
}

TEST(Decomposition, ExactOnSharedBatch) {
  {
    const auto m = model_for(5, {1, 2, 3}, 200.0);
    const auto batch = racemodel::sample_x(m, 50000, RandomStream(7, 1));
    const auto rep = ordering_decomposition_check(batch.samples, {0, 1}, 2);
    EXPECT_TRUE(rep.exact);
    EXPECT_EQ(rep.insertion_counts.size(), 3u);
    EXPECT_EQ(rep.insertion_sum, rep.base_count);
  }
  {
    const auto m = model_for(8, {1, 3, 5, 7}, 200.0);
    const auto batch = racemodel::sample_x(m, 50000, RandomStream(7, 2));
    const auto rep = ordering_decomposition_check(batch.samples, {1, 0, 3}, 2);
    EXPECT_TRUE(rep.exact);
    EXPECT_EQ(rep.insertion_counts.size(), 4u);
  }
  EXPECT_THROW(ordering_decomposition_check(numerics::Matrix::Zero(3, 3), {0, 1}, 1), Error);
}

TEST(DensityCsv, HeaderAndRow) {
  std::ostringstream out;
  write_density_csv_header(out);
  DensityEstimate e{RaceSpec(4, {3, 1})};
  e.method = Method::inversion_2way;
  e.value = 0.99;
  write_density_csv_row(e, out);
  EXPECT_EQ(out.str().rfind("q,classes,method,value,uncertainty,T,N,seed\n", 0), 0u);
  EXPECT_NE(out.str().find("\n4,"), std::string::npos);
  EXPECT_EQ(to_string(Method::monte_carlo), "monte-carlo");
}
