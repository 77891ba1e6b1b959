#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "race/empirical.hpp"
#include "race/error.hpp"

using namespace race;
using namespace race::empirical;

namespace {

bool is_prime(Int n) {
  if (n < 2) return false;
  for (Int d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

// (1 / log x) * sum over unit cells [n, n+1) of 1{ordering at n} log((n+1)/n), by trial division.
double brute_log_density(Int q, const std::vector<Int>& classes, Int x_max) {
  std::vector<Int> count(static_cast<std::size_t>(q), 0);
  double total = 0;
  for (Int n = 2; n < x_max; ++n) {
    if (is_prime(n)) ++count[static_cast<std::size_t>(n % q)];
    bool ordered = true;
    for (std::size_t j = 0; j + 1 < classes.size(); ++j) {
      if (!(count[static_cast<std::size_t>(classes[j])] > count[static_cast<std::size_t>(classes[j + 1])])) {
        ordered = false;
      }
    }
    if (ordered) total += std::log(static_cast<double>(n + 1) / static_cast<double>(n));
  }
  return total / std::log(static_cast<double>(x_max));
}

}  // namespace

TEST(CheckpointGrid, DenseThenLogarithmic) {
  const auto g = checkpoint_grid(1000000, 64);
  for (Int n = 2; n < 100; ++n) EXPECT_EQ(g[static_cast<std::size_t>(n - 2)], n);
  EXPECT_EQ(g.back(), 1000000);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_EQ(std::adjacent_find(g.begin(), g.end()), g.end());
  const auto fine = checkpoint_grid(1000000, 128);
  for (Int x : g) EXPECT_TRUE(std::binary_search(fine.begin(), fine.end(), x)) << x;
}

TEST(Sieve, PrimeCountsModFour) {
  const auto s = sieve_checkpoints(4, std::vector<Int>{10, 100, 1000});
  EXPECT_EQ(s.pi(0), 4);
  EXPECT_EQ(s.pi(1), 25);
  EXPECT_EQ(s.pi(2), 168);
  EXPECT_EQ(s.pi(1, 1), 11);
  EXPECT_EQ(s.pi(1, 3), 13);
  EXPECT_EQ(s.pi_ramified(1), 1);
  EXPECT_EQ(s.classes(), (std::vector<Int>{1, 3}));
}

TEST(Sieve, MatchesTrialDivisionAndPartitions) {
  for (Int q : {3, 7, 12, 30}) {
    const auto s = sieve_checkpoints(q, 20000, 64);
    std::vector<Int> count(static_cast<std::size_t>(q), 0);
    Int pi = 0;
    std::size_t k = 0;
    for (Int n = 2; n <= s.x_max(); ++n) {
      if (is_prime(n)) {
        ++pi;
        ++count[static_cast<std::size_t>(n % q)];
      }
      if (n == s.checkpoints()[k]) {
        ASSERT_EQ(s.pi(k), pi) << n;
        Int sum = s.pi_ramified(k);
        for (Int a : s.classes()) {
          ASSERT_EQ(s.pi(k, a), count[static_cast<std::size_t>(a)]) << q << " " << a << " " << n;
          sum += s.pi(k, a);
        }
        ASSERT_EQ(sum, pi);
        ++k;
      }
    }
    EXPECT_EQ(k, s.checkpoints().size());
  }
}

TEST(Sieve, LargerCountsAgreeWithKnownValues) {
  const auto s = sieve_checkpoints(4, std::vector<Int>{1000000, 10000000});
  EXPECT_EQ(s.pi(0), 78498);
  EXPECT_EQ(s.pi(1), 664579);
  EXPECT_EQ(s.pi(1, 3) - s.pi(1, 1), 218);
}

TEST(Sieve, RejectsBadCheckpoints) {
  EXPECT_THROW(sieve_checkpoints(4, std::vector<Int>{10, 5}), Error);
  EXPECT_THROW(sieve_checkpoints(4, std::vector<Int>{1}), Error);
  EXPECT_THROW(sieve_checkpoints(4, std::vector<Int>{kMaxSieveLimit + 1}), Error);
}

TEST(EVector, ModFourAtOneHundred) {
  const auto s = sieve_checkpoints(4, std::vector<Int>{50, 100, 200});
  const auto e = e_vector(s, 100.0, RaceSpec(4, {1, 3}));
  EXPECT_EQ(e.x, 100);
  EXPECT_FALSE(e.snapped);
  EXPECT_NEAR(e.values(0), -1.3816, 1e-4);
  EXPECT_NEAR(e.values(1), 0.4605, 1e-4);
  EXPECT_NEAR(e.values.sum(), -0.9210, 1e-4);
  EXPECT_TRUE(e_vector(s, 120.0, RaceSpec(4, {1, 3})).snapped);
  EXPECT_THROW(e_vector(s, 100.0, RaceSpec(5, {1, 2})), Error);
}

TEST(LogDensity, GridMatchesBruteForceWhenDense) {
  // x_max below the dense threshold: every cell is a unit cell and the grid rule is exact.
  const auto s = sieve_checkpoints(4, checkpoint_grid(99, 16));
  const auto est = empirical_log_density(s, RaceSpec(4, {3, 1}));
  EXPECT_NEAR(est.value, brute_log_density(4, {3, 1}, 99), 1e-12);
  EXPECT_EQ(est.lower, est.value);
  EXPECT_EQ(est.upper, est.value);
}

TEST(LogDensity, ExactIntegralMatchesBruteForce) {
  for (auto [q, classes] : {std::pair<Int, std::vector<Int>>{4, {3, 1}}, {3, {2, 1}}, {5, {2, 3}}, {8, {3, 5, 7}}}) {
    const auto est = exact_log_density(RaceSpec(q, classes), 100000);
    EXPECT_NEAR(est.value, brute_log_density(q, classes, 100000), 1e-10) << q;
    EXPECT_EQ(est.lower, est.value);
  }
}

TEST(LogDensity, GridBracketsExactValueAndRefines) {
  for (auto [q, a, b] : {std::tuple<Int, Int, Int>{4, 3, 1}, {5, 2, 3}}) {
    const RaceSpec spec(q, {a, b});
    const auto exact = exact_log_density(spec, 1000000);
    const auto coarse = empirical_log_density(sieve_checkpoints(q, 1000000, 4096), spec);
    const auto fine = empirical_log_density(sieve_checkpoints(q, 1000000, 65536), spec);
    for (const auto& est : {coarse, fine}) {
      EXPECT_LE(est.lower, exact.value) << q;
      EXPECT_GE(est.upper, exact.value) << q;
      EXPECT_LE(est.lower, est.value);
      EXPECT_LE(est.value, est.upper);
    }
    EXPECT_LT(fine.upper - fine.lower, coarse.upper - coarse.lower);
    EXPECT_NEAR(fine.value, exact.value, 1e-3);
    EXPECT_GT(fine.flips, coarse.flips);
  }
}

TEST(LogDensity, ReversedOrderingsSumToAtMostOne) {
  const auto s = sieve_checkpoints(5, 1000000, 1024);
  const auto ab = empirical_log_density(s, RaceSpec(5, {2, 3}));
  const auto ba = empirical_log_density(s, RaceSpec(5, {3, 2}));
  EXPECT_LE(ab.value + ba.value, 1.0 + 1e-12);
  // Every cell's left endpoint is in exactly one of: a ahead, b ahead, tied. The integral starts at 2.
  EXPECT_NEAR(ab.value + ba.value + ab.tie_mass, 1.0 - std::log(2.0) / std::log(1e6), 1e-12);
}

TEST(LogDensity, RunningValueEndsAtFinalEstimate) {
  const auto s = sieve_checkpoints(3, 100000, 256);
  const RaceSpec spec(3, {2, 1});
  const auto running = running_log_density(s, spec);
  ASSERT_EQ(running.size(), s.checkpoints().size());
  EXPECT_NEAR(running.back(), empirical_log_density(s, spec).value, 1e-12);
  for (double v : running) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(LogDensity, SymmetricRaceNearOneHalf) {
  const auto est = exact_log_density(RaceSpec(5, {2, 3}), 10000000);
  EXPECT_NEAR(est.value, 0.5, 0.25);
}

TEST(CompareWithModel, DifferenceAndMismatch) {
  LogDensityEstimate emp{RaceSpec(4, {3, 1})};
  emp.value = 0.9;
  density::DensityEstimate model{RaceSpec(4, {3, 1})};
  model.value = 0.996;
  const auto cmp = compare_with_model(emp, model);
  EXPECT_NEAR(cmp.difference, 0.096, 1e-12);
  model.spec = RaceSpec(4, {1, 3});
  try {
    compare_with_model(emp, model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_comparison);
  }
}

TEST(CheckpointCsv, Columns) {
  const auto s = sieve_checkpoints(5, std::vector<Int>{10, 20});
  std::ostringstream out;
  write_checkpoints_csv(s, out);
  EXPECT_EQ(out.str(), "x,pi_total,pi_1,pi_2,pi_3,pi_4\n10,4,0,2,1,0\n20,8,1,3,2,1\n");
}
