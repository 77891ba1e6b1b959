#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "race/arith.hpp"
#include "race/error.hpp"

using namespace race;

namespace {

Int brute_phi(Int q) {
  Int n = 0;
  for (Int a = 1; a <= q; ++a) n += std::gcd(a, q) == 1;
  return n;
}

// Smallest d | q such that chi is 1 on every unit congruent to 1 mod d.
Int brute_conductor(const DirichletCharacter& chi) {
  const Int q = chi.modulus();
  for (Int d = 1; d <= q; ++d) {
    if (q % d) continue;
    bool ok = true;
    for (Int n = 1; n <= q && ok; ++n) {
      if (std::gcd(n, q) == 1 && n % d == 1 % d) ok = std::abs(chi(n) - 1.0) < 1e-12;
    }
    if (ok) return d;
  }
  return q;
}

}  // namespace

// =============================================================================
// Modular arithmetic
// =============================================================================

TEST(Modulus, TotientMatchesGcdCount) {
  for (Int q = 1; q <= 300; ++q) EXPECT_EQ(Modulus(q).phi(), brute_phi(q)) << q;
}

TEST(Modulus, FactorizationMultipliesBack) {
  for (Int q = 2; q <= 500; ++q) {
    const Modulus m(q);
    Int prod = 1;
    for (const auto& [p, e] : m.factors()) {
      for (int i = 0; i < e; ++i) prod *= p;
    }
    EXPECT_EQ(prod, q);
  }
}

TEST(Modulus, PowAndInverseAgreeWithRepeatedMultiplication) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const Int q = 2 + static_cast<Int>(rng() % 1000);
    const Int a = static_cast<Int>(rng() % static_cast<std::uint64_t>(q));
    const Int e = static_cast<Int>(rng() % 40);
    Int want = 1 % q;
    for (Int k = 0; k < e; ++k) want = want * a % q;
    EXPECT_EQ(mod_pow(a, e, q), want);
    if (std::gcd(a, q) == 1) {
      EXPECT_EQ(mod_mul(a, mod_inverse(a, q), q), 1 % q);
    }
  }
}

TEST(Modulus, MulModHandlesLargeOperands) {
  const Int q = 4'000'000'007LL;
  EXPECT_EQ(mod_mul(q - 1, q - 1, q), 1);
}

TEST(Modulus, RejectsNonPositive) {
  EXPECT_THROW(Modulus(0), Error);
  EXPECT_THROW(Modulus(-3), Error);
}

// =============================================================================
// Character tables
// =============================================================================

TEST(CharacterTable, ModFiveIsCyclicOfOrderFour) {
  auto t = build_character_table(5);
  EXPECT_EQ(t->size(), 4u);
  EXPECT_EQ(t->nontrivial().size(), 3u);
  int order4 = 0, order2 = 0;
  for (const auto& chi : t->characters()) {
    order4 += chi.order() == 4;
    order2 += chi.order() == 2;
  }
  // A generator of order 4 and its conjugate, plus the quadratic character.
  EXPECT_EQ(order4, 2);
  EXPECT_EQ(order2, 1);
}

TEST(CharacterTable, ModFourHasOneNontrivialCharacter) {
  auto t = build_character_table(4);
  ASSERT_EQ(t->size(), 2u);
  const auto nt = t->nontrivial();
  ASSERT_EQ(nt.size(), 1u);
  EXPECT_NEAR(std::abs((*nt[0])(3) - (-1.0)), 0.0, 1e-15);
}

TEST(CharacterTable, ModTwelveIsAllReal) {
  auto t = build_character_table(12);
  EXPECT_EQ(t->size(), 4u);
  for (const auto& chi : t->characters()) EXPECT_TRUE(chi.is_real());
}

TEST(CharacterTable, ValueAtOneIsOneAndNonUnitsVanish) {
  for (Int q = 3; q <= 60; ++q) {
    auto t = build_character_table(q);
    for (const auto& chi : t->characters()) {
      EXPECT_NEAR(std::abs(chi(1) - 1.0), 0.0, 1e-14);
      for (Int n = 0; n < q; ++n) {
        if (std::gcd(n, q) != 1) {
          EXPECT_EQ(chi(n), 0.0);
        }
      }
    }
  }
}

TEST(CharacterTable, OrderFourCharacterToTheFourthIsOne) {
  auto t = build_character_table(5);
  for (const auto& chi : t->characters()) {
    if (chi.order() != 4) continue;
    EXPECT_NEAR(std::abs(std::pow(chi(2), 4) - 1.0), 0.0, 1e-13);
    EXPECT_GT(std::abs(std::pow(chi(2), 2) - 1.0), 0.5);
  }
}

TEST(CharacterTable, CompletelyMultiplicativeAndPeriodic) {
  std::mt19937_64 rng(2);
  for (Int q = 3; q <= 80; ++q) {
    auto t = build_character_table(q);
    for (const auto& chi : t->characters()) {
      for (int i = 0; i < 20; ++i) {
        const Int m = static_cast<Int>(rng() % 1000), n = static_cast<Int>(rng() % 1000);
        EXPECT_NEAR(std::abs(chi(m * n) - chi(m) * chi(n)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(chi(m + q) - chi(m)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(chi(-m) - chi(q - m % q)), 0.0, 1e-12);
      }
    }
  }
}

TEST(CharacterTable, OrthogonalityInBothDirections) {
  for (Int q = 3; q <= 40; ++q) {
    auto t = build_character_table(q);
    const auto units = t->modulus().units();
    const double phi = static_cast<double>(t->modulus().phi());
    for (const auto& x : t->characters()) {
      for (const auto& y : t->characters()) {
        std::complex<double> s = 0;
        for (Int a : units) s += x(a) * std::conj(y(a));
        EXPECT_NEAR(std::abs(s - (x.conrey_index() == y.conrey_index() ? phi : 0.0)), 0.0, 1e-9);
      }
    }
    for (Int a : units) {
      std::complex<double> s = 0;
      for (const auto& chi : t->characters()) s += chi(a);
      EXPECT_NEAR(std::abs(s - (a == 1 ? phi : 0.0)), 0.0, 1e-9);
    }
  }
}

TEST(CharacterTable, ConjugateLabelConjugatesValues) {
  for (Int q : {5, 7, 13, 15, 16, 21}) {
    auto t = build_character_table(q);
    for (const auto& chi : t->characters()) {
      const auto& bar = t->by_label(t->conjugate_label(chi.conrey_index()));
      for (Int a : t->modulus().units()) EXPECT_NEAR(std::abs(bar(a) - std::conj(chi(a))), 0.0, 1e-12);
    }
  }
}

TEST(CharacterTable, ParityMatchesValueAtMinusOne) {
  for (Int q = 3; q <= 50; ++q) {
    auto t = build_character_table(q);
    for (const auto& chi : t->characters()) {
      EXPECT_NEAR(chi(q - 1).real(), chi.parity() == 0 ? 1.0 : -1.0, 1e-12);
    }
  }
}

TEST(CharacterTable, UnknownLabelThrows) {
  EXPECT_THROW(build_character_table(4)->by_label(2), Error);
}

// =============================================================================
// Conductors and inducers
// =============================================================================

TEST(Conductor, ModSixNontrivialComesFromModThree) {
  auto t = build_character_table(6);
  const auto nt = t->nontrivial();
  ASSERT_EQ(nt.size(), 1u);
  const auto ind = conductor_and_inducer(*nt[0]);
  EXPECT_EQ(ind.conductor, 3);
  for (Int a : {1, 5}) EXPECT_NEAR(std::abs((*nt[0])(a) - ind.character()(a % 3)), 0.0, 1e-14);
}

TEST(Conductor, PrimitiveIsItsOwnInducer) {
  auto t = build_character_table(5);
  for (const auto* chi : t->nontrivial()) {
    const auto ind = conductor_and_inducer(*chi);
    EXPECT_EQ(ind.conductor, 5);
    EXPECT_EQ(ind.conrey_index, chi->conrey_index());
    EXPECT_TRUE(chi->primitive());
  }
}

TEST(Conductor, PrincipalHasConductorOne) {
  const auto ind = conductor_and_inducer(build_character_table(12)->principal());
  EXPECT_EQ(ind.conductor, 1);
  EXPECT_TRUE(ind.trivial());
}

TEST(Conductor, MatchesBruteForceAndInducerAgreesOnUnits) {
  for (Int q = 3; q <= 64; ++q) {
    auto t = build_character_table(q);
    for (const auto& chi : t->characters()) {
      const auto ind = conductor_and_inducer(chi);
      EXPECT_EQ(ind.conductor, brute_conductor(chi)) << "q=" << q << " label " << chi.conrey_index();
      EXPECT_EQ(chi.conductor(), ind.conductor);
      if (ind.trivial()) continue;
      EXPECT_TRUE(ind.character().primitive());
      for (Int a : t->modulus().units()) EXPECT_NEAR(std::abs(chi(a) - ind.character()(a)), 0.0, 1e-12);
    }
  }
}

// =============================================================================
// C_q(a)
// =============================================================================

TEST(SquareRootCount, Examples) {
  EXPECT_EQ(c_q(1, 5), 1);
  EXPECT_EQ(c_q(2, 5), -1);
  EXPECT_EQ(c_q(1, 8), 3);
  EXPECT_EQ(c_q(3, 8), -1);
  EXPECT_EQ(c_q(ResidueClass(4, 5)), 1);
}

TEST(SquareRootCount, MatchesEnumerationOfRoots) {
  for (Int q = 3; q <= 200; ++q) {
    for (Int a : Modulus(q).units()) {
      Int roots = 0;
      for (Int b = 1; b <= q; ++b) roots += b * b % q == a;
      EXPECT_EQ(c_q(a, q), roots - 1) << q << ' ' << a;
    }
  }
}

TEST(SquareRootCount, RejectsNonUnits) { EXPECT_THROW(c_q(2, 4), Error); }

// =============================================================================
// Race specifications
// =============================================================================

TEST(RaceSpec, ValidatesInput) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  EXPECT_EQ(code([] { RaceSpec(2, {1}); }), Errc::invalid_modulus);
  EXPECT_EQ(code([] { RaceSpec(4, {2, 1}); }), Errc::invalid_class);
  EXPECT_EQ(code([] { RaceSpec(4, {1, 5}); }), Errc::invalid_spec);
  EXPECT_EQ(code([] { RaceSpec(4, {1}); }), Errc::invalid_spec);
}

TEST(RaceSpec, CanonicalizesClasses) {
  const RaceSpec spec(5, {-1, 7});
  EXPECT_EQ(spec.classes(), (std::vector<Int>{4, 2}));
  EXPECT_EQ(spec.r(), 2u);
  EXPECT_EQ(spec, RaceSpec(5, {4, 2}));
}
