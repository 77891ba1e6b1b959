#pragma once

/// Reduced residues modulo q and the Dirichlet character group with exact
/// root-of-unity values, labelled with the Conrey convention.

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace race {

using Int = std::int64_t;

Int mod(Int n, Int q);
Int mod_mul(Int a, Int b, Int q);
Int mod_pow(Int base, Int exponent, Int q);
/// Inverse of a modulo q; throws invalid-class when gcd(a, q) > 1.
Int mod_inverse(Int a, Int q);

/// A positive modulus with its prime factorization and Euler totient.
class Modulus {
 public:
  explicit Modulus(Int q);

  Int value() const noexcept { return q_; }
  Int phi() const noexcept { return phi_; }
  const std::vector<std::pair<Int, int>>& factors() const noexcept { return factors_; }

  bool is_unit(Int n) const;
  /// Canonical representative in [1, q].
  Int canonical(Int n) const;
  /// Reduced residues in [1, q], ascending.
  std::vector<Int> units() const;
  std::vector<Int> divisors() const;
  /// Number of divisors d(q).
  Int divisor_count() const;

 private:
  Int q_;
  Int phi_;
  std::vector<std::pair<Int, int>> factors_;
};

/// A reduced residue class a mod q, stored with its canonical representative.
class ResidueClass {
 public:
  ResidueClass(Int a, Int q);

  Int value() const noexcept { return a_; }
  Int modulus() const noexcept { return q_; }

 private:
  Int a_;
  Int q_;
};

/// Modulus plus an ordered tuple of r >= 2 distinct reduced classes.
class RaceSpec {
 public:
  RaceSpec(Int q, std::vector<Int> classes);

  const Modulus& modulus() const noexcept { return modulus_; }
  Int q() const noexcept { return modulus_.value(); }
  const std::vector<Int>& classes() const noexcept { return classes_; }
  std::size_t r() const noexcept { return classes_.size(); }

  bool operator==(const RaceSpec& other) const { return q() == other.q() && classes_ == other.classes_; }

 private:
  Modulus modulus_;
  std::vector<Int> classes_;
};

/// chi(n) = exp(2 pi i num(n) / den) for reduced n, 0 otherwise. Exponent
/// numerators add modulo den under multiplication of arguments.
class DirichletCharacter {
 public:
  DirichletCharacter(Int q, Int conrey_index, Int denominator, std::vector<Int> numerators);

  Int modulus() const noexcept { return q_; }
  Int conrey_index() const noexcept { return label_; }
  Int denominator() const noexcept { return den_; }

  /// Exponent numerator in [0, den) or nullopt when gcd(n, q) > 1.
  std::optional<Int> exponent(Int n) const;
  std::complex<double> operator()(Int n) const;

  bool is_principal() const noexcept { return order_ == 1; }
  bool is_real() const noexcept { return order_ <= 2; }
  Int order() const noexcept { return order_; }
  /// 0 when chi(-1) = 1, 1 otherwise.
  int parity() const noexcept { return parity_; }
  Int conductor() const noexcept { return conductor_; }
  bool primitive() const noexcept { return conductor_ == q_; }

 private:
  Int q_;
  Int label_;
  Int den_;
  std::vector<Int> num_;  // indexed by n mod q; -1 marks non-units
  Int order_ = 1;
  int parity_ = 0;
  Int conductor_ = 1;
};

/// Evaluates a root of unity exp(2 pi i num / den) with exact values at the
/// eighth roots of unity.
std::complex<double> root_of_unity(Int num, Int den);

std::complex<double> eval_character(const DirichletCharacter& chi, Int n);

/// All phi(q) characters modulo q, indexed by Conrey label.
class CharacterTable {
 public:
  explicit CharacterTable(Int q);

  const Modulus& modulus() const noexcept { return modulus_; }
  Int q() const noexcept { return modulus_.value(); }
  std::size_t size() const noexcept { return characters_.size(); }

  /// Characters in ascending Conrey-label order; the principal one (label 1) first.
  const std::vector<DirichletCharacter>& characters() const noexcept { return characters_; }
  const DirichletCharacter& by_label(Int label) const;
  const DirichletCharacter& principal() const { return by_label(1); }
  Int conjugate_label(Int label) const;
  std::vector<const DirichletCharacter*> nontrivial() const;

 private:
  Modulus modulus_;
  std::vector<DirichletCharacter> characters_;
  std::vector<std::ptrdiff_t> index_;  // label -> position, -1 for non-units
};

/// Builds (or fetches from a process-wide cache) the character table mod q.
/// Throws invalid-modulus when q < 3.
std::shared_ptr<const CharacterTable> build_character_table(Int q);

struct Inducer {
  Int conductor = 1;
  Int conrey_index = 1;
  /// Null for the trivial inducer of a principal character.
  std::shared_ptr<const CharacterTable> table;

  bool trivial() const noexcept { return conductor == 1; }
  const DirichletCharacter& character() const { return table->by_label(conrey_index); }
};

/// Least modulus q* through which chi factors, with the primitive character
/// mod q* agreeing with chi on residues coprime to q.
Inducer conductor_and_inducer(const DirichletCharacter& chi);

/// -1 + #{b in [1, q] : b^2 = a mod q}. Throws invalid-class if gcd(a, q) > 1.
Int c_q(Int a, Int q);
inline Int c_q(const ResidueClass& a) { return c_q(a.value(), a.modulus()); }

}  // namespace race
