#include "race/arith.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "race/error.hpp"

namespace race {

Int mod(Int n, Int q) {
  Int r = n % q;
  return r < 0 ? r + q : r;
}

__extension__ using Wide = __int128;

Int mod_mul(Int a, Int b, Int q) {
  return static_cast<Int>((static_cast<Wide>(mod(a, q)) * mod(b, q)) % q);
}

Int mod_pow(Int base, Int exponent, Int q) {
  Int result = 1 % q;
  Int b = mod(base, q);
  while (exponent > 0) {
    if (exponent & 1) result = mod_mul(result, b, q);
    b = mod_mul(b, b, q);
    exponent >>= 1;
  }
  return result;
}

Int mod_inverse(Int a, Int q) {
  Int old_r = mod(a, q), r = q;
  Int old_s = 1, s = 0;
  while (r != 0) {
    Int quotient = old_r / r;
    old_r = std::exchange(r, old_r - quotient * r);
    old_s = std::exchange(s, old_s - quotient * s);
  }
  if (old_r != 1) {
    throw Error(Errc::invalid_class, std::to_string(a) + " is not invertible mod " + std::to_string(q));
  }
  return mod(old_s, q);
}

// ---------------------------------------------------------------------------
// Modulus

Modulus::Modulus(Int q) : q_(q), phi_(q) {
  if (q < 1) throw Error(Errc::invalid_modulus, "modulus must be positive, got " + std::to_string(q));
  Int n = q;
  for (Int p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    factors_.emplace_back(p, e);
  }
  if (n > 1) factors_.emplace_back(n, 1);
  for (const auto& [p, e] : factors_) phi_ = phi_ / p * (p - 1);
}

bool Modulus::is_unit(Int n) const { return std::gcd(mod(n, q_), q_) == 1; }

Int Modulus::canonical(Int n) const {
  Int r = mod(n, q_);
  return r == 0 ? q_ : r;
}

std::vector<Int> Modulus::units() const {
  std::vector<Int> out;
  out.reserve(static_cast<std::size_t>(phi_));
  for (Int a = 1; a <= q_; ++a) {
    if (std::gcd(a, q_) == 1) out.push_back(a);
  }
  return out;
}

std::vector<Int> Modulus::divisors() const {
  std::vector<Int> out{1};
  for (const auto& [p, e] : factors_) {
    const std::size_t n = out.size();
    Int pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Int Modulus::divisor_count() const {
  Int d = 1;
  for (const auto& [p, e] : factors_) d *= e + 1;
  return d;
}

ResidueClass::ResidueClass(Int a, Int q) : a_(0), q_(q) {
  if (q < 1) throw Error(Errc::invalid_modulus, "modulus must be positive");
  Int r = mod(a, q);
  if (std::gcd(r, q) != 1) {
    throw Error(Errc::invalid_class, std::to_string(a) + " is not coprime to " + std::to_string(q));
  }
  a_ = r == 0 ? q : r;
}

RaceSpec::RaceSpec(Int q, std::vector<Int> classes) : modulus_(q) {
  if (q < 3) throw Error(Errc::invalid_modulus, "race modulus must be >= 3");
  if (classes.size() < 2) throw Error(Errc::invalid_spec, "a race needs at least two classes");
  if (static_cast<Int>(classes.size()) > modulus_.phi()) {
    throw Error(Errc::invalid_spec, "more classes than reduced residues");
  }
  for (Int& a : classes) a = ResidueClass(a, q).value();
  std::vector<Int> sorted = classes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(Errc::invalid_spec, "race classes must be distinct");
  }
  classes_ = std::move(classes);
}

// ---------------------------------------------------------------------------
// Characters

std::complex<double> root_of_unity(Int num, Int den) {
  num = mod(num, den);
  if ((8 * num) % den == 0) {
    constexpr double h = std::numbers::sqrt2 / 2;
    static const std::complex<double> eighth[8] = {{1, 0}, {h, h}, {0, 1}, {-h, h}, {-1, 0}, {-h, -h}, {0, -1}, {h, -h}};
    return eighth[(8 * num) / den];
  }
  const double angle = 2 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(angle), std::sin(angle)};
}

DirichletCharacter::DirichletCharacter(Int q, Int conrey_index, Int denominator, std::vector<Int> numerators)
    : q_(q), label_(conrey_index), den_(denominator), num_(std::move(numerators)) {
  Int g = den_;
  for (Int v : num_) {
    if (v >= 0) g = std::gcd(g, v);
  }
  order_ = den_ / g;
  parity_ = num_[static_cast<std::size_t>(q_ - 1)] == 0 ? 0 : 1;

  const Modulus m(q_);
  for (Int d : m.divisors()) {
    bool trivial_on_kernel = true;
    for (Int n = 1 + d; n < q_ && trivial_on_kernel; n += d) {
      if (num_[static_cast<std::size_t>(n)] > 0) trivial_on_kernel = false;
    }
    if (trivial_on_kernel) {
      conductor_ = d;
      break;
    }
  }
}

std::optional<Int> DirichletCharacter::exponent(Int n) const {
  Int v = num_[static_cast<std::size_t>(mod(n, q_))];
  if (v < 0) return std::nullopt;
  return v;
}

std::complex<double> DirichletCharacter::operator()(Int n) const {
  auto e = exponent(n);
  if (!e) return {0.0, 0.0};
  return root_of_unity(*e, den_);
}

std::complex<double> eval_character(const DirichletCharacter& chi, Int n) { return chi(n); }

namespace {

bool is_primitive_root(Int g, Int p) {
  Int n = p - 1;
  Int m = n;
  for (Int l = 2; l * l <= m; ++l) {
    if (m % l != 0) continue;
    if (mod_pow(g, n / l, p) == 1) return false;
    while (m % l == 0) m /= l;
  }
  if (m > 1 && mod_pow(g, n / m, p) == 1) return false;
  return true;
}

// One prime-power factor of the unit group, with discrete logarithms.
struct Component {
  Int p;
  int e;
  Int pe;
  Int den;                     // denominator of this factor's exponents
  std::vector<Int> log;        // odd p: log base g; p = 2: log base 5 of +-n
  std::vector<signed char> neg;  // p = 2, e >= 2: n = -5^b

  Component(Int prime, int exponent) : p(prime), e(exponent), pe(1), den(1) {
    for (int k = 0; k < e; ++k) pe *= p;
    log.assign(static_cast<std::size_t>(pe), -1);
    neg.assign(static_cast<std::size_t>(pe), 0);
    if (p != 2) {
      const Int phi = pe / p * (p - 1);
      Int g = 2;
      while (!(is_primitive_root(g, p) && mod_pow(g, p - 1, p * p) != 1)) ++g;
      Int x = 1;
      for (Int k = 0; k < phi; ++k) {
        log[static_cast<std::size_t>(x)] = k;
        x = mod_mul(x, g, pe);
      }
      den = phi;
    } else if (e == 1) {
      log[1] = 0;
    } else {
      const Int cyc = e >= 3 ? pe / 4 : 1;
      Int x = 1;
      for (Int b = 0; b < cyc; ++b) {
        log[static_cast<std::size_t>(x)] = b;
        neg[static_cast<std::size_t>(x)] = 0;
        log[static_cast<std::size_t>(pe - x)] = b;
        neg[static_cast<std::size_t>(pe - x)] = 1;
        x = mod_mul(x, 5, pe);
      }
      den = e >= 3 ? pe / 4 : 2;
    }
  }

  // Numerator (over den) of the exponent of chi_{p^e}(m, n).
  Int pairing(Int m, Int n) const {
    const auto im = static_cast<std::size_t>(mod(m, pe));
    const auto in = static_cast<std::size_t>(mod(n, pe));
    if (p != 2) return mod_mul(log[im], log[in], den);
    if (e == 1) return 0;
    Int v = (neg[im] && neg[in]) ? den / 2 : 0;
    if (e >= 3) v += mod_mul(log[im], log[in], den);
    return mod(v, den);
  }
};

}  // namespace

CharacterTable::CharacterTable(Int q) : modulus_(q) {
  if (q < 3) throw Error(Errc::invalid_modulus, "character tables need q >= 3, got " + std::to_string(q));
  std::vector<Component> comps;
  for (const auto& [p, e] : modulus_.factors()) comps.emplace_back(p, e);
  Int den = 1;
  for (const auto& c : comps) den = std::lcm(den, c.den);

  const std::vector<Int> units = modulus_.units();
  index_.assign(static_cast<std::size_t>(q), -1);
  characters_.reserve(units.size());
  for (Int m : units) {
    std::vector<Int> num(static_cast<std::size_t>(q), -1);
    for (Int n : units) {
      Int v = 0;
      for (const auto& c : comps) v += c.pairing(m, n) * (den / c.den);
      num[static_cast<std::size_t>(mod(n, q))] = mod(v, den);
    }
    index_[static_cast<std::size_t>(mod(m, q))] = static_cast<std::ptrdiff_t>(characters_.size());
    characters_.emplace_back(q, m, den, std::move(num));
  }
}

const DirichletCharacter& CharacterTable::by_label(Int label) const {
  std::ptrdiff_t i = index_[static_cast<std::size_t>(mod(label, q()))];
  if (i < 0) throw Error(Errc::invalid_class, "no character with Conrey label " + std::to_string(label));
  return characters_[static_cast<std::size_t>(i)];
}

Int CharacterTable::conjugate_label(Int label) const { return modulus_.canonical(mod_inverse(label, q())); }

std::vector<const DirichletCharacter*> CharacterTable::nontrivial() const {
  std::vector<const DirichletCharacter*> out;
  for (const auto& chi : characters_) {
    if (!chi.is_principal()) out.push_back(&chi);
  }
  return out;
}

std::shared_ptr<const CharacterTable> build_character_table(Int q) {
  if (q < 3) throw Error(Errc::invalid_modulus, "character tables need q >= 3, got " + std::to_string(q));
  static std::mutex mutex;
  static std::map<Int, std::shared_ptr<const CharacterTable>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(q); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const CharacterTable>(q);
  std::lock_guard lock(mutex);
  return cache.emplace(q, std::move(table)).first->second;
}

Inducer conductor_and_inducer(const DirichletCharacter& chi) {
  const Int qs = chi.conductor();
  if (qs == 1) return {};
  if (qs == chi.modulus()) return {qs, chi.conrey_index(), build_character_table(qs)};

  auto table = build_character_table(qs);
  const Modulus m(chi.modulus());
  const std::vector<Int> units = m.units();
  auto agrees = [&](const DirichletCharacter& psi) {
    for (Int n : units) {
      // chi(n) = psi(n): compare exponents as fractions.
      Int a = *chi.exponent(n), b = *psi.exponent(n);
      if (a * psi.denominator() != b * chi.denominator()) return false;
    }
    return true;
  };
  // Conrey labels are compatible with induction: the inducer is m mod q*.
  const Int guess = mod(chi.conrey_index(), qs);
  if (std::gcd(guess, qs) == 1 && agrees(table->by_label(guess))) return {qs, table->by_label(guess).conrey_index(), table};
  for (const auto& psi : table->characters()) {
    if (psi.primitive() && agrees(psi)) return {qs, psi.conrey_index(), table};
  }
  throw Error(Errc::validation_error, "no primitive inducer found for character " + std::to_string(chi.conrey_index()) +
                                          " mod " + std::to_string(chi.modulus()));
}

Int c_q(Int a, Int q) {
  if (q < 1) throw Error(Errc::invalid_modulus, "modulus must be positive");
  if (std::gcd(mod(a, q), q) != 1) {
    throw Error(Errc::invalid_class, std::to_string(a) + " is not coprime to " + std::to_string(q));
  }
  const Int target = mod(a, q);
  Int roots = 0;
  for (Int b = 1; b <= q; ++b) {
    if (mod_mul(b, b, q) == target) ++roots;
  }
  return roots - 1;
}

}  // namespace race
