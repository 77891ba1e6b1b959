#pragma once

#include <complex>
#include <filesystem>
#include <map>
#include <vector>

#include "race/arith.hpp"
#include "race/lzeros.hpp"

namespace race::testing {

/// Shared zero cache for the test binaries (RACE_TEST_ZERO_DIR, else the
/// directory baked in at configure time).
std::filesystem::path zero_dir();
lzeros::ZeroStore& zero_store();
const lzeros::ModulusZeroData& modulus_zeros(Int q, double height);

/// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// L(1, chi) and L'(1, chi) for a nonprincipal character, by partial sums plus
/// an Euler-Maclaurin tail per residue class.
std::pair<std::complex<long double>, std::complex<long double>> l_and_derivative_at_one(const DirichletCharacter& chi);

/// Sum over all ordinates of 1/(1/4 + gamma^2) for a primitive character, from
/// the explicit formula log(q/pi) + psi((1 + a)/2) + 2 Re L'/L(1, chi).
long double explicit_zero_sum(const DirichletCharacter& primitive);

/// Var(q) and B_q(a, b) from explicit_zero_sum of each inducer.
long double explicit_variance(Int q);
long double explicit_b(Int q, Int a, Int b);

}  // namespace race::testing
