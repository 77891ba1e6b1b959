#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace race {

/// Failure categories surfaced by the library. The CLI maps them onto exit
/// codes (data errors vs usage errors).
enum class Errc {
  invalid_modulus,
  invalid_class,
  invalid_spec,
  must_be_primitive,
  unsupported_conductor,
  precision_failure,
  parse_error,
  validation_error,
  incomplete_zero_data,
  invalid_pair,
  singular_matrix,
  invalid_covariance,
  invalid_scale,
  q_too_small,
  invalid_comparison,
  invalid_argument,
  io_error,
  memory_budget,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace race
