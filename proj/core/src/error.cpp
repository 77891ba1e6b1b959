#include "race/error.hpp"

namespace race {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_modulus: return "invalid-modulus";
    case Errc::invalid_class: return "invalid-class";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::must_be_primitive: return "must-be-primitive";
    case Errc::unsupported_conductor: return "unsupported-conductor";
    case Errc::precision_failure: return "precision-failure";
    case Errc::parse_error: return "parse-error";
    case Errc::validation_error: return "validation-error";
    case Errc::incomplete_zero_data: return "incomplete-zero-data";
    case Errc::invalid_pair: return "invalid-pair";
    case Errc::singular_matrix: return "singular-matrix";
    case Errc::invalid_covariance: return "invalid-covariance";
    case Errc::invalid_scale: return "invalid-scale";
    case Errc::q_too_small: return "q-too-small";
    case Errc::invalid_comparison: return "invalid-comparison";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::io_error: return "io-error";
    case Errc::memory_budget: return "memory-budget";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace race
