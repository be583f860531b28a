#ifndef SYNTHCITY_ERRORS_HPP
#define SYNTHCITY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace synthcity {

enum class Errc {
  invalid_argument,
  empty_network,
  planarity_violation,
  syntax_error,
  unknown_operation,
  undefined_symbol,
  non_positive_weight,
  split_overflow,
  split_underflow,
  recursion_limit,
  empty_derivation,
  invalid_fov,
  dimension_mismatch,
  empty_result,
  io_error,
  config_error,
};

const char* errc_name(Errc c);

/// All library failures are reported through this exception. The code
/// distinguishes the failure kinds named in the module contracts.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::empty_network: return "EmptyNetwork";
    case Errc::planarity_violation: return "PlanarityViolation";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::unknown_operation: return "UnknownOperation";
    case Errc::undefined_symbol: return "UndefinedSymbol";
    case Errc::non_positive_weight: return "NonPositiveWeight";
    case Errc::split_overflow: return "Overflow";
    case Errc::split_underflow: return "Underflow";
    case Errc::recursion_limit: return "RecursionLimitExceeded";
    case Errc::empty_derivation: return "EmptyDerivation";
    case Errc::invalid_fov: return "InvalidFov";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_result: return "EmptyResult";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
  }
  return "Error";
}

}  // namespace synthcity

#endif  // SYNTHCITY_ERRORS_HPP
