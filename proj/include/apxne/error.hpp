#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apxne {

enum class ErrorCode {
  ParseError,
  ValidationError,
  UnsupportedTerm,
  NumericalFailure,
  NotAVertex,
  Infeasible,
  NotInInterior,
  NoViolation,
  AssumptionViolated,
  WrongCostClass,
  WrongMode,
  DichotomyViolation,
  InvalidApproximation,
  NotADecrease,
  InvalidBound,
  GenerationFailure,
  TooLarge,
  HasContinuous,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace apxne
