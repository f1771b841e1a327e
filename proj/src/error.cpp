#include "apxne/error.hpp"

namespace apxne {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnsupportedTerm: return "UnsupportedTerm";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NotAVertex: return "NotAVertex";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NotInInterior: return "NotInInterior";
    case ErrorCode::NoViolation: return "NoViolation";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::WrongCostClass: return "WrongCostClass";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::DichotomyViolation: return "DichotomyViolation";
    case ErrorCode::InvalidApproximation: return "InvalidApproximation";
    case ErrorCode::NotADecrease: return "NotADecrease";
    case ErrorCode::InvalidBound: return "InvalidBound";
    case ErrorCode::GenerationFailure: return "GenerationFailure";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::HasContinuous: return "HasContinuous";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace apxne
