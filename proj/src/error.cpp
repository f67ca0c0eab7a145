#include "whim/error.hpp"

namespace whim {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Ingestion: return "ingestion_error";
    case ErrorCode::UnknownColumn: return "unknown_column";
    case ErrorCode::UnknownValue: return "unknown_value";
    case ErrorCode::WrongColumnKind: return "wrong_column_kind";
    case ErrorCode::EmptySelection: return "empty_selection";
    case ErrorCode::ScenarioInfeasible: return "scenario_infeasible";
    case ErrorCode::DegenerateDistribution: return "degenerate_distribution";
    case ErrorCode::NumericalFailure: return "numerical_failure";
  }
  return "error";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace whim
