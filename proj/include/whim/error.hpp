#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace whim {

enum class ErrorCode {
  InvalidArgument,
  Ingestion,
  UnknownColumn,
  UnknownValue,
  WrongColumnKind,
  EmptySelection,
  ScenarioInfeasible,
  DegenerateDistribution,
  NumericalFailure,
};

/// Machine-readable name used in JSON error payloads ("unknown_column", ...).
std::string_view code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace whim
