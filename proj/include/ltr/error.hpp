#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltr {

enum class ErrorKind {
  DimensionMismatch,
  NotStable,
  NotStabilizable,
  NotDetectable,
  ConvergenceFailure,
  ImproperTransferFunction,
  AlgebraicLoop,
  SingularAtFrequency,
  UnstableSystem,
  UnstableClosedLoop,
  InvalidParameters,
  NearSingularGramian,
  SingularTransformation,
  NumericalBlowup,
  InsufficientCycles,
  DivergedFilter,
  SingularInertia,
  NonFiniteInput,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ltr
