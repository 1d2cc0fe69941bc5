#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ordibound {

enum class ErrorKind {
  // probability inputs
  NegativeMass,
  NotAProbabilityVector,
  TooFewCategories,
  IndexOutOfRange,
  MarginalShapeMismatch,
  // attainment / linear programming
  DominanceViolated,
  FillInfeasible,
  ConstructionInvalid,
  Infeasible,
  Unbounded,
  // model fitting
  Separation,
  DegenerateDesign,
  SingleCategory,
  DimensionMismatch,
  // estimation
  EmptyArm,
  MissingCovariates,
  TooFewReplicates,
  EstimationError,
  // input parsing
  MalformedRow,
  NonIntegerCategory,
  MissingColumn,
  LengthMismatch,
  NegativeCount,
  InputUnreadable,
  Usage,
};

std::string_view to_string(ErrorKind kind);

// Broad class of an error, used for CLI exit codes.
enum class ErrorClass { Usage, Data, Numerical };

ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ordibound
