#include "ordibound/error.hpp"

namespace ordibound {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NegativeMass: return "NegativeMass";
    case ErrorKind::NotAProbabilityVector: return "NotAProbabilityVector";
    case ErrorKind::TooFewCategories: return "TooFewCategories";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::MarginalShapeMismatch: return "MarginalShapeMismatch";
    case ErrorKind::DominanceViolated: return "DominanceViolated";
    case ErrorKind::FillInfeasible: return "FillInfeasible";
    case ErrorKind::ConstructionInvalid: return "ConstructionInvalid";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::Separation: return "Separation";
    case ErrorKind::DegenerateDesign: return "DegenerateDesign";
    case ErrorKind::SingleCategory: return "SingleCategory";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyArm: return "EmptyArm";
    case ErrorKind::MissingCovariates: return "MissingCovariates";
    case ErrorKind::TooFewReplicates: return "TooFewReplicates";
    case ErrorKind::EstimationError: return "EstimationError";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NonIntegerCategory: return "NonIntegerCategory";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NegativeCount: return "NegativeCount";
    case ErrorKind::InputUnreadable: return "InputUnreadable";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
      return ErrorClass::Usage;
    case ErrorKind::NegativeMass:
    case ErrorKind::NotAProbabilityVector:
    case ErrorKind::TooFewCategories:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::MarginalShapeMismatch:
    case ErrorKind::DominanceViolated:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::EmptyArm:
    case ErrorKind::MissingCovariates:
    case ErrorKind::MalformedRow:
    case ErrorKind::NonIntegerCategory:
    case ErrorKind::MissingColumn:
    case ErrorKind::LengthMismatch:
    case ErrorKind::NegativeCount:
    case ErrorKind::InputUnreadable:
    case ErrorKind::SingleCategory:
      return ErrorClass::Data;
    default:
      return ErrorClass::Numerical;
  }
}

}  // namespace ordibound
