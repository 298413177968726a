#include "inhomwalk/error.hpp"

namespace inhomwalk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonIntegerAtomOnLattice: return "NonIntegerAtomOnLattice";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DuplicateAtom: return "DuplicateAtom";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::DegenerateSchedule: return "DegenerateSchedule";
    case ErrorCode::NotCentered: return "NotCentered";
    case ErrorCode::MomentHypothesisViolated: return "MomentHypothesisViolated";
    case ErrorCode::InfeasibleConstraint: return "InfeasibleConstraint";
    case ErrorCode::ZeroProbabilityEvent: return "ZeroProbabilityEvent";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ParityViolation: return "ParityViolation";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::ZeroProbability: return "ZeroProbability";
    case ErrorCode::OutOfRegime: return "OutOfRegime";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::DegenerateAcceptance: return "DegenerateAcceptance";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace inhomwalk
