#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace inhomwalk {

enum class ErrorCode {
  EmptySupport,
  NegativeWeight,
  NonIntegerAtomOnLattice,
  NonFiniteInput,
  DuplicateAtom,
  InvalidArgument,
  TargetOutOfRange,
  DegenerateSchedule,
  NotCentered,
  MomentHypothesisViolated,
  InfeasibleConstraint,
  ZeroProbabilityEvent,
  TooLarge,
  ParityViolation,
  QuadratureNonConvergence,
  ZeroProbability,
  OutOfRegime,
  NonPositiveArgument,
  DegenerateAcceptance,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace inhomwalk
