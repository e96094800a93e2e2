#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latticeborell {

enum class ErrorKind {
  ZeroDirection,
  UnboundedBody,
  LpInfeasible,
  OriginOutside,
  BudgetExceeded,
  EmptyDistribution,
  EmptyLattice,
  HypothesisViolated,
  BallNotContained,
  PreconditionViolated,
  RotationBudgetZero,
  DegenerateBody,
  ZeroBudget,
  Unsupported,
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind so the
/// harness can record it in a report row instead of aborting a sweep.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace latticeborell
