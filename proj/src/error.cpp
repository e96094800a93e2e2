#include "latticeborell/error.hpp"

namespace latticeborell {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroDirection: return "zero-direction";
    case ErrorKind::UnboundedBody: return "unbounded-body";
    case ErrorKind::LpInfeasible: return "lp-infeasible";
    case ErrorKind::OriginOutside: return "origin-outside";
    case ErrorKind::BudgetExceeded: return "budget-exceeded";
    case ErrorKind::EmptyDistribution: return "empty-distribution";
    case ErrorKind::EmptyLattice: return "empty-lattice";
    case ErrorKind::HypothesisViolated: return "hypothesis-violated";
    case ErrorKind::BallNotContained: return "ball-not-contained";
    case ErrorKind::PreconditionViolated: return "precondition-violated";
    case ErrorKind::RotationBudgetZero: return "rotation-budget-zero";
    case ErrorKind::DegenerateBody: return "degenerate-body";
    case ErrorKind::ZeroBudget: return "zero-budget";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::IoError: return "io-error";
  }
  return "unknown";
}

}  // namespace latticeborell
