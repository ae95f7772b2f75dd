#pragma once

#include <stdexcept>
#include <string>

namespace carbon {

/// Malformed case file (bad JSON, wrong types, unknown keys).
class CaseParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Case data parsed but violates a model invariant.
class CaseValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: infeasible LP, singular network, excessive degeneracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public NumericalError {
 public:
  explicit InfeasibleError(const std::string& what, long ineq_row = -1) : NumericalError(what), ineq_row_(ineq_row) {}

  /// Index of the violated inequality row, or -1 when not attributable to one.
  long ineq_row() const { return ineq_row_; }

 private:
  long ineq_row_;
};

/// Finite-difference probe crossed a change of the optimal binding set.
class BreakpointStraddleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace carbon
