#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ncwait {

/// A caller broke an operation's precondition (invalid state, infeasible action).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arrival probabilities for which the threshold chain's closed form is 0/0
/// (p1 = p2 = 0 or p1 = p2 = 1).
class DegenerateParameters : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, std::vector<double> history = {})
      : std::runtime_error(what + " (last residual " + std::to_string(residual) + ")"),
        residual_(residual),
        history_(std::move(history)) {}

  double residual() const noexcept { return residual_; }
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  double residual_;
  std::vector<double> history_;
};

/// The occupancy LP was infeasible or unbounded, which means it was built wrong.
class LpConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A report does not carry the requested metric (e.g. state frequencies of a line run).
class UnsupportedMetric : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ncwait
