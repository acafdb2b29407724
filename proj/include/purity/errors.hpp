#pragma once

#include <stdexcept>
#include <string>

namespace purity {

/// Input that violates a documented constraint (bad field, non-traceless
/// operator, non-negative-definite dissipation, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A call whose mathematical precondition does not hold for otherwise
/// well-formed input (degenerate dissipation, singular linear system).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Signals a broken internal invariant, e.g. a complex residue that
/// should have cancelled exactly.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// An integrand evaluated to a non-finite value, or a Lagrangian hit a
/// vanishing denominator.
class SingularIntegrand : public std::runtime_error {
 public:
  SingularIntegrand(const std::string& what, double x)
      : std::runtime_error(what), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

/// No multistart candidate met the residual and feasibility requirements.
/// Carries the diagnostics of the best start that was found anyway.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, double best_residual, double best_value)
      : std::runtime_error(what), best_residual_(best_residual), best_value_(best_value) {}
  double best_residual() const noexcept { return best_residual_; }
  double best_value() const noexcept { return best_value_; }

 private:
  double best_residual_;
  double best_value_;
};

}  // namespace purity
