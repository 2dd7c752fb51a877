#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fwav {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's documented domain.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Reduced attitude at (or numerically near) the antipode of e3.
class DegenerateAttitude : public Error {
 public:
  using Error::Error;
};

/// Heading is undefined because the horizontal speed is too small.
class DegenerateHeading : public Error {
 public:
  using Error::Error;
};

/// Thrust magnitude recovered from the flat outputs is negligible.
class NegligibleThrust : public Error {
 public:
  using Error::Error;
};

/// Required heading acceleration cannot be produced with |Gamma_y| <= 1.
class InfeasibleHeadingAcceleration : public Error {
 public:
  using Error::Error;
};

/// Deflection torque gain vanishes, so the deflection cannot be inverted.
class UnrecoverableDeflection : public Error {
 public:
  using Error::Error;
};

/// Non-finite value encountered while integrating.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Combined acceleration demand too small to define thrust direction.
class DegenerateDecomposition : public Error {
 public:
  using Error::Error;
};

/// Time or index outside the trajectory domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Linear equality constraints are rank deficient.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// No planner restart satisfied the sampled constraints.
class InfeasiblePlan : public Error {
 public:
  InfeasiblePlan(const std::string& what, std::string residual, double value, double time)
      : Error(what), residual_(std::move(residual)), value_(value), time_(time) {}
  const std::string& residual() const noexcept { return residual_; }
  double value() const noexcept { return value_; }
  double time() const noexcept { return time_; }

 private:
  std::string residual_;
  double value_;
  double time_;
};

/// Closed-loop run left the admissible region (position norm too large).
class Divergence : public Error {
 public:
  Divergence(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Least-squares regressor carries too little information.
class InsufficientExcitation : public Error {
 public:
  InsufficientExcitation(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace fwav
