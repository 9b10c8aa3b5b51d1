#pragma once

#include <stdexcept>
#include <string>

namespace sharptrace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs failed (bad parameters, out-of-range exponents).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A mathematical hypothesis of an estimate is not met, e.g. vanishing curvature.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// A calibrated constant was requested but no calibration artifact is available.
class Uncalibrated : public Error {
 public:
  using Error::Error;
};

/// An iterative solve failed; carries the best residual reached.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace sharptrace
