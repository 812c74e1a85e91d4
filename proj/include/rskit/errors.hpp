#ifndef RSKIT_ERRORS_HPP
#define RSKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rskit {

// Invalid hyperparameter or loss parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dimension mismatch between vectors, points or matrices.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data: unnormalized weights, bad CSV, unknown config keys.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver ran out of iterations. `residual` is the last
// optimality measure it observed.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Two quantities that must agree by construction do not, e.g. a Lipschitz
// bound smaller than the fragility it is supposed to dominate.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rskit

#endif  // RSKIT_ERRORS_HPP
