#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace margot {

// Three error classes map one-to-one onto the CLI exit codes:
// input errors -> 2, numeric failures -> 3, non-convergence -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

struct NotStronglyConnected : InputError {
  using InputError::InputError;
};

struct NegativeCost : InputError {
  using InputError::InputError;
};

struct NonPositiveAffinity : InputError {
  using InputError::InputError;
};

struct DuplicateEdge : InputError {
  using InputError::InputError;
};

struct NegativeEntry : InputError {
  using InputError::InputError;
};

struct SumNotOne : InputError {
  using InputError::InputError;
};

struct EmptyGroup : InputError {
  using InputError::InputError;
};

struct TooLarge : InputError {
  using InputError::InputError;
};

struct Infeasible : InputError {
  using InputError::InputError;
};

struct BadParameter : InputError {
  using InputError::InputError;
};

struct NonRegularChain : NumericError {
  using NumericError::NumericError;
};

struct IllConditionedPseudoinverse : NumericError {
  using NumericError::NumericError;
};

struct AlphaOutOfRange : NumericError {
  using NumericError::NumericError;
};

struct SingularSystem : NumericError {
  using NumericError::NumericError;
};

struct DivergentScaling : NumericError {
  using NumericError::NumericError;
};

struct NegativeFlow : NumericError {
  using NumericError::NumericError;
};

namespace detail {
inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}
} // namespace detail

struct NoConvergence : ConvergenceError {
  int iterations;
  double residual;
  NoConvergence(int iterations_, double residual_)
      : ConvergenceError("scaling did not reach tolerance after " +
                         std::to_string(iterations_) +
                         " iterations (residual " +
                         detail::short_num(residual_) + ")"),
        iterations(iterations_), residual(residual_) {}
};

} // namespace margot
