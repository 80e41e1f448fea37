#pragma once

#include <cfloat>

#include "errors.hpp"
#include "graph.hpp"

namespace margot {

// LU of (I - W) with W = P .* exp(-beta C) supported on edges of P.
// Nonnegativity of the inverse characterizes rho(W) < 1 for nonnegative W,
// so materialize() doubles as the singularity check.
class FundamentalFactor {
public:
  FundamentalFactor(const Matrix& P, const Matrix& C, double beta) {
    if (!(beta > 0.0))
      throw BadParameter("beta must be positive");
    if (P.rows() != P.cols() || C.rows() != C.cols() || P.rows() != C.rows())
      throw BadParameter("transition and cost matrices must be square and "
                         "equally sized");
    const Index n = P.rows();
    W_ = P.cwiseProduct((-beta * C).array().exp().matrix());
    // Below the smallest positive normal counts as underflow: vectorized
    // exp may land on a denormal floor instead of exact zero.
    underflow_ = false;
    for (Index i = 0; i < n && !underflow_; ++i)
      for (Index j = 0; j < n; ++j)
        if (P(i, j) > 0.0 && W_(i, j) < DBL_MIN) {
          underflow_ = true;
          break;
        }
    lu_.compute(Matrix::Identity(n, n) - W_);
    if (!(lu_.rcond() > 1e-15))
      throw SingularSystem("I - W is numerically singular; the discounted "
                           "chain has spectral radius >= 1");
  }

  Index size() const { return W_.rows(); }
  const Matrix& W() const { return W_; }
  bool underflow() const { return underflow_; }

  Vector solve(const Vector& b) const { return lu_.solve(b); }
  Vector solve_transposed(const Vector& b) const {
    return lu_.transpose().solve(b);
  }

  // Z = (I - W)^{-1}; validated nonnegative with unit-or-larger diagonal.
  Matrix materialize() const {
    const Index n = W_.rows();
    Matrix Z = lu_.solve(Matrix::Identity(n, n));
    const double scale = std::max(1.0, Z.cwiseAbs().maxCoeff());
    if (Z.minCoeff() < -1e-12 * scale ||
        Z.diagonal().minCoeff() < 1.0 - 1e-8)
      throw SingularSystem("fundamental matrix has negative entries; the "
                           "discounted chain has spectral radius >= 1");
    return Z;
  }

private:
  Matrix W_;
  Eigen::PartialPivLU<Matrix> lu_;
  bool underflow_ = false;
};

} // namespace margot
