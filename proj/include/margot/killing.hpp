#pragma once

#include <utility>

#include "graph.hpp"

namespace margot {

struct KillingProfile {
  Vector alpha;       // per-node killing rates, in [0, 1]
  Vector n_ref;       // expected reference visit counts, strictly positive
  double epsilon = 0.0;
  double epsilon_gap = 0.0;
};

// n_ref = Q^+ (sigma_in - P_ref^T sigma_out) + epsilon * pi_ref with
// Q = I - P_ref^T; epsilon sits epsilon_gap above its lower bound, which
// keeps n_ref >= sigma_out elementwise.
inline std::pair<Vector, double> reference_visits(const ReferenceChain& chain,
                                                  const MarginPair& margins,
                                                  double epsilon_gap) {
  if (!(epsilon_gap > 0.0))
    throw BadParameter("epsilon_gap must be positive");
  const Index n = chain.P_ref.rows();
  Vector n0;
  if (n == 1) {
    n0 = Vector::Zero(1);
  } else {
    Matrix Q = Matrix::Identity(n, n) - chain.P_ref.transpose();
    auto factor = chain.factor;
    if (!factor)
      factor =
          std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(Q);
    Vector tdiag = factor->matrixT().diagonal().cwiseAbs();
    const double dmax = tdiag.head(n - 1).maxCoeff();
    const double dmin = tdiag.head(n - 1).minCoeff();
    if (factor->rank() < n - 1 || !(dmin > 0.0) || dmax / dmin > 1e12)
      throw IllConditionedPseudoinverse(
          "rank-(n-1) visit system condition estimate exceeds 1e12");
    Vector rhs = margins.sigma_in - chain.P_ref.transpose() * margins.sigma_out;
    n0 = factor->solve(rhs);
  }
  const double epsilon =
      ((margins.sigma_out - n0).array() / chain.pi_ref.array()).maxCoeff() +
      epsilon_gap;
  Vector n_ref = n0 + epsilon * chain.pi_ref;
  return {std::move(n_ref), epsilon};
}

inline Vector killing_rates(const Vector& n_ref, const Vector& sigma_out) {
  if (n_ref.size() != sigma_out.size())
    throw BadParameter("n_ref and sigma_out must have equal length");
  if (!(n_ref.array() > 0.0).all())
    throw BadParameter("n_ref must be strictly positive");
  Vector alpha = sigma_out.cwiseQuotient(n_ref);
  for (Index i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > 1.0 + 1e-12)
      throw AlphaOutOfRange("killing rate " + std::to_string(alpha[i]) +
                            " at node " + std::to_string(i + 1) +
                            " exceeds 1; epsilon is below its lower bound");
    if (alpha[i] > 1.0)
      alpha[i] = 1.0; // round-off at the persistence lower bound
  }
  return alpha;
}

// P_hat_ref = (I - Diag(alpha)) P_ref; substochastic wherever alpha_i > 0.
inline Matrix killed_transitions(const ReferenceChain& chain,
                                 const Vector& alpha) {
  if (alpha.size() != chain.P_ref.rows())
    throw BadParameter("alpha must have one entry per node");
  if (alpha.minCoeff() < 0.0 || alpha.maxCoeff() > 1.0)
    throw BadParameter("alpha entries must lie in [0, 1]");
  return (1.0 - alpha.array()).matrix().asDiagonal() * chain.P_ref;
}

inline KillingProfile compute_killing(const ReferenceChain& chain,
                                      const MarginPair& margins,
                                      double epsilon_gap = 1e-8) {
  auto [n_ref, epsilon] = reference_visits(chain, margins, epsilon_gap);
  KillingProfile k;
  k.n_ref = std::move(n_ref);
  k.alpha = killing_rates(k.n_ref, margins.sigma_out);
  k.epsilon = epsilon;
  k.epsilon_gap = epsilon_gap;
  return k;
}

} // namespace margot
