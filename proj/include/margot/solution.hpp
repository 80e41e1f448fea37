#pragma once

#include "graph.hpp"

namespace margot {

struct SolveTimings {
  double factorization_s = 0.0;
  double scaling_s = 0.0;
  double derived_s = 0.0;
};

struct SolutionResiduals {
  double margin = 0.0;
  double conservation = 0.0;
  double consistency = 0.0;
};

// Rows with positive mass become stochastic; zero rows stay zero.
inline Matrix policy_from_flows(const Matrix& edge_flows) {
  Matrix policy = Matrix::Zero(edge_flows.rows(), edge_flows.cols());
  for (Index i = 0; i < edge_flows.rows(); ++i) {
    const double total = edge_flows.row(i).sum();
    if (total > 0.0)
      policy.row(i) = edge_flows.row(i) / total;
  }
  return policy;
}

// Shared by the solvers and the output re-checker so recomputed residuals
// reproduce stored ones bit-for-bit under the same build.
inline SolutionResiduals solution_residuals(const Matrix& gamma,
                                            const Matrix& edge_flows,
                                            const Vector& node_visits,
                                            const MarginPair& margins) {
  SolutionResiduals r;
  r.margin = (gamma.rowwise().sum() - margins.sigma_in)
                 .lpNorm<Eigen::Infinity>() +
             (gamma.colwise().sum().transpose() - margins.sigma_out)
                 .lpNorm<Eigen::Infinity>();
  r.conservation = ((edge_flows - edge_flows.transpose()) *
                        Vector::Ones(edge_flows.rows()) -
                    (margins.sigma_in - margins.sigma_out))
                       .lpNorm<Eigen::Infinity>();
  r.consistency = (node_visits - (edge_flows.rowwise().sum() + margins.sigma_out))
                      .lpNorm<Eigen::Infinity>();
  return r;
}

} // namespace margot
