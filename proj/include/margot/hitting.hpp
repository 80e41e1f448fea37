#pragma once

#include <chrono>
#include <utility>

#include "fundamental.hpp"
#include "graph.hpp"
#include "scaling.hpp"
#include "solution.hpp"

namespace margot {

// One factorization per (graph, beta); immutable, shareable across margin
// pairs and across threads.
struct HittingFundamental {
  Matrix Z;
  Matrix Z_h;
  Matrix W;
  double beta = 0.0;
  bool underflow = false;

  Index size() const { return Z.rows(); }
};

inline HittingFundamental hitting_fundamental(const Matrix& P_ref,
                                              const Matrix& C, double beta) {
  FundamentalFactor factor(P_ref, C, beta);
  HittingFundamental f;
  f.Z = factor.materialize();
  // Unit diagonal is exact: each column is divided by its own diagonal entry.
  f.Z_h = f.Z * f.Z.diagonal().cwiseInverse().asDiagonal();
  f.W = factor.W();
  f.beta = beta;
  f.underflow = factor.underflow();
  return f;
}

inline ScalingResult hitting_scaling(const Matrix& Z_h,
                                     const MarginPair& margins,
                                     double tol = 1e-10,
                                     int max_iter = 10000) {
  return balance_margins(
      [&](const Vector& x) { return Vector(Z_h * x); },
      [&](const Vector& x) { return Vector(Z_h.transpose() * x); },
      margins.sigma_in, margins.sigma_out, margins.sigma_out,
      Vector::Ones(Z_h.rows()), tol, max_iter);
}

inline Matrix hitting_coupling(const Vector& mu_h_in, const Vector& mu_h_out,
                               const Matrix& Z_h, const MarginPair& margins) {
  return mu_h_in.cwiseProduct(margins.sigma_in).asDiagonal() * Z_h *
         mu_h_out.cwiseProduct(margins.sigma_out).asDiagonal();
}

inline double hitting_free_energy(const Vector& mu_h_in,
                                  const Vector& mu_h_out,
                                  const MarginPair& margins, double beta) {
  return (mu_h_in.array().log().matrix().dot(margins.sigma_in) +
          mu_h_out.array().log().matrix().dot(margins.sigma_out)) /
         beta;
}

namespace detail {

// M_ij = sum_k z_h(i,k) sigma_out(k) z_h(k,j): expected crossings through
// absorbing mass; the single O(n^3) product of the hitting pipeline.
inline Matrix hitting_visit_matrix(const Matrix& Z_h, const Vector& sigma_out) {
  return Z_h * sigma_out.asDiagonal() * Z_h;
}

inline Matrix hitting_edge_flows_impl(const Matrix& Z, const Matrix& W,
                                      const Matrix& M, const Vector& mu_h_in,
                                      const Vector& mu_h_out) {
  const Index n = Z.rows();
  Matrix N(n, n);
  for (Index i = 0; i < n; ++i) {
    const double zii = Z(i, i);
    const double oi = 1.0 / mu_h_out(i);
    for (Index j = 0; j < n; ++j) {
      double v = (oi / mu_h_in(j) - M(j, i)) * zii * W(i, j);
      if (v < 0.0) {
        if (v < -1e-12)
          throw NegativeFlow("edge flow " + std::to_string(v) + " at (" +
                             std::to_string(i) + "," + std::to_string(j) +
                             ") below round-off clamp");
        v = 0.0;
      }
      N(i, j) = v;
    }
  }
  return N;
}

inline Vector hitting_node_visits_impl(const Vector& Z_diag,
                                       const Vector& M_diag,
                                       const Vector& mu_h_in,
                                       const Vector& mu_h_out,
                                       const Vector& sigma_out) {
  return Z_diag.cwiseProduct(
             mu_h_in.cwiseProduct(mu_h_out).cwiseInverse() - M_diag) +
         sigma_out;
}

} // namespace detail

inline Matrix hitting_edge_flows(const Matrix& Z, const Matrix& Z_h,
                                 const Matrix& W, const Vector& mu_h_in,
                                 const Vector& mu_h_out,
                                 const Vector& sigma_out) {
  Matrix M = detail::hitting_visit_matrix(Z_h, sigma_out);
  return detail::hitting_edge_flows_impl(Z, W, M, mu_h_in, mu_h_out);
}

inline Vector hitting_node_visits(const Matrix& Z, const Matrix& Z_h,
                                  const Vector& mu_h_in,
                                  const Vector& mu_h_out,
                                  const Vector& sigma_out) {
  // diag(Z_h Diag(sigma_out) Z_h) without the full product.
  Vector M_diag =
      Z_h.cwiseProduct(Z_h.transpose()) * sigma_out;
  return detail::hitting_node_visits_impl(Z.diagonal(), M_diag, mu_h_in,
                                          mu_h_out, sigma_out);
}

inline Matrix hitting_policy(const Matrix& edge_flows_h) {
  return policy_from_flows(edge_flows_h);
}

struct HittingSolution {
  Matrix gamma_h;
  double fe_min_h = 0.0;
  Matrix edge_flows_h;
  Vector node_visits_h;
  Matrix policy_h;
  Vector mu_h_in;
  Vector mu_h_out;
  double beta = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool underflow = false;
};

inline HittingSolution solve_hitting(const HittingFundamental& f,
                                     const MarginPair& margins,
                                     double tol = 1e-10, int max_iter = 10000,
                                     SolveTimings* timings = nullptr) {
  using clock = std::chrono::steady_clock;
  const auto t1 = clock::now();
  ScalingResult scaling = hitting_scaling(f.Z_h, margins, tol, max_iter);
  const auto t2 = clock::now();
  HittingSolution s;
  s.gamma_h = hitting_coupling(scaling.mu_in, scaling.mu_out, f.Z_h, margins);
  s.fe_min_h =
      hitting_free_energy(scaling.mu_in, scaling.mu_out, margins, f.beta);
  Matrix M = detail::hitting_visit_matrix(f.Z_h, margins.sigma_out);
  s.edge_flows_h = detail::hitting_edge_flows_impl(f.Z, f.W, M, scaling.mu_in,
                                                   scaling.mu_out);
  s.node_visits_h = detail::hitting_node_visits_impl(
      f.Z.diagonal(), M.diagonal(), scaling.mu_in, scaling.mu_out,
      margins.sigma_out);
  s.policy_h = hitting_policy(s.edge_flows_h);
  s.mu_h_in = std::move(scaling.mu_in);
  s.mu_h_out = std::move(scaling.mu_out);
  s.beta = f.beta;
  s.iterations = scaling.iterations;
  s.residual = scaling.residual;
  s.underflow = f.underflow;
  const auto t3 = clock::now();
  if (timings) {
    timings->scaling_s = std::chrono::duration<double>(t2 - t1).count();
    timings->derived_s = std::chrono::duration<double>(t3 - t2).count();
  }
  return s;
}

// No killing preprocessing: the hitting pipeline starts straight from the
// row-normalized affinities, so no stationary distribution is needed.
inline HittingSolution solve_hitting(const WeightedDigraph& g,
                                     const MarginPair& margins, double beta,
                                     double tol = 1e-10, int max_iter = 10000,
                                     SolveTimings* timings = nullptr) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  HittingFundamental f =
      hitting_fundamental(row_stochastic(g.affinity), g.cost, beta);
  const auto t1 = clock::now();
  HittingSolution s = solve_hitting(f, margins, tol, max_iter, timings);
  if (timings)
    timings->factorization_s = std::chrono::duration<double>(t1 - t0).count();
  return s;
}

} // namespace margot
