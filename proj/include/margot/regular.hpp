#pragma once

#include <chrono>

#include "fundamental.hpp"
#include "killing.hpp"
#include "scaling.hpp"
#include "solution.hpp"

namespace margot {

struct RegularSolution {
  Matrix gamma;
  double fe_min = 0.0;
  Matrix edge_flows;
  Vector node_visits;
  Matrix policy;
  Vector mu_in;
  Vector mu_out;
  double beta = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool underflow = false;
  KillingProfile killing;
};

inline Matrix regular_fundamental(const Matrix& P_hat_ref, const Matrix& C,
                                  double beta) {
  return FundamentalFactor(P_hat_ref, C, beta).materialize();
}

inline ScalingResult regular_scaling(const Matrix& Z_hat,
                                     const MarginPair& margins,
                                     const Vector& alpha, const Vector& n_ref,
                                     double tol = 1e-10,
                                     int max_iter = 10000) {
  return balance_margins(
      [&](const Vector& x) { return Vector(Z_hat * x); },
      [&](const Vector& x) { return Vector(Z_hat.transpose() * x); },
      margins.sigma_in, margins.sigma_out, alpha, n_ref, tol, max_iter);
}

inline Matrix regular_coupling(const Vector& mu_in, const Vector& mu_out,
                               const Matrix& Z_hat, const Vector& sigma_in,
                               const Vector& alpha) {
  return mu_in.cwiseProduct(sigma_in).asDiagonal() * Z_hat *
         mu_out.cwiseProduct(alpha).asDiagonal();
}

inline double regular_free_energy(const Vector& mu_in, const Vector& mu_out,
                                  const MarginPair& margins, double beta) {
  return (mu_in.array().log().matrix().dot(margins.sigma_in) +
          mu_out.array().log().matrix().dot(margins.sigma_out)) /
         beta;
}

inline Matrix regular_edge_flows(const Vector& n_ref, const Vector& mu_in,
                                 const Vector& mu_out, const Matrix& W_hat) {
  return n_ref.cwiseQuotient(mu_out).asDiagonal() * W_hat *
         mu_in.cwiseInverse().asDiagonal();
}

inline Vector regular_node_visits(const Vector& n_ref, const Vector& mu_in,
                                  const Vector& mu_out) {
  return n_ref.cwiseQuotient(mu_in.cwiseProduct(mu_out));
}

inline Matrix regular_policy(const Matrix& edge_flows) {
  return policy_from_flows(edge_flows);
}

inline RegularSolution solve_regular(const WeightedDigraph& g,
                                     const MarginPair& margins, double beta,
                                     double epsilon_gap = 1e-8,
                                     double tol = 1e-10, int max_iter = 10000,
                                     SolveTimings* timings = nullptr) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  ReferenceChain chain = reference_transitions(g);
  KillingProfile killing = compute_killing(chain, margins, epsilon_gap);
  Matrix P_hat = killed_transitions(chain, killing.alpha);
  FundamentalFactor factor(P_hat, g.cost, beta);
  const auto t1 = clock::now();
  ScalingResult scaling = balance_margins(
      [&](const Vector& x) { return factor.solve(x); },
      [&](const Vector& x) { return factor.solve_transposed(x); },
      margins.sigma_in, margins.sigma_out, killing.alpha, killing.n_ref, tol,
      max_iter);
  const auto t2 = clock::now();
  Matrix Z_hat = factor.materialize();
  RegularSolution s;
  s.gamma = regular_coupling(scaling.mu_in, scaling.mu_out, Z_hat,
                             margins.sigma_in, killing.alpha);
  s.fe_min = regular_free_energy(scaling.mu_in, scaling.mu_out, margins, beta);
  s.edge_flows = regular_edge_flows(killing.n_ref, scaling.mu_in,
                                    scaling.mu_out, factor.W());
  s.node_visits =
      regular_node_visits(killing.n_ref, scaling.mu_in, scaling.mu_out);
  s.policy = regular_policy(s.edge_flows);
  s.mu_in = std::move(scaling.mu_in);
  s.mu_out = std::move(scaling.mu_out);
  s.beta = beta;
  s.iterations = scaling.iterations;
  s.residual = scaling.residual;
  s.underflow = factor.underflow();
  s.killing = std::move(killing);
  const auto t3 = clock::now();
  if (timings) {
    timings->factorization_s = std::chrono::duration<double>(t1 - t0).count();
    timings->scaling_s = std::chrono::duration<double>(t2 - t1).count();
    timings->derived_s = std::chrono::duration<double>(t3 - t2).count();
  }
  return s;
}

} // namespace margot
