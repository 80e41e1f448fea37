#pragma once

#include <string>

#include "hitting.hpp"
#include "regular.hpp"

namespace margot {

enum class DistanceKind {
  surprisal_regular,
  surprisal_hitting,
  free_energy_pairwise,
  group_fe_regular,
  group_fe_hitting
};

inline std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::surprisal_regular: return "surprisal-regular";
    case DistanceKind::surprisal_hitting: return "surprisal-hitting";
    case DistanceKind::free_energy_pairwise: return "free-energy-pairwise";
    case DistanceKind::group_fe_regular: return "group-FE-regular";
    case DistanceKind::group_fe_hitting: return "group-FE-hitting";
  }
  return "unknown";
}

struct DistanceMatrix {
  Matrix values;
  DistanceKind kind = DistanceKind::free_energy_pairwise;
  bool metric_claimed = false;
  bool has_infinite = false;
};

struct GroupSpec {
  Matrix membership;
  Vector node_weights;
};

namespace detail {

inline void validate_node_weights(const Vector& w, Index n) {
  if (w.size() != n)
    throw BadParameter("node weight vector length " +
                       std::to_string(w.size()) + " does not match " +
                       std::to_string(n) + " nodes");
  if (!w.allFinite() || w.minCoeff() <= 0.0)
    throw BadParameter("node weights must be strictly positive and finite");
  if (std::abs(w.sum() - 1.0) > 1e-9)
    throw SumNotOne("node weights sum to " + std::to_string(w.sum()));
}

inline std::vector<Vector> group_margins(const GroupSpec& groups, Index n) {
  if (groups.membership.rows() != n)
    throw BadParameter("membership matrix has " +
                       std::to_string(groups.membership.rows()) +
                       " rows for " + std::to_string(n) + " nodes");
  if (groups.membership.cols() < 1)
    throw BadParameter("membership matrix needs at least one group");
  if (!groups.membership.allFinite() || groups.membership.minCoeff() < 0.0)
    throw NegativeEntry("membership entries must be finite and nonnegative");
  for (Index i = 0; i < n; ++i)
    if (std::abs(groups.membership.row(i).sum() - 1.0) > 1e-9)
      throw SumNotOne("membership row " + std::to_string(i + 1) +
                      " sums to " +
                      std::to_string(groups.membership.row(i).sum()));
  validate_node_weights(groups.node_weights, n);
  std::vector<Vector> sigma;
  sigma.reserve(static_cast<std::size_t>(groups.membership.cols()));
  for (Index c = 0; c < groups.membership.cols(); ++c) {
    Vector numer = groups.node_weights.cwiseProduct(groups.membership.col(c));
    const double mass = numer.sum();
    if (mass <= 0.0)
      throw EmptyGroup("group " + std::to_string(c + 1) +
                       " has zero total weight");
    sigma.push_back(numer / mass);
  }
  return sigma;
}

} // namespace detail

inline DistanceMatrix free_energy_distance_matrix(const WeightedDigraph& g,
                                                  double beta) {
  HittingFundamental f =
      hitting_fundamental(row_stochastic(g.affinity), g.cost, beta);
  DistanceMatrix out;
  out.kind = DistanceKind::free_energy_pairwise;
  out.metric_claimed = false;
  out.values = (-f.Z_h.array().log()).matrix() / beta;
  out.values.diagonal().setZero();
  out.has_infinite = !out.values.allFinite();
  return out;
}

inline DistanceMatrix surprisal_distance(const WeightedDigraph& g,
                                         const Vector& w, double beta,
                                         PathMode mode, double tol = 1e-10,
                                         int max_iter = 10000) {
  detail::validate_node_weights(w, g.n);
  MarginPair margins{w, w, false};
  Matrix gamma;
  if (mode == PathMode::regular)
    gamma = solve_regular(g, margins, beta, 1e-8, tol, max_iter).gamma;
  else
    gamma = solve_hitting(g, margins, beta, tol, max_iter).gamma_h;
  DistanceMatrix out;
  out.kind = mode == PathMode::regular ? DistanceKind::surprisal_regular
                                       : DistanceKind::surprisal_hitting;
  out.metric_claimed = true;
  out.values = Matrix::Zero(g.n, g.n);
  for (Index i = 0; i < g.n; ++i)
    for (Index j = i + 1; j < g.n; ++j) {
      double v;
      if (gamma(i, j) <= 0.0 || gamma(j, i) <= 0.0) {
        v = std::numeric_limits<double>::infinity();
        out.has_infinite = true;
      } else {
        v = -(std::log(gamma(i, j)) + std::log(gamma(j, i))) / 2.0;
      }
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  return out;
}

inline DistanceMatrix group_dissimilarity(const WeightedDigraph& g,
                                          const GroupSpec& groups, double beta,
                                          PathMode mode, double tol = 1e-10,
                                          int max_iter = 10000) {
  const std::vector<Vector> sigma = detail::group_margins(groups, g.n);
  const Index p = groups.membership.cols();
  Matrix fe = Matrix::Zero(p, p);
  if (mode == PathMode::hitting) {
    // One factorization serves all ordered pairs.
    HittingFundamental f =
        hitting_fundamental(row_stochastic(g.affinity), g.cost, beta);
    for (Index a = 0; a < p; ++a)
      for (Index b = 0; b < p; ++b) {
        if (a == b) continue;
        MarginPair m{sigma[static_cast<std::size_t>(a)],
                     sigma[static_cast<std::size_t>(b)], false};
        ScalingResult sc = hitting_scaling(f.Z_h, m, tol, max_iter);
        fe(a, b) = hitting_free_energy(sc.mu_in, sc.mu_out, m, beta);
      }
  } else {
    // Killing depends on the margins, so the killed fundamental matrix has
    // to be rebuilt for every ordered pair; only the chain is shared.
    ReferenceChain chain = reference_transitions(g);
    for (Index a = 0; a < p; ++a)
      for (Index b = 0; b < p; ++b) {
        if (a == b) continue;
        MarginPair m{sigma[static_cast<std::size_t>(a)],
                     sigma[static_cast<std::size_t>(b)], false};
        KillingProfile killing = compute_killing(chain, m, 1e-8);
        FundamentalFactor factor(killed_transitions(chain, killing.alpha),
                                 g.cost, beta);
        ScalingResult sc = balance_margins(
            [&](const Vector& x) { return factor.solve(x); },
            [&](const Vector& x) { return factor.solve_transposed(x); },
            m.sigma_in, m.sigma_out, killing.alpha, killing.n_ref, tol,
            max_iter);
        fe(a, b) = regular_free_energy(sc.mu_in, sc.mu_out, m, beta);
      }
  }
  DistanceMatrix out;
  out.kind = mode == PathMode::regular ? DistanceKind::group_fe_regular
                                       : DistanceKind::group_fe_hitting;
  out.metric_claimed = false;
  out.values = (fe + fe.transpose()) / 2.0;
  out.values.diagonal().setZero();
  out.has_infinite = !out.values.allFinite();
  return out;
}

} // namespace margot
