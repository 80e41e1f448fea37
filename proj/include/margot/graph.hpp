#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "types.hpp"

namespace margot {

// Node ids in edge lists and files are 1-based; dense views are 0-based.
struct Edge {
  int src = 0;
  int dst = 0;
  double affinity = 0.0;
  double cost = 0.0;
};

struct WeightedDigraph {
  Index n = 0;
  std::vector<Edge> edges;
  Matrix affinity; // n x n, zero off-edge
  Matrix cost;     // n x n, zero off-edge
};

enum class MarginPolicy { renormalize, reject };

struct MarginPair {
  Vector sigma_in;
  Vector sigma_out;
  bool renormalized = false;
};

struct ReferenceChain {
  Matrix P_ref;   // row-stochastic
  Vector pi_ref;  // stationary, sums to 1
  // Rank-revealing factorization of (I - P_ref^T); the killing step reuses it
  // instead of refactorizing the same matrix.
  std::shared_ptr<const Eigen::CompleteOrthogonalDecomposition<Matrix>> factor;
};

namespace detail {

inline void check_reachability(const std::vector<std::vector<int>>& adj,
                               Index n) {
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  Index count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<size_t>(u)]) {
      if (!seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  if (count != n)
    throw NotStronglyConnected("graph is not strongly connected");
}

} // namespace detail

inline WeightedDigraph build_graph(const std::vector<Edge>& edge_list,
                                   bool costs_from_inverse_affinity = false) {
  if (edge_list.empty())
    throw BadParameter("edge list must contain at least one edge");
  Index n = 0;
  for (const Edge& e : edge_list) {
    if (e.src < 1 || e.dst < 1)
      throw BadParameter("node ids must be >= 1");
    n = std::max(n, static_cast<Index>(std::max(e.src, e.dst)));
  }
  WeightedDigraph g;
  g.n = n;
  g.affinity = Matrix::Zero(n, n);
  g.cost = Matrix::Zero(n, n);
  g.edges.reserve(edge_list.size());
  for (Edge e : edge_list) {
    if (!std::isfinite(e.affinity) || e.affinity <= 0.0)
      throw NonPositiveAffinity("affinity must be positive and finite on edge " +
                                std::to_string(e.src) + "->" +
                                std::to_string(e.dst));
    if (costs_from_inverse_affinity)
      e.cost = 1.0 / e.affinity;
    if (!std::isfinite(e.cost) || e.cost < 0.0)
      throw NegativeCost("cost must be nonnegative and finite on edge " +
                         std::to_string(e.src) + "->" + std::to_string(e.dst));
    const Index i = e.src - 1;
    const Index j = e.dst - 1;
    if (g.affinity(i, j) != 0.0)
      throw DuplicateEdge("duplicate edge " + std::to_string(e.src) + "->" +
                          std::to_string(e.dst));
    g.affinity(i, j) = e.affinity;
    g.cost(i, j) = e.cost;
    g.edges.push_back(e);
  }
  std::vector<std::vector<int>> fwd(static_cast<size_t>(n));
  std::vector<std::vector<int>> bwd(static_cast<size_t>(n));
  for (const Edge& e : g.edges) {
    fwd[static_cast<size_t>(e.src - 1)].push_back(e.dst - 1);
    bwd[static_cast<size_t>(e.dst - 1)].push_back(e.src - 1);
  }
  detail::check_reachability(fwd, n);
  detail::check_reachability(bwd, n);
  return g;
}

inline WeightedDigraph make_lattice(int rows, int cols, double cost) {
  if (rows < 2 || cols < 2)
    throw BadParameter("lattice requires rows >= 2 and cols >= 2");
  if (!std::isfinite(cost) || cost < 0.0)
    throw NegativeCost("lattice cost must be nonnegative and finite");
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(4 * rows * cols));
  auto id = [cols](int r, int c) { return r * cols + c + 1; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        edges.push_back({id(r, c), id(r, c + 1), 1.0, cost});
        edges.push_back({id(r, c + 1), id(r, c), 1.0, cost});
      }
      if (r + 1 < rows) {
        edges.push_back({id(r, c), id(r + 1, c), 1.0, cost});
        edges.push_back({id(r + 1, c), id(r, c), 1.0, cost});
      }
    }
  }
  return build_graph(edges);
}

// Row-normalized adjacency; every row sum is positive on strongly connected
// graphs.
inline Matrix row_stochastic(const Matrix& affinity) {
  Vector deg = affinity.rowwise().sum();
  return (affinity.array().colwise() / deg.array()).matrix();
}

inline ReferenceChain reference_transitions(const WeightedDigraph& g) {
  const Index n = g.n;
  Matrix P = row_stochastic(g.affinity);
  if (n == 1) {
    return ReferenceChain{std::move(P), Vector::Ones(1), nullptr};
  }
  Matrix Q = Matrix::Identity(n, n) - P.transpose();
  auto factor =
      std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(Q);
  Vector pi;
  bool ok = false;
  {
    Vector tdiag = factor->matrixT().diagonal().cwiseAbs();
    const double dmax = tdiag.head(n - 1).maxCoeff();
    const double dmin = tdiag.head(n - 1).minCoeff();
    const bool well_conditioned =
        factor->rank() >= n - 1 && dmin > 0.0 && dmax / dmin <= 1e12;
    if (well_conditioned) {
      Vector e = Vector::Ones(n);
      // (I - Q^+ Q) e is the component of e in the null space of Q.
      Vector proj = e - factor->solve(Q * e);
      const double total = proj.sum();
      if (total != 0.0) {
        pi = proj / total;
        ok = pi.minCoeff() > 0.0 &&
             (P.transpose() * pi - pi).lpNorm<Eigen::Infinity>() <= 1e-10;
      }
    }
  }
  if (!ok) {
    // Averaged power iteration converges for periodic irreducible chains.
    Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < 500000; ++it) {
      x = 0.5 * (x + P.transpose() * x);
      x /= x.sum();
      if (it % 64 == 0 &&
          (P.transpose() * x - x).lpNorm<Eigen::Infinity>() <= 1e-12)
        break;
    }
    if (x.minCoeff() > 0.0 &&
        (P.transpose() * x - x).lpNorm<Eigen::Infinity>() <= 1e-10) {
      pi = x;
      ok = true;
    }
  }
  if (!ok)
    throw NonRegularChain("no unique stationary distribution found");
  return ReferenceChain{std::move(P), std::move(pi), std::move(factor)};
}

inline MarginPair
validate_margins(const WeightedDigraph& g, Vector sigma_in, Vector sigma_out,
                 MarginPolicy policy = MarginPolicy::renormalize) {
  auto check = [&](Vector& v, const char* which) -> bool {
    if (v.size() != g.n)
      throw BadParameter(std::string(which) + " must have one entry per node");
    for (Index i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i]))
        throw BadParameter(std::string(which) + " has a non-finite entry");
      if (v[i] < 0.0)
        throw NegativeEntry(std::string(which) + " has a negative entry at node " +
                            std::to_string(i + 1));
    }
    const double total = v.sum();
    if (std::abs(total - 1.0) > 1e-9)
      throw SumNotOne(std::string(which) + " sums to " + std::to_string(total));
    if (total == 1.0)
      return false;
    if (policy == MarginPolicy::reject)
      throw SumNotOne(std::string(which) + " sums to " + std::to_string(total) +
                      " and renormalization is disabled");
    v /= total;
    return true;
  };
  MarginPair m;
  m.sigma_in = std::move(sigma_in);
  m.sigma_out = std::move(sigma_out);
  const bool r_in = check(m.sigma_in, "sigma_in");
  const bool r_out = check(m.sigma_out, "sigma_out");
  m.renormalized = r_in || r_out;
  return m;
}

} // namespace margot
