#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace margot {

struct ExactFlowSolution {
  Matrix flows;
  double total_cost = 0.0;
  Vector dual_prices;
  double margin_residual = 0.0;
};

struct ExactCouplingSolution {
  Matrix coupling;
  double cost = 0.0;
  Vector dual_in;
  Vector dual_out;
};

struct BruteForceFundamental {
  Matrix Z;
  double tail_bound = 0.0;
};

namespace detail {

inline std::vector<std::vector<std::pair<Index, double>>> cost_adjacency(
    const WeightedDigraph& g) {
  std::vector<std::vector<std::pair<Index, double>>> adj(
      static_cast<std::size_t>(g.n));
  for (const Edge& e : g.edges)
    adj[static_cast<std::size_t>(e.src - 1)].emplace_back(e.dst - 1, e.cost);
  return adj;
}

// Rounds sigma (nonnegative, sum 1) to integer shares summing exactly to
// denom; per-entry error below 1/denom.
inline std::vector<std::int64_t> integer_shares(const Vector& sigma,
                                                std::int64_t denom) {
  const Index n = sigma.size();
  std::vector<std::int64_t> share(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> rem(static_cast<std::size_t>(n));
  std::int64_t total = 0;
  for (Index i = 0; i < n; ++i) {
    const double raw = sigma(i) * static_cast<double>(denom);
    const double base = std::floor(raw);
    share[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(base);
    rem[static_cast<std::size_t>(i)] = {raw - base, i};
    total += static_cast<std::int64_t>(base);
  }
  std::int64_t deficit = denom - total;
  if (deficit > 0) {
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t k = 0; deficit > 0; k = (k + 1) % rem.size(), --deficit)
      ++share[static_cast<std::size_t>(rem[k].second)];
  } else if (deficit < 0) {
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
    for (std::size_t k = 0; deficit < 0; k = (k + 1) % rem.size()) {
      std::int64_t& s = share[static_cast<std::size_t>(rem[k].second)];
      if (s > 0) {
        --s;
        ++deficit;
      }
    }
  }
  return share;
}

// Successive shortest augmenting paths with node potentials; capacities are
// exact integers, costs are floats. Arcs come in forward/reverse pairs, so
// arc_id ^ 1 is the partner.
class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : n_(n), adj_(static_cast<std::size_t>(n)) {}

  int add_arc(int u, int v, std::int64_t cap, double cost) {
    const int id = static_cast<int>(arcs_.size());
    adj_[static_cast<std::size_t>(u)].push_back(id);
    arcs_.push_back({v, cap, cost});
    adj_[static_cast<std::size_t>(v)].push_back(id + 1);
    arcs_.push_back({u, 0, -cost});
    return id;
  }

  void run(int s, int t, std::int64_t required) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    potential_.assign(static_cast<std::size_t>(n_), 0.0);
    std::vector<double> dist(static_cast<std::size_t>(n_));
    std::vector<int> prev(static_cast<std::size_t>(n_));
    std::int64_t pushed = 0;
    while (pushed < required) {
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(prev.begin(), prev.end(), -1);
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
      dist[static_cast<std::size_t>(s)] = 0.0;
      heap.push({0.0, s});
      while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        for (int id : adj_[static_cast<std::size_t>(u)]) {
          const Arc& a = arcs_[static_cast<std::size_t>(id)];
          if (a.cap <= 0) continue;
          double rc = a.cost + potential_[static_cast<std::size_t>(u)] -
                      potential_[static_cast<std::size_t>(a.to)];
          if (rc < 0.0) rc = 0.0;
          const double nd = d + rc;
          if (nd < dist[static_cast<std::size_t>(a.to)]) {
            dist[static_cast<std::size_t>(a.to)] = nd;
            prev[static_cast<std::size_t>(a.to)] = id;
            heap.push({nd, a.to});
          }
        }
      }
      const double dt = dist[static_cast<std::size_t>(t)];
      if (dt == inf) throw Infeasible("demand unreachable in flow network");
      for (int v = 0; v < n_; ++v)
        potential_[static_cast<std::size_t>(v)] +=
            std::min(dist[static_cast<std::size_t>(v)], dt);
      std::int64_t slack = required - pushed;
      for (int v = t; v != s;) {
        const int id = prev[static_cast<std::size_t>(v)];
        slack = std::min(slack, arcs_[static_cast<std::size_t>(id)].cap);
        v = arcs_[static_cast<std::size_t>(id ^ 1)].to;
      }
      for (int v = t; v != s;) {
        const int id = prev[static_cast<std::size_t>(v)];
        arcs_[static_cast<std::size_t>(id)].cap -= slack;
        arcs_[static_cast<std::size_t>(id ^ 1)].cap += slack;
        v = arcs_[static_cast<std::size_t>(id ^ 1)].to;
      }
      pushed += slack;
    }
    // No residual arc may offer a negative reduced cost at optimality.
    for (int u = 0; u < n_; ++u)
      for (int id : adj_[static_cast<std::size_t>(u)]) {
        const Arc& a = arcs_[static_cast<std::size_t>(id)];
        if (a.cap > 0 && a.cost + potential_[static_cast<std::size_t>(u)] -
                                 potential_[static_cast<std::size_t>(a.to)] <
                             -1e-9)
          throw NumericError("optimality certificate failed: residual arc " +
                             std::to_string(u) + "->" + std::to_string(a.to) +
                             " has negative reduced cost");
      }
  }

  std::int64_t flow_on(int arc_id) const {
    return arcs_[static_cast<std::size_t>(arc_id ^ 1)].cap;
  }
  double potential(int v) const {
    return potential_[static_cast<std::size_t>(v)];
  }

 private:
  struct Arc {
    int to;
    std::int64_t cap;
    double cost;
  };
  int n_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> potential_;
};

constexpr std::int64_t margin_denominator = 1000000000,
                       unbounded_cap =
                           std::numeric_limits<std::int64_t>::max() / 4;

} // namespace detail

inline Matrix shortest_path_costs(const WeightedDigraph& g) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto adj = detail::cost_adjacency(g);
  Matrix d = Matrix::Constant(g.n, g.n, inf);
  std::vector<double> dist(static_cast<std::size_t>(g.n));
  for (Index s = 0; s < g.n; ++s) {
    std::fill(dist.begin(), dist.end(), inf);
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[static_cast<std::size_t>(s)] = 0.0;
    heap.push({0.0, s});
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[static_cast<std::size_t>(u)]) continue;
      for (const auto& [v, c] : adj[static_cast<std::size_t>(u)]) {
        const double nd = du + c;
        if (nd < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = nd;
          heap.push({nd, v});
        }
      }
    }
    for (Index v = 0; v < g.n; ++v)
      d(s, v) = dist[static_cast<std::size_t>(v)];
  }
  return d;
}

inline ExactFlowSolution exact_flow(const WeightedDigraph& g,
                                    const MarginPair& margins) {
  const Index n = g.n;
  const std::int64_t denom = detail::margin_denominator;
  const auto in_shares = detail::integer_shares(margins.sigma_in, denom);
  const auto out_shares = detail::integer_shares(margins.sigma_out, denom);
  const int src = static_cast<int>(n), snk = static_cast<int>(n) + 1;
  detail::MinCostFlow mcf(static_cast<int>(n) + 2);
  std::vector<int> edge_arcs;
  edge_arcs.reserve(g.edges.size());
  for (const Edge& e : g.edges)
    edge_arcs.push_back(mcf.add_arc(static_cast<int>(e.src - 1),
                                    static_cast<int>(e.dst - 1),
                                    detail::unbounded_cap, e.cost));
  std::int64_t required = 0;
  for (Index i = 0; i < n; ++i) {
    const std::int64_t net = in_shares[static_cast<std::size_t>(i)] -
                             out_shares[static_cast<std::size_t>(i)];
    if (net > 0) {
      mcf.add_arc(src, static_cast<int>(i), net, 0.0);
      required += net;
    } else if (net < 0) {
      mcf.add_arc(static_cast<int>(i), snk, -net, 0.0);
    }
  }
  mcf.run(src, snk, required);
  ExactFlowSolution sol;
  sol.flows = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const double x = static_cast<double>(mcf.flow_on(edge_arcs[k])) /
                     static_cast<double>(denom);
    sol.flows(e.src - 1, e.dst - 1) = x;
    sol.total_cost += x * e.cost;
  }
  sol.dual_prices.resize(n);
  for (Index i = 0; i < n; ++i)
    sol.dual_prices(i) = mcf.potential(static_cast<int>(i));
  const Vector net_out = sol.flows.rowwise().sum() -
                         sol.flows.transpose().rowwise().sum();
  sol.margin_residual =
      (net_out - (margins.sigma_in - margins.sigma_out)).lpNorm<Eigen::Infinity>();
  return sol;
}

inline ExactCouplingSolution exact_coupling(const MarginPair& margins,
                                            const Matrix& d) {
  const Index n = margins.sigma_in.size();
  if (d.rows() != n || d.cols() != n)
    throw BadParameter("cost matrix shape does not match margins");
  if (!d.allFinite()) throw BadParameter("cost matrix must be finite");
  const std::int64_t denom = detail::margin_denominator;
  const auto a = detail::integer_shares(margins.sigma_in, denom);
  const auto b = detail::integer_shares(margins.sigma_out, denom);
  std::vector<Index> sources, targets;
  for (Index i = 0; i < n; ++i) {
    if (a[static_cast<std::size_t>(i)] > 0) sources.push_back(i);
    if (b[static_cast<std::size_t>(i)] > 0) targets.push_back(i);
  }
  const int ns = static_cast<int>(sources.size()),
            nt = static_cast<int>(targets.size());
  const int src = 0, snk = 1 + ns + nt;
  detail::MinCostFlow mcf(ns + nt + 2);
  for (int i = 0; i < ns; ++i)
    mcf.add_arc(src, 1 + i, a[static_cast<std::size_t>(sources[i])], 0.0);
  std::vector<std::vector<int>> pair_arcs(static_cast<std::size_t>(ns),
                                          std::vector<int>(nt));
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j)
      pair_arcs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          mcf.add_arc(1 + i, 1 + ns + j, detail::unbounded_cap,
                      d(sources[static_cast<std::size_t>(i)],
                        targets[static_cast<std::size_t>(j)]));
  for (int j = 0; j < nt; ++j)
    mcf.add_arc(1 + ns + j, snk, b[static_cast<std::size_t>(targets[j])], 0.0);
  mcf.run(src, snk, denom);
  ExactCouplingSolution sol;
  sol.coupling = Matrix::Zero(n, n);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) {
      const double x =
          static_cast<double>(mcf.flow_on(
              pair_arcs[static_cast<std::size_t>(i)]
                       [static_cast<std::size_t>(j)])) /
          static_cast<double>(denom);
      if (x != 0.0) {
        sol.coupling(sources[static_cast<std::size_t>(i)],
                     targets[static_cast<std::size_t>(j)]) = x;
        sol.cost += x * d(sources[static_cast<std::size_t>(i)],
                          targets[static_cast<std::size_t>(j)]);
      }
    }
  constexpr double inf = std::numeric_limits<double>::infinity();
  sol.dual_in = Vector::Constant(n, inf);
  sol.dual_out = Vector::Constant(n, -inf);
  for (int i = 0; i < ns; ++i)
    sol.dual_in(sources[static_cast<std::size_t>(i)]) =
        -mcf.potential(1 + i);
  for (int j = 0; j < nt; ++j)
    sol.dual_out(targets[static_cast<std::size_t>(j)]) =
        mcf.potential(1 + ns + j);
  // Fill duals outside the margin supports with the tightest feasible
  // prices so that dual_in(i) + dual_out(j) <= d(i, j) holds on all pairs.
  for (Index j = 0; j < n; ++j)
    if (sol.dual_out(j) == -inf) {
      double best = inf;
      for (Index i : sources) best = std::min(best, d(i, j) - sol.dual_in(i));
      sol.dual_out(j) = (best == inf) ? 0.0 : best;
    }
  for (Index i = 0; i < n; ++i)
    if (sol.dual_in(i) == inf) {
      double best = inf;
      for (Index j = 0; j < n; ++j)
        best = std::min(best, d(i, j) - sol.dual_out(j));
      sol.dual_in(i) = best;
    }
  return sol;
}

inline BruteForceFundamental brute_force_fundamental(const WeightedDigraph& g,
                                                     double beta,
                                                     PathMode mode,
                                                     int max_len) {
  if (beta <= 0.0 || !std::isfinite(beta))
    throw BadParameter("beta must be positive and finite");
  if (max_len < 0) throw BadParameter("max_len must be nonnegative");
  if (g.n > 6)
    throw TooLarge("path enumeration limited to 6 nodes, got " +
                   std::to_string(g.n));
  if (max_len > 25)
    throw TooLarge("path enumeration limited to length 25, got " +
                   std::to_string(max_len));
  const Index n = g.n;
  const Matrix W = row_stochastic(g.affinity)
                       .cwiseProduct((-beta * g.cost.array()).exp().matrix());
  const double s = W.rowwise().sum().maxCoeff();
  BruteForceFundamental out;
  out.tail_bound = (s < 1.0)
                       ? std::pow(s, max_len + 1) / (1.0 - s)
                       : std::numeric_limits<double>::infinity();
  out.Z = Matrix::Identity(n, n);
  if (mode == PathMode::regular) {
    Matrix Wt = Matrix::Identity(n, n);
    for (int t = 1; t <= max_len; ++t) {
      Wt = Wt * W;
      out.Z += Wt;
    }
  } else {
    for (Index j = 0; j < n; ++j) {
      Matrix blocked = W;
      blocked.col(j).setZero();
      blocked.row(j).setZero();
      Vector x = W.col(j);
      Vector total = Vector::Zero(n);
      for (int t = 1; t <= max_len; ++t) {
        total += x;
        x = blocked * x;
      }
      total(j) = 0.0;
      out.Z.col(j) += total;
    }
  }
  return out;
}

} // namespace margot
