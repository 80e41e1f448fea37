#pragma once

// Shared fixtures and independent oracles for the tests. The oracles
// recompute results from first principles (truncated series, plain
// Sinkhorn, prefix/suffix sums) rather than through the solver formulas.

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <margot/margot.hpp>

namespace test_support {

using margot::Index;
using margot::Matrix;
using margot::Vector;

// Two nodes joined both ways, unit affinity and cost.
inline margot::WeightedDigraph g2() {
  return margot::build_graph({{1, 2, 1.0, 1.0}, {2, 1, 1.0, 1.0}});
}

// Chain 1 - 2 - 3 with both directions, unit affinity and cost.
inline margot::WeightedDigraph path3() {
  return margot::build_graph({{1, 2, 1.0, 1.0},
                              {2, 1, 1.0, 1.0},
                              {2, 3, 1.0, 1.0},
                              {3, 2, 1.0, 1.0}});
}

// Directed n-cycle with unit affinities and costs.
inline margot::WeightedDigraph directed_cycle(int n) {
  std::vector<margot::Edge> edges;
  for (int i = 1; i <= n; ++i) edges.push_back({i, i % n + 1, 1.0, 1.0});
  return margot::build_graph(edges);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Directed cycle plus up to `extra` random chords; strongly connected by
// construction. Affinities and costs in [0.5, 2.5).
inline margot::WeightedDigraph random_sc_graph(std::mt19937_64& rng, int n,
                                               int extra) {
  std::vector<margot::Edge> edges;
  std::vector<char> used(static_cast<std::size_t>(n) * n, 0);
  auto mark = [&](int i, int j) { used[std::size_t(i - 1) * n + (j - 1)] = 1; };
  auto seen = [&](int i, int j) {
    return used[std::size_t(i - 1) * n + (j - 1)] != 0;
  };
  for (int i = 1; i <= n; ++i) {
    const int j = i % n + 1;
    edges.push_back(
        {i, j, 0.5 + 2.0 * uniform01(rng), 0.5 + 2.0 * uniform01(rng)});
    mark(i, j);
  }
  for (int k = 0; k < extra; ++k) {
    const int i = 1 + static_cast<int>(margot::uniform_below(rng, n));
    const int j = 1 + static_cast<int>(margot::uniform_below(rng, n));
    if (i == j || seen(i, j)) continue;
    edges.push_back(
        {i, j, 0.5 + 2.0 * uniform01(rng), 0.5 + 2.0 * uniform01(rng)});
    mark(i, j);
  }
  return margot::build_graph(edges);
}

// Strictly positive margin vector summing to one.
inline Vector random_margin(std::mt19937_64& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = 0.05 + uniform01(rng);
  return v / v.sum();
}

inline Vector dirac(Index n, Index i) {
  Vector v = Vector::Zero(n);
  v(i) = 1.0;
  return v;
}

inline Vector uniform_vec(Index n) {
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

inline margot::MarginPair margins_of(const margot::WeightedDigraph& g,
                                     Vector sigma_in, Vector sigma_out) {
  return margot::validate_margins(g, std::move(sigma_in),
                                  std::move(sigma_out));
}

// Plain alternating rescaling of a fixed kernel T to margins (r, c);
// returns Diag(u) T Diag(v).
inline Matrix sinkhorn(const Matrix& T, const Vector& r, const Vector& c,
                       int iters = 3000) {
  Vector u = Vector::Ones(T.rows());
  Vector v = Vector::Ones(T.cols());
  for (int it = 0; it < iters; ++it) {
    u = r.cwiseQuotient(T * v);
    v = c.cwiseQuotient(T.transpose() * u);
  }
  return u.asDiagonal() * T * v.asDiagonal();
}

inline Matrix discounted_kernel(const margot::WeightedDigraph& g,
                                double beta) {
  return margot::row_stochastic(g.affinity)
      .cwiseProduct((-beta * g.cost.array()).exp().matrix());
}

// Truncated series sum_{t<=max_len} W^t.
inline Matrix regular_series(const Matrix& W, int max_len) {
  Matrix Z = Matrix::Identity(W.rows(), W.cols());
  Matrix Wt = Matrix::Identity(W.rows(), W.cols());
  for (int t = 1; t <= max_len; ++t) {
    Wt = Wt * W;
    Z += Wt;
  }
  return Z;
}

// Column j sums walks that reach j only at their final step; unit diagonal.
inline Matrix hitting_series(const Matrix& W, int max_len) {
  const Index n = W.rows();
  Matrix Zh = Matrix::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    Matrix blocked = W;
    blocked.row(j).setZero();
    blocked.col(j).setZero();
    Vector x = W.col(j);
    Vector acc = Vector::Zero(n);
    for (int t = 1; t <= max_len; ++t) {
      acc += x;
      x = blocked * x;
    }
    acc(j) = 0.0;
    Zh.col(j) += acc;
  }
  return Zh;
}

struct PairPathStats {
  double weight = 0.0;  // total weight of first-passage walks src -> dst
  Matrix edge_counts;   // expected edge transits, normalized by weight
  Vector node_counts;   // expected node visits, normalized by weight
};

// Expected counts under the first-passage ensemble src -> dst via
// prefix/suffix decomposition: a transit of (i, j) at step t carries
// (weight of t-step prefixes at i) * w_ij * (first-passage weight j -> dst).
inline PairPathStats pair_path_stats(const margot::WeightedDigraph& g,
                                     double beta, Index src, Index dst,
                                     int max_len) {
  const Index n = g.n;
  const Matrix W = discounted_kernel(g, beta);
  Matrix blocked = W;
  blocked.row(dst).setZero();
  blocked.col(dst).setZero();
  Vector h = Vector::Zero(n);
  Vector y = W.col(dst);
  for (int t = 1; t <= max_len; ++t) {
    h += y;
    y = blocked * y;
  }
  Vector h_end = h;
  h_end(dst) = 1.0;  // arrival terminates the walk
  PairPathStats st;
  st.edge_counts = Matrix::Zero(n, n);
  st.node_counts = Vector::Zero(n);
  Vector f = Vector::Zero(n);
  f(src) = 1.0;
  st.weight = h(src);
  for (int t = 0; t <= max_len; ++t) {
    st.node_counts += f.cwiseProduct(h);
    for (Index i = 0; i < n; ++i)
      if (f(i) != 0.0)
        for (Index j = 0; j < n; ++j)
          if (W(i, j) != 0.0) st.edge_counts(i, j) += f(i) * W(i, j) * h_end(j);
    f = W.transpose() * f;
    f(dst) = 0.0;
  }
  st.node_counts(dst) = st.weight;  // exactly one terminal visit per walk
  st.edge_counts /= st.weight;
  st.node_counts /= st.weight;
  return st;
}

inline std::string temp_dir(const std::string& tag) {
  const auto dir =
      std::filesystem::temp_directory_path() / ("margot_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string join_path(const std::string& dir, const std::string& leaf) {
  return (std::filesystem::path(dir) / leaf).string();
}

inline void write_file(const std::string& path, const std::string& content) {
  margot::write_text_file(path, content);
}

// Runs the CLI binary; returns the process exit code.
inline int run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd =
      std::string("\"") + MARGOT_CLI_BIN + "\" " + args + " > " + log_path +
      " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return (status >> 8) & 0xff;
}

} // namespace test_support
