#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "graph.hpp"

namespace margot {

// Rejection keeps the draw exactly uniform over 0..n-1 and identical across
// platforms for a given seed.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline std::vector<Index> sample_distinct(std::mt19937_64& rng, Index count,
                                          Index n) {
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<Index>(out.size()) < count) {
    const Index x =
        static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n)));
    if (!used[static_cast<std::size_t>(x)]) {
      used[static_cast<std::size_t>(x)] = 1;
      out.push_back(x);
    }
  }
  return out;
}

struct ExperimentInstance {
  WeightedDigraph graph;
  MarginPair margins;
  std::vector<Index> sources;
  std::vector<Index> targets;
};

// Unit-cost lattice, disjoint uniform source and target sets.
inline ExperimentInstance make_figure_instance(Index rows, Index cols,
                                               Index n_sources,
                                               Index n_targets,
                                               std::uint64_t seed) {
  if (n_sources < 1 || n_targets < 1)
    throw BadParameter("need at least one source and one target");
  ExperimentInstance inst;
  inst.graph = make_lattice(static_cast<int>(rows), static_cast<int>(cols), 1.0);
  if (n_sources + n_targets > inst.graph.n)
    throw BadParameter("source and target counts exceed lattice size");
  std::mt19937_64 rng(seed);
  const std::vector<Index> picks =
      sample_distinct(rng, n_sources + n_targets, inst.graph.n);
  inst.sources.assign(picks.begin(), picks.begin() + n_sources);
  inst.targets.assign(picks.begin() + n_sources, picks.end());
  Vector sigma_in = Vector::Zero(inst.graph.n);
  Vector sigma_out = Vector::Zero(inst.graph.n);
  for (Index s : inst.sources)
    sigma_in(s) = 1.0 / static_cast<double>(n_sources);
  for (Index t : inst.targets)
    sigma_out(t) = 1.0 / static_cast<double>(n_targets);
  inst.margins = validate_margins(inst.graph, sigma_in, sigma_out);
  return inst;
}

// side x side unit-cost lattice with floor(n/3) sources and targets.
inline ExperimentInstance make_bench_instance(Index side, std::uint64_t seed) {
  if (side < 2) throw BadParameter("bench lattice side must be at least 2");
  const Index k = (side * side) / 3;
  return make_figure_instance(side, side, k, k, seed);
}

// membership(t, s) = P(start = sources[s] | end = targets[t]).
inline Matrix membership_matrix(const Matrix& gamma, const Vector& sigma_out,
                                const std::vector<Index>& sources,
                                const std::vector<Index>& targets) {
  Matrix m(static_cast<Index>(targets.size()),
           static_cast<Index>(sources.size()));
  for (std::size_t t = 0; t < targets.size(); ++t)
    for (std::size_t s = 0; s < sources.size(); ++s)
      m(static_cast<Index>(t), static_cast<Index>(s)) =
          gamma(sources[s], targets[t]) / sigma_out(targets[t]);
  return m;
}

inline std::uint64_t instance_digest(const ExperimentInstance& inst,
                                     std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(inst.graph.n));
  mix(seed);
  for (Index s : inst.sources) mix(static_cast<std::uint64_t>(s));
  for (Index t : inst.targets) mix(static_cast<std::uint64_t>(t));
  return h;
}

} // namespace margot
