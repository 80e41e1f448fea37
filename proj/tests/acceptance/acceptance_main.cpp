#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "../support.hpp"

using namespace margot;
using test_support::dirac;
using test_support::random_margin;
using test_support::random_sc_graph;
using test_support::uniform_vec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ------------------------------------------------------------------------
// Shared batch: 50 random strongly connected graphs (5..100 nodes), four
// temperatures, both solvers. Criteria 1, 2, 3 and the free-energy half of
// criterion 12 all read from the same sweep.

struct BatchStats {
  double margin_max = 0.0;
  double conservation_max = 0.0;
  double consistency_max = 0.0;
  double fe_gap_max = 0.0;
  int solves = 0;
};

double margin_gap(const Matrix& gamma, const MarginPair& m) {
  return (gamma.rowwise().sum() - m.sigma_in).cwiseAbs().maxCoeff() +
         (gamma.colwise().sum().transpose() - m.sigma_out)
             .cwiseAbs()
             .maxCoeff();
}

double coupling_form_fe(const Matrix& gamma, const Matrix& Z,
                        const Vector& ref_in, const Vector& ref_out,
                        double beta) {
  double fe = 0.0;
  for (Index i = 0; i < gamma.rows(); ++i)
    for (Index j = 0; j < gamma.cols(); ++j) {
      const double gij = gamma(i, j);
      if (gij <= 0.0) continue;
      fe += -gij * std::log(Z(i, j)) +
            gij * std::log(gij / (ref_in(i) * ref_out(j)));
    }
  return fe / beta;
}

const BatchStats& batch() {
  static const BatchStats stats = [] {
    BatchStats s;
    std::mt19937_64 rng(101);
    for (int k = 0; k < 50; ++k) {
      const int n = 5 + static_cast<int>(uniform_below(rng, 96));
      const WeightedDigraph g = random_sc_graph(rng, n, 3 * n);
      const MarginPair m = validate_margins(g, random_margin(rng, n),
                                            random_margin(rng, n));
      const ReferenceChain chain = reference_transitions(g);
      for (double beta : {0.01, 0.1, 1.0, 10.0}) {
        const RegularSolution r =
            solve_regular(g, m, beta, 1e-8, 1e-10, 300000);
        const SolutionResiduals rr =
            solution_residuals(r.gamma, r.edge_flows, r.node_visits, m);
        s.margin_max = std::max(s.margin_max, margin_gap(r.gamma, m));
        s.conservation_max = std::max(s.conservation_max, rr.conservation);
        s.consistency_max = std::max(s.consistency_max, rr.consistency);
        const Matrix Z_hat = regular_fundamental(
            killed_transitions(chain, r.killing.alpha), g.cost, beta);
        s.fe_gap_max = std::max(
            s.fe_gap_max,
            std::abs(coupling_form_fe(r.gamma, Z_hat, m.sigma_in,
                                      r.killing.alpha, beta) -
                     r.fe_min));
        ++s.solves;

        const HittingFundamental f =
            hitting_fundamental(chain.P_ref, g.cost, beta);
        const HittingSolution h = solve_hitting(f, m, 1e-10, 300000);
        const SolutionResiduals hr = solution_residuals(
            h.gamma_h, h.edge_flows_h, h.node_visits_h, m);
        s.margin_max = std::max(s.margin_max, margin_gap(h.gamma_h, m));
        s.conservation_max = std::max(s.conservation_max, hr.conservation);
        s.consistency_max = std::max(s.consistency_max, hr.consistency);
        s.fe_gap_max = std::max(
            s.fe_gap_max,
            std::abs(coupling_form_fe(h.gamma_h, f.Z_h, m.sigma_in,
                                      m.sigma_out, beta) -
                     h.fe_min_h));
        ++s.solves;
      }
    }
    return s;
  }();
  return stats;
}

// ------------------------------------------------------------------------
// Shared lattice experiment: 10x10 grid, 5 sources at 0.2, 50 targets at
// 0.02. Criteria 5, 6 and 13 read from the same solves.

struct LatticeRuns {
  ExperimentInstance inst;
  RegularSolution reg10;
  HittingSolution hit10;
  HittingSolution hit_small;
  double lp_cost = 0.0;
};

const LatticeRuns& lattice_runs() {
  static const LatticeRuns runs = [] {
    LatticeRuns r{make_figure_instance(10, 10, 5, 50, 7), {}, {}, {}, 0.0};
    r.reg10 =
        solve_regular(r.inst.graph, r.inst.margins, 10.0, 1e-8, 1e-8, 1000000);
    r.hit10 = solve_hitting(r.inst.graph, r.inst.margins, 10.0, 1e-8, 1000000);
    r.hit_small =
        solve_hitting(r.inst.graph, r.inst.margins, 1e-3, 1e-8, 1000000);
    r.lp_cost = exact_flow(r.inst.graph, r.inst.margins).total_cost;
    return r;
  }();
  return runs;
}

// --------------------------------------------------------------------- 1 --

Outcome criterion1() {
  const BatchStats& s = batch();
  return {s.margin_max <= 1e-9,
          "max margin gap " + num(s.margin_max) + " over " +
              std::to_string(s.solves) + " solves (bound 1e-9)"};
}

// --------------------------------------------------------------------- 2 --

Outcome criterion2() {
  const BatchStats& s = batch();
  return {s.conservation_max <= 1e-8,
          "max conservation residual " + num(s.conservation_max) +
              " (bound 1e-8)"};
}

// --------------------------------------------------------------------- 3 --

Outcome criterion3() {
  const BatchStats& s = batch();
  return {s.consistency_max <= 1e-8,
          "max visit consistency residual " + num(s.consistency_max) +
              " (bound 1e-8)"};
}

// --------------------------------------------------------------------- 4 --

Outcome criterion4() {
  std::mt19937_64 rng(40);
  double z_slack_min = 1e300;
  double coupling_dev_max = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 4));
    const WeightedDigraph g = random_sc_graph(rng, n, 2 * n);
    const double beta = 0.5 + 1.5 * test_support::uniform01(rng);
    const MarginPair m =
        validate_margins(g, random_margin(rng, n), random_margin(rng, n));
    const Matrix P_ref = row_stochastic(g.affinity);

    const BruteForceFundamental reg =
        brute_force_fundamental(g, beta, PathMode::regular, 25);
    const Matrix dense = FundamentalFactor(P_ref, g.cost, beta).materialize();
    const double reg_dev = (dense - reg.Z).cwiseAbs().maxCoeff();
    z_slack_min = std::min(z_slack_min, reg.tail_bound + 1e-9 - reg_dev);
    if (reg_dev > reg.tail_bound + 1e-9)
      return {false, "regular series deviates by " + num(reg_dev) +
                         " > tail bound " + num(reg.tail_bound)};

    const BruteForceFundamental hit =
        brute_force_fundamental(g, beta, PathMode::hitting, 25);
    const HittingFundamental f = hitting_fundamental(P_ref, g.cost, beta);
    const double hit_dev = (f.Z_h - hit.Z).cwiseAbs().maxCoeff();
    z_slack_min = std::min(z_slack_min, hit.tail_bound + 1e-9 - hit_dev);
    if (hit_dev > hit.tail_bound + 1e-9)
      return {false, "first-passage series deviates by " + num(hit_dev) +
                         " > tail bound " + num(hit.tail_bound)};

    // Couplings: rebalance long truncated series with a plain alternating
    // scaler and compare against the solver output.
    const ReferenceChain chain = reference_transitions(g);
    const KillingProfile kp = compute_killing(chain, m);
    const Matrix W_kill =
        killed_transitions(chain, kp.alpha)
            .cwiseProduct((-beta * g.cost.array()).exp().matrix());
    const Matrix Z_enum = test_support::regular_series(W_kill, 120);
    const Matrix reg_enum = test_support::sinkhorn(
        m.sigma_in.asDiagonal() * Z_enum * kp.alpha.asDiagonal(), m.sigma_in,
        m.sigma_out, 20000);
    const RegularSolution rs = solve_regular(g, m, beta, 1e-8, 1e-10, 200000);
    coupling_dev_max = std::max(
        coupling_dev_max, (reg_enum - rs.gamma).cwiseAbs().maxCoeff());

    const Matrix W = P_ref.cwiseProduct((-beta * g.cost.array()).exp().matrix());
    const Matrix Zh_enum = test_support::hitting_series(W, 120);
    const Matrix hit_enum = test_support::sinkhorn(
        m.sigma_in.asDiagonal() * Zh_enum * m.sigma_out.asDiagonal(),
        m.sigma_in, m.sigma_out, 20000);
    const HittingSolution hs = solve_hitting(g, m, beta, 1e-10, 200000);
    coupling_dev_max = std::max(
        coupling_dev_max, (hit_enum - hs.gamma_h).cwiseAbs().maxCoeff());
  }
  return {coupling_dev_max <= 1e-6,
          "series within tail bounds (worst slack " + num(z_slack_min) +
              "), max coupling deviation " + num(coupling_dev_max) +
              " (bound 1e-6)"};
}

// --------------------------------------------------------------------- 5 --

Outcome criterion5() {
  const LatticeRuns& r = lattice_runs();
  const double lp = r.lp_cost;
  const double fe_gap_reg = std::abs(r.reg10.fe_min - lp) / lp;
  const double fe_gap_hit = std::abs(r.hit10.fe_min_h - lp) / lp;
  const double flow_reg =
      r.reg10.edge_flows.cwiseProduct(r.inst.graph.cost).sum();
  const double flow_hit =
      r.hit10.edge_flows_h.cwiseProduct(r.inst.graph.cost).sum();
  const double flow_gap_reg = std::abs(flow_reg - lp) / lp;
  const double flow_gap_hit = std::abs(flow_hit - lp) / lp;
  const bool pass = fe_gap_reg <= 0.01 && fe_gap_hit <= 0.01 &&
                    flow_gap_reg <= 0.02 && flow_gap_hit <= 0.02;
  return {pass, "lp " + num(lp) + ", fe gap " + num(fe_gap_reg) +
                    " (regular) " + num(fe_gap_hit) +
                    " (hitting) vs bound 0.01; flow-cost gap " +
                    num(flow_gap_reg) + " / " + num(flow_gap_hit) +
                    " vs bound 0.02"};
}

// --------------------------------------------------------------------- 6 --

Outcome criterion6() {
  const LatticeRuns& r = lattice_runs();
  const double dev = (r.reg10.gamma - r.hit10.gamma_h).cwiseAbs().maxCoeff();
  return {dev <= 1e-3,
          "max coupling difference between path families " + num(dev) +
              " (bound 1e-3)"};
}

// ------------------------------------------------------------------- 7/8 --

struct SmallBetaRuns {
  double gamma_dev_max = 0.0;
  double reg_policy_dev_max = 0.0;
  double hit_policy_dev_max = 0.0;
};

const SmallBetaRuns& small_beta_runs() {
  static const SmallBetaRuns runs = [] {
    SmallBetaRuns s;
    std::mt19937_64 rng(70);
    for (int k = 0; k < 10; ++k) {
      const int n = 5 + static_cast<int>(uniform_below(rng, 26));
      const WeightedDigraph g = random_sc_graph(rng, n, 3 * n);
      const Vector u = uniform_vec(n);
      const MarginPair m = validate_margins(g, u, u);
      const Matrix P_ref = reference_transitions(g).P_ref;

      const HittingSolution h = solve_hitting(g, m, 1e-6, 1e-9, 1000000);
      s.gamma_dev_max = std::max(
          s.gamma_dev_max,
          (h.gamma_h - u * u.transpose()).cwiseAbs().maxCoeff());
      s.hit_policy_dev_max = std::max(
          s.hit_policy_dev_max, (h.policy_h - P_ref).cwiseAbs().maxCoeff());

      const RegularSolution r = solve_regular(g, m, 1e-6, 1e-8, 1e-9, 1000000);
      s.reg_policy_dev_max = std::max(
          s.reg_policy_dev_max, (r.policy - P_ref).cwiseAbs().maxCoeff());
    }
    return s;
  }();
  return runs;
}

Outcome criterion7() {
  const SmallBetaRuns& s = small_beta_runs();
  return {s.gamma_dev_max <= 1e-4,
          "max deviation from the product coupling " + num(s.gamma_dev_max) +
              " (bound 1e-4)"};
}

Outcome criterion8() {
  const SmallBetaRuns& s = small_beta_runs();
  const bool pass =
      s.reg_policy_dev_max <= 1e-4 && s.hit_policy_dev_max <= 1e-3;
  return {pass, "policy deviation from the reference chain " +
                    num(s.reg_policy_dev_max) + " (regular, bound 1e-4), " +
                    num(s.hit_policy_dev_max) + " (hitting, bound 1e-3)"};
}

// --------------------------------------------------------------------- 9 --

Outcome criterion9() {
  std::mt19937_64 rng(90);
  const double beta = 1.3;
  double dev_max = 0.0;
  for (int gi = 0; gi < 10; ++gi) {
    const int n = 8 + static_cast<int>(uniform_below(rng, 25));
    const WeightedDigraph g = random_sc_graph(rng, n, 4 * n);
    const HittingFundamental f =
        hitting_fundamental(row_stochastic(g.affinity), g.cost, beta);
    for (int k = 0; k < 10; ++k) {
      const Index i = static_cast<Index>(uniform_below(rng, n));
      const Index j = static_cast<Index>(uniform_below(rng, n));
      const MarginPair m{dirac(n, i), dirac(n, j), false};
      const HittingSolution s = solve_hitting(f, m, 1e-10, 100000);
      dev_max = std::max(
          dev_max, std::abs(s.fe_min_h - (-std::log(f.Z_h(i, j)) / beta)));
    }
  }
  return {dev_max <= 1e-10,
          "max |fe_min - point surprisal| " + num(dev_max) +
              " over 100 pairs (bound 1e-10)"};
}

// -------------------------------------------------------------------- 10 --

Outcome criterion10() {
  std::mt19937_64 rng(100);
  double tri_worst = -1e300;
  for (int k = 0; k < 100; ++k) {
    const int n = 3 + static_cast<int>(uniform_below(rng, 18));
    const WeightedDigraph g = random_sc_graph(rng, n, 3 * n);
    const Vector w = random_margin(rng, n);
    const double beta = 0.2 + 2.8 * test_support::uniform01(rng);
    const PathMode mode = (k % 2 == 0) ? PathMode::regular : PathMode::hitting;
    const DistanceMatrix d = surprisal_distance(g, w, beta, mode, 1e-9,
                                                200000);
    if (d.has_infinite)
      return {false, "infinite surprisal entry on a connected instance"};
    for (Index i = 0; i < n; ++i) {
      if (d.values(i, i) != 0.0)
        return {false, "nonzero diagonal entry " + num(d.values(i, i))};
      for (Index j = 0; j < n; ++j) {
        if (d.values(i, j) != d.values(j, i))
          return {false, "asymmetric entry at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")"};
        for (Index l = 0; l < n; ++l)
          tri_worst = std::max(tri_worst, d.values(i, j) - d.values(i, l) -
                                              d.values(l, j));
      }
    }
  }
  return {tri_worst <= 1e-12,
          "worst triangle violation " + num(tri_worst) +
              " over 100 graphs (slack 1e-12)"};
}

// -------------------------------------------------------------------- 11 --

Outcome criterion11() {
  double dev_max = 0.0;
  for (int n = 2; n <= 12; ++n) {
    const WeightedDigraph g = test_support::directed_cycle(n);
    const DistanceMatrix phi = free_energy_distance_matrix(g, 50.0);
    const Matrix d = shortest_path_costs(g);
    dev_max = std::max(dev_max, (phi.values - d).cwiseAbs().maxCoeff());
  }
  return {dev_max <= 1e-3,
          "max |pairwise free energy - shortest path| " + num(dev_max) +
              " on unit-cost cycles (bound 1e-3)"};
}

// -------------------------------------------------------------------- 12 --

Outcome criterion12() {
  const BatchStats& s = batch();
  double gap_max = 0.0;

  const auto duality_gap = [&](const WeightedDigraph& g, const MarginPair& m) {
    const ExactCouplingSolution c = exact_coupling(m, shortest_path_costs(g));
    return std::abs(c.cost -
                    (c.dual_in.dot(m.sigma_in) + c.dual_out.dot(m.sigma_out)));
  };

  const WeightedDigraph g2 = test_support::g2();
  gap_max = std::max(
      gap_max, duality_gap(g2, validate_margins(g2, dirac(2, 0), dirac(2, 1))));

  const WeightedDigraph p3 = test_support::path3();
  Vector pin(3), pout(3);
  pin << 0.5, 0.5, 0.0;
  pout << 0.0, 0.25, 0.75;
  gap_max = std::max(gap_max, duality_gap(p3, validate_margins(p3, pin, pout)));

  const WeightedDigraph lat = make_lattice(4, 4, 1.0);
  Vector lin = Vector::Zero(16), lout = Vector::Zero(16);
  lin(0) = 0.5;
  lin(5) = 0.5;
  lout(15) = 0.75;
  lout(3) = 0.25;
  gap_max = std::max(gap_max, duality_gap(lat, validate_margins(lat, lin, lout)));

  const ExperimentInstance& inst = lattice_runs().inst;
  gap_max = std::max(gap_max, duality_gap(inst.graph, inst.margins));

  const bool pass = s.fe_gap_max <= 1e-8 && gap_max <= 1e-9;
  return {pass, "max |fe_min - coupling form| " + num(s.fe_gap_max) +
                    " (bound 1e-8); max transport duality gap " +
                    num(gap_max) + " (bound 1e-9)"};
}

// -------------------------------------------------------------------- 13 --

Outcome criterion13() {
  const LatticeRuns& r = lattice_runs();
  const Matrix m_small = membership_matrix(
      r.hit_small.gamma_h, r.inst.margins.sigma_out, r.inst.sources,
      r.inst.targets);
  const double uniform_dev =
      (m_small.array() - 1.0 / static_cast<double>(r.inst.sources.size()))
          .abs()
          .maxCoeff();

  const Matrix m_large = membership_matrix(
      r.hit10.gamma_h, r.inst.margins.sigma_out, r.inst.sources,
      r.inst.targets);
  int decided = 0;
  for (Index t = 0; t < m_large.rows(); ++t)
    if (m_large.row(t).maxCoeff() >= 0.99) ++decided;
  const double frac =
      static_cast<double>(decided) / static_cast<double>(m_large.rows());

  const bool pass = uniform_dev <= 1e-3 && frac >= 0.9;
  return {pass, "membership deviation from uniform " + num(uniform_dev) +
                    " at beta 1e-3 (bound 1e-3); " + num(100.0 * frac) +
                    "% of targets decided at beta 10 (needs >= 90% at 0.99)"};
}

// -------------------------------------------------------------------- 14 --

Outcome criterion14() {
  std::string table;
  bool faster = true, hitting_close = true;
  for (int side : {30, 40, 50}) {
    const ExperimentInstance inst = make_bench_instance(side, 1);

    auto t0 = std::chrono::steady_clock::now();
    const ExactFlowSolution lp = exact_flow(inst.graph, inst.margins);
    const double lp_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const RegularSolution reg =
        solve_regular(inst.graph, inst.margins, 1.0, 1e-8, 1e-10, 100000);
    const double reg_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const HittingSolution hit =
        solve_hitting(inst.graph, inst.margins, 1.0, 1e-10, 100000);
    const double hit_s = seconds_since(t0);

    (void)lp;
    (void)reg;
    (void)hit;
    faster = faster && reg_s < lp_s && hit_s < lp_s;
    hitting_close = hitting_close && hit_s <= 1.1 * reg_s;
    table += " n=" + std::to_string(side * side) + " exact=" + num(lp_s) +
             "s regular=" + num(reg_s) + "s hitting=" + num(hit_s) + "s;";
  }
  const bool pass = faster && hitting_close;
  std::string verdict =
      faster ? "both solvers beat the exact-flow oracle"
             : "exact-flow oracle is faster than the dense solvers";
  verdict += hitting_close ? "; hitting within 10% of regular"
                           : "; hitting more than 10% slower than regular";
  return {pass, verdict + " --" + table};
}

using CriterionFn = Outcome (*)();

constexpr CriterionFn kCriteria[] = {
    criterion1, criterion2,  criterion3,  criterion4,  criterion5,
    criterion6, criterion7,  criterion8,  criterion9,  criterion10,
    criterion11, criterion12, criterion13, criterion14};

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::fprintf(stderr,
                   "usage: %s [--criterion N]   (N in 1..14; default all)\n",
                   argv[0]);
      return 2;
    }
  }
  const int count = static_cast<int>(std::size(kCriteria));
  if (only < 0 || only > count) {
    std::fprintf(stderr, "criterion %d outside 1..%d\n", only, count);
    return 2;
  }
  bool all_pass = true;
  for (int c = 1; c <= count; ++c) {
    if (only != 0 && c != only) continue;
    Outcome out;
    try {
      out = kCriteria[c - 1]();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s - %s\n", c, out.pass ? "PASS" : "FAIL",
                out.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
