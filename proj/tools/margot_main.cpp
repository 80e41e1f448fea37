#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include <margot/margot.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw margot::InputError("cannot create output directory: " + dir);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

margot::PathMode parse_mode(const std::string& mode) {
  return mode == "hitting" ? margot::PathMode::hitting
                           : margot::PathMode::regular;
}

json timings_json(const margot::SolveTimings& t) {
  return json{{"factorization_s", t.factorization_s},
              {"scaling_s", t.scaling_s},
              {"derived_s", t.derived_s}};
}

json residuals_json(double scaling, const margot::SolutionResiduals& r) {
  return json{{"scaling", scaling},
              {"margin", r.margin},
              {"conservation", r.conservation},
              {"consistency", r.consistency}};
}

std::string beta_tag(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return buf;
}

struct GraphArgs {
  std::string graph_path;
  bool inverse_cost = false;
};

struct MarginArgs {
  std::string margins_path;
  bool reject_margins = false;
};

margot::WeightedDigraph load_graph(const GraphArgs& a) {
  return margot::build_graph(margot::read_edge_csv(a.graph_path),
                             a.inverse_cost);
}

margot::MarginPair load_margins(const MarginArgs& a,
                                const margot::WeightedDigraph& g) {
  auto [sigma_in, sigma_out] = margot::read_margin_csv(a.margins_path, g.n);
  return margot::validate_margins(g, std::move(sigma_in),
                                  std::move(sigma_out),
                                  a.reject_margins
                                      ? margot::MarginPolicy::reject
                                      : margot::MarginPolicy::renormalize);
}

void require_positive_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw margot::BadParameter("--beta must be positive and finite");
}

// ---------------------------------------------------------------- solve ----

struct SolveOptions {
  GraphArgs graph;
  MarginArgs margins;
  std::string mode = "regular";
  std::string out_dir = ".";
  double beta = 1.0;
  double epsilon_gap = 1e-8;
  double tol = 1e-10;
  int max_iter = 10000;
};

int run_solve(const SolveOptions& o) {
  require_positive_beta(o.beta);
  const margot::WeightedDigraph g = load_graph(o.graph);
  const margot::MarginPair margins = load_margins(o.margins, g);
  ensure_dir(o.out_dir);

  margot::SolveTimings timings;
  json summary;
  margot::SolutionResiduals res;
  double scaling_residual = 0.0;
  if (o.mode == "regular") {
    margot::RegularSolution s = margot::solve_regular(
        g, margins, o.beta, o.epsilon_gap, o.tol, o.max_iter, &timings);
    margot::write_entries_csv(join_path(o.out_dir, "coupling.csv"), s.gamma);
    margot::write_entries_csv(join_path(o.out_dir, "flows.csv"),
                              s.edge_flows);
    margot::write_vector_csv(join_path(o.out_dir, "visits.csv"),
                             s.node_visits, "visits");
    margot::write_entries_csv(join_path(o.out_dir, "policy.csv"), s.policy);
    res = margot::solution_residuals(s.gamma, s.edge_flows, s.node_visits,
                                     margins);
    scaling_residual = s.residual;
    summary["fe_min"] = s.fe_min;
    summary["iterations"] = s.iterations;
    summary["underflow"] = s.underflow;
    summary["epsilon"] = s.killing.epsilon;
  } else {
    margot::HittingSolution s =
        margot::solve_hitting(g, margins, o.beta, o.tol, o.max_iter, &timings);
    margot::write_entries_csv(join_path(o.out_dir, "coupling.csv"),
                              s.gamma_h);
    margot::write_entries_csv(join_path(o.out_dir, "flows.csv"),
                              s.edge_flows_h);
    margot::write_vector_csv(join_path(o.out_dir, "visits.csv"),
                             s.node_visits_h, "visits");
    margot::write_entries_csv(join_path(o.out_dir, "policy.csv"), s.policy_h);
    res = margot::solution_residuals(s.gamma_h, s.edge_flows_h,
                                     s.node_visits_h, margins);
    scaling_residual = s.residual;
    summary["fe_min"] = s.fe_min_h;
    summary["iterations"] = s.iterations;
    summary["underflow"] = s.underflow;
  }
  summary["mode"] = o.mode;
  summary["beta"] = o.beta;
  summary["n"] = g.n;
  summary["residuals"] = residuals_json(scaling_residual, res);
  summary["timings"] = timings_json(timings);
  margot::write_text_file(join_path(o.out_dir, "summary.json"),
                          summary.dump(2) + "\n");

  json manifest{
      {"command", "solve"},
      {"graph", o.graph.graph_path},
      {"margins", o.margins.margins_path},
      {"inverse_cost", o.graph.inverse_cost},
      {"margin_policy", o.margins.reject_margins ? "reject" : "renormalize"},
      {"margins_renormalized", margins.renormalized},
      {"mode", o.mode},
      {"beta", o.beta},
      {"epsilon_gap", o.epsilon_gap},
      {"tol", o.tol},
      {"max_iter", o.max_iter},
      {"seed", nullptr},
      {"outputs",
       {"coupling.csv", "flows.csv", "visits.csv", "policy.csv",
        "summary.json"}},
      {"timings", timings_json(timings)},
      {"residuals", residuals_json(scaling_residual, res)}};
  margot::write_text_file(join_path(o.out_dir, "manifest.json"),
                          manifest.dump(2) + "\n");

  std::cout << "mode=" << o.mode << " beta=" << margot::fmt17(o.beta)
            << " fe_min=" << margot::fmt17(summary["fe_min"].get<double>())
            << " iterations=" << summary["iterations"].get<int>()
            << " scaling_residual=" << margot::fmt17(scaling_residual)
            << "\noutputs written to " << o.out_dir << std::endl;
  return 0;
}

// ------------------------------------------------------------ distances ----

struct DistancesOptions {
  GraphArgs graph;
  std::string kind = "fe-pairwise";
  std::string mode = "hitting";
  std::string weights_path;
  std::string groups_path;
  std::string out_dir = ".";
  double beta = 1.0;
  double tol = 1e-10;
  int max_iter = 10000;
};

int run_distances(const DistancesOptions& o) {
  require_positive_beta(o.beta);
  const margot::WeightedDigraph g = load_graph(o.graph);
  auto node_weights = [&]() -> margot::Vector {
    if (o.weights_path.empty())
      return margot::Vector::Constant(g.n, 1.0 / static_cast<double>(g.n));
    return margot::read_weight_csv(o.weights_path, g.n);
  };
  margot::DistanceMatrix dm;
  if (o.kind == "fe-pairwise") {
    dm = margot::free_energy_distance_matrix(g, o.beta);
  } else if (o.kind == "surprisal") {
    dm = margot::surprisal_distance(g, node_weights(), o.beta,
                                    parse_mode(o.mode), o.tol, o.max_iter);
  } else {
    if (o.groups_path.empty())
      throw margot::BadParameter("--kind group requires --groups FILE");
    margot::GroupSpec spec{margot::read_group_csv(o.groups_path, g.n),
                           node_weights()};
    if (parse_mode(o.mode) == margot::PathMode::regular)
      std::cerr << "note: regular-mode group dissimilarity rebuilds the "
                   "killed fundamental matrix for every ordered group pair "
                   "(O(p^2) factorizations)"
                << std::endl;
    dm = margot::group_dissimilarity(g, spec, o.beta, parse_mode(o.mode),
                                     o.tol, o.max_iter);
  }
  ensure_dir(o.out_dir);
  margot::write_entries_csv(join_path(o.out_dir, "distances.csv"), dm.values);
  json manifest{{"command", "distances"},
                {"graph", o.graph.graph_path},
                {"inverse_cost", o.graph.inverse_cost},
                {"kind", margot::to_string(dm.kind)},
                {"mode", o.mode},
                {"beta", o.beta},
                {"weights", o.weights_path},
                {"groups", o.groups_path},
                {"tol", o.tol},
                {"max_iter", o.max_iter},
                {"seed", nullptr},
                {"metric_claimed", dm.metric_claimed},
                {"has_infinite", dm.has_infinite},
                {"outputs", {"distances.csv"}}};
  margot::write_text_file(join_path(o.out_dir, "manifest.json"),
                          manifest.dump(2) + "\n");
  std::cout << "kind=" << margot::to_string(dm.kind) << " size="
            << dm.values.rows() << "x" << dm.values.cols()
            << " max=" << margot::fmt17(dm.values.maxCoeff())
            << "\noutputs written to " << o.out_dir << std::endl;
  return 0;
}

// --------------------------------------------------------------- figure1 ----

struct Figure1Options {
  int rows = 10;
  int cols = 10;
  int n_sources = 5;
  int n_targets = 50;
  std::vector<double> betas{1e-3, 1e-1, 10.0};
  std::uint64_t seed = 7;
  std::string out_dir = ".";
  double tol = 1e-8;
  int max_iter = 1000000;
};

int run_figure1(const Figure1Options& o) {
  for (double beta : o.betas) require_positive_beta(beta);
  margot::ExperimentInstance inst = margot::make_figure_instance(
      o.rows, o.cols, o.n_sources, o.n_targets, o.seed);
  ensure_dir(o.out_dir);

  std::vector<char> role(static_cast<std::size_t>(inst.graph.n), 'n');
  for (margot::Index s : inst.sources) role[static_cast<std::size_t>(s)] = 's';
  for (margot::Index t : inst.targets) role[static_cast<std::size_t>(t)] = 't';

  json runs = json::array();
  for (double beta : o.betas) {
    for (const std::string mode : {"regular", "hitting"}) {
      margot::Matrix gamma, flows;
      int iterations = 0;
      double residual = 0.0, fe = 0.0;
      if (mode == "regular") {
        margot::RegularSolution s = margot::solve_regular(
            inst.graph, inst.margins, beta, 1e-8, o.tol, o.max_iter);
        gamma = std::move(s.gamma);
        flows = std::move(s.edge_flows);
        iterations = s.iterations;
        residual = s.residual;
        fe = s.fe_min;
      } else {
        margot::HittingSolution s = margot::solve_hitting(
            inst.graph, inst.margins, beta, o.tol, o.max_iter);
        gamma = std::move(s.gamma_h);
        flows = std::move(s.edge_flows_h);
        iterations = s.iterations;
        residual = s.residual;
        fe = s.fe_min_h;
      }
      const margot::Matrix membership = margot::membership_matrix(
          gamma, inst.margins.sigma_out, inst.sources, inst.targets);

      const std::string node_file =
          "figure1_nodes_beta" + beta_tag(beta) + "_" + mode + ".csv";
      const std::string edge_file =
          "figure1_edges_beta" + beta_tag(beta) + "_" + mode + ".csv";
      {
        std::string out = "node,role";
        for (std::size_t s = 0; s < inst.sources.size(); ++s)
          out += ",m" + std::to_string(s + 1);
        out += "\n";
        for (margot::Index i = 0; i < inst.graph.n; ++i) {
          const char r = role[static_cast<std::size_t>(i)];
          out += std::to_string(i + 1);
          out += r == 's' ? ",source" : (r == 't' ? ",target" : ",none");
          if (r == 't') {
            const auto it = std::find(inst.targets.begin(),
                                      inst.targets.end(), i);
            const margot::Index trow = it - inst.targets.begin();
            for (margot::Index s = 0;
                 s < static_cast<margot::Index>(inst.sources.size()); ++s)
              out += "," + margot::fmt17(membership(trow, s));
          } else {
            for (std::size_t s = 0; s < inst.sources.size(); ++s) out += ",0";
          }
          out += "\n";
        }
        margot::write_text_file(join_path(o.out_dir, node_file), out);
      }
      margot::write_entries_csv(join_path(o.out_dir, edge_file), flows);
      runs.push_back(json{{"beta", beta},
                          {"mode", mode},
                          {"fe_min", fe},
                          {"iterations", iterations},
                          {"scaling_residual", residual},
                          {"node_file", node_file},
                          {"edge_file", edge_file}});
      std::cout << "beta=" << beta_tag(beta) << " mode=" << mode
                << " iterations=" << iterations
                << " residual=" << margot::fmt17(residual) << std::endl;
    }
  }
  json sources_1b = json::array(), targets_1b = json::array();
  for (margot::Index s : inst.sources) sources_1b.push_back(s + 1);
  for (margot::Index t : inst.targets) targets_1b.push_back(t + 1);
  json manifest{{"command", "figure1"},
                {"rows", o.rows},
                {"cols", o.cols},
                {"n_sources", o.n_sources},
                {"n_targets", o.n_targets},
                {"betas", o.betas},
                {"seed", o.seed},
                {"tol", o.tol},
                {"max_iter", o.max_iter},
                {"sources", sources_1b},
                {"targets", targets_1b},
                {"runs", runs}};
  margot::write_text_file(join_path(o.out_dir, "manifest.json"),
                          manifest.dump(2) + "\n");
  std::cout << "outputs written to " << o.out_dir << std::endl;
  return 0;
}

// ----------------------------------------------------------------- bench ----

struct BenchOptions {
  std::vector<int> sizes{100, 400, 900};
  std::uint64_t seed = 1;
  double beta = 1.0;
  std::string out_dir = ".";
  double tol = 1e-10;
  int max_iter = 100000;
};

int run_bench(const BenchOptions& o) {
  require_positive_beta(o.beta);
  ensure_dir(o.out_dir);
  std::string csv = "n,exact_flow_s,regular_s,hitting_s\n";
  json rows = json::array();
  bool hitting_trend = true;
  for (int n : o.sizes) {
    const int side = static_cast<int>(std::lround(std::sqrt(double(n))));
    if (side < 2 || side * side != n)
      throw margot::BadParameter(
          "bench sizes must be perfect squares of lattice sides, got " +
          std::to_string(n));
    margot::ExperimentInstance inst = margot::make_bench_instance(side, o.seed);

    auto t0 = std::chrono::steady_clock::now();
    margot::ExactFlowSolution flow = margot::exact_flow(inst.graph, inst.margins);
    const double t_flow = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    margot::RegularSolution reg = margot::solve_regular(
        inst.graph, inst.margins, o.beta, 1e-8, o.tol, o.max_iter);
    const double t_reg = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    margot::HittingSolution hit = margot::solve_hitting(
        inst.graph, inst.margins, o.beta, o.tol, o.max_iter);
    const double t_hit = seconds_since(t0);

    csv += std::to_string(n) + "," + margot::fmt17(t_flow) + "," +
           margot::fmt17(t_reg) + "," + margot::fmt17(t_hit) + "\n";
    rows.push_back(json{{"n", n},
                        {"exact_flow_s", t_flow},
                        {"regular_s", t_reg},
                        {"hitting_s", t_hit},
                        {"lp_cost", flow.total_cost},
                        {"regular_iterations", reg.iterations},
                        {"hitting_iterations", hit.iterations},
                        {"instance_digest", margot::instance_digest(inst, o.seed)}});
    hitting_trend = hitting_trend && t_hit <= 1.1 * t_reg;
    std::cout << "n=" << n << " exact_flow=" << margot::fmt17(t_flow)
              << "s regular=" << margot::fmt17(t_reg)
              << "s hitting=" << margot::fmt17(t_hit)
              << "s regular/exact=" << margot::fmt17(t_reg / t_flow)
              << " hitting/regular=" << margot::fmt17(t_hit / t_reg)
              << std::endl;
  }
  std::cout << "trend: hitting " << (hitting_trend ? "<=" : ">")
            << " 1.1 x regular on "
            << (hitting_trend ? "every size" : "some size") << std::endl;
  margot::write_text_file(join_path(o.out_dir, "bench.csv"), csv);
  json manifest{{"command", "bench"}, {"sizes", o.sizes},
                {"seed", o.seed},    {"beta", o.beta},
                {"tol", o.tol},      {"max_iter", o.max_iter},
                {"outputs", {"bench.csv"}}, {"rows", rows}};
  margot::write_text_file(join_path(o.out_dir, "manifest.json"),
                          manifest.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- oracle ----

struct OracleOptions {
  std::string check = "coupling";
  std::string dir = ".";
  std::string graph_override;
  std::string margins_override;
  int max_len = 20;
};

int run_oracle(const OracleOptions& o) {
  json manifest, summary;
  try {
    manifest = json::parse(margot::read_text_file(join_path(o.dir, "manifest.json")));
    summary = json::parse(margot::read_text_file(join_path(o.dir, "summary.json")));
  } catch (const json::exception& e) {
    throw margot::InputError(std::string("cannot parse solve outputs: ") +
                             e.what());
  }
  if (manifest.value("command", "") != "solve")
    throw margot::InputError("oracle --check needs the output directory of a "
                             "solve run");
  GraphArgs ga{o.graph_override.empty() ? manifest.at("graph").get<std::string>()
                                        : o.graph_override,
               manifest.value("inverse_cost", false)};
  MarginArgs ma{o.margins_override.empty()
                    ? manifest.at("margins").get<std::string>()
                    : o.margins_override,
                manifest.value("margin_policy", "renormalize") == "reject"};
  const margot::WeightedDigraph g = load_graph(ga);
  const margot::MarginPair margins = load_margins(ma, g);
  const std::string mode = summary.at("mode").get<std::string>();
  const double beta = summary.at("beta").get<double>();

  if (o.check == "coupling") {
    const margot::Matrix gamma =
        margot::read_entries_csv(join_path(o.dir, "coupling.csv"), g.n, g.n);
    const margot::Matrix flows =
        margot::read_entries_csv(join_path(o.dir, "flows.csv"), g.n, g.n);
    const margot::Vector visits =
        margot::read_vector_csv(join_path(o.dir, "visits.csv"), g.n);
    const margot::SolutionResiduals res =
        margot::solution_residuals(gamma, flows, visits, margins);
    const json& stored = summary.at("residuals");
    const bool ok = res.margin == stored.at("margin").get<double>() &&
                    res.conservation == stored.at("conservation").get<double>() &&
                    res.consistency == stored.at("consistency").get<double>();
    std::cout << "margin residual       " << margot::fmt17(res.margin)
              << " (stored " << margot::fmt17(stored.at("margin").get<double>())
              << ")\n"
              << "conservation residual " << margot::fmt17(res.conservation)
              << " (stored "
              << margot::fmt17(stored.at("conservation").get<double>()) << ")\n"
              << "consistency residual  " << margot::fmt17(res.consistency)
              << " (stored "
              << margot::fmt17(stored.at("consistency").get<double>()) << ")\n"
              << "coupling check: "
              << (ok ? "residuals reproduced bit-identically"
                     : "MISMATCH against stored residuals")
              << std::endl;
    if (!ok)
      throw margot::NumericError("stored residuals were not reproduced");
    return 0;
  }
  if (o.check == "flow") {
    const margot::ExactFlowSolution flow = margot::exact_flow(g, margins);
    const margot::ExactCouplingSolution oc =
        margot::exact_coupling(margins, margot::shortest_path_costs(g));
    const margot::Matrix flows =
        margot::read_entries_csv(join_path(o.dir, "flows.csv"), g.n, g.n);
    const double transport_cost = flows.cwiseProduct(g.cost).sum();
    const double fe = summary.at("fe_min").get<double>();
    const double cost_gap = std::abs(flow.total_cost - oc.cost);
    std::cout << "lp flow cost          " << margot::fmt17(flow.total_cost)
              << "\nlp coupling cost      " << margot::fmt17(oc.cost)
              << "\n|flow - coupling|     " << margot::fmt17(cost_gap)
              << "\nsolver fe_min         " << margot::fmt17(fe)
              << "\nsolver edge-flow cost " << margot::fmt17(transport_cost)
              << "\nmargin residual (lp)  "
              << margot::fmt17(flow.margin_residual) << std::endl;
    if (flow.total_cost > 0.0)
      std::cout << "fe/lp gap             "
                << margot::fmt17(std::abs(fe - flow.total_cost) /
                                 flow.total_cost)
                << "\nflow-cost/lp gap      "
                << margot::fmt17(std::abs(transport_cost - flow.total_cost) /
                                 flow.total_cost)
                << "\n(informational; tight only at large beta)" << std::endl;
    if (cost_gap > 1e-9)
      throw margot::NumericError(
          "flow and coupling oracles disagree on the optimal cost by " +
          margot::fmt17(cost_gap));
    return 0;
  }
  // fundamental
  const margot::PathMode pm = parse_mode(mode);
  const margot::BruteForceFundamental bf =
      margot::brute_force_fundamental(g, beta, pm, o.max_len);
  margot::Matrix solver_z;
  if (pm == margot::PathMode::hitting)
    solver_z = margot::hitting_fundamental(margot::row_stochastic(g.affinity),
                                           g.cost, beta)
                   .Z_h;
  else
    solver_z = margot::FundamentalFactor(margot::row_stochastic(g.affinity),
                                         g.cost, beta)
                   .materialize();
  const double max_dev = (solver_z - bf.Z).cwiseAbs().maxCoeff();
  const double allowed = bf.tail_bound + 1e-9;
  std::cout << "max |Z_solver - Z_enum| " << margot::fmt17(max_dev)
            << "\nenumeration tail bound  " << margot::fmt17(bf.tail_bound)
            << "\nfundamental check: "
            << (max_dev <= allowed ? "within tail bound" : "MISMATCH")
            << std::endl;
  if (max_dev > allowed)
    throw margot::NumericError(
        "fundamental matrix deviates from path enumeration by " +
        margot::fmt17(max_dev));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("MARGOT_THREADS")) {
    const int k = std::atoi(threads);
    if (k > 0) Eigen::setNbThreads(k);
  }

  CLI::App app{"margin-constrained bag-of-paths solver"};
  app.require_subcommand(1);

  SolveOptions so;
  CLI::App* solve = app.add_subcommand(
      "solve", "solve one margin-constrained path problem");
  solve->add_option("--graph", so.graph.graph_path,
                    "edge CSV: src,dst,affinity,cost")->required();
  solve->add_option("--margins", so.margins.margins_path,
                    "margin CSV: node,sigma_in,sigma_out")->required();
  solve->add_option("--mode", so.mode, "path family")
      ->check(CLI::IsMember({"regular", "hitting"}));
  solve->add_option("--beta", so.beta, "inverse temperature (> 0)");
  solve->add_option("--epsilon-gap", so.epsilon_gap,
                    "offset above the persistence lower bound (regular mode)");
  solve->add_option("--tol", so.tol, "scaling convergence tolerance");
  solve->add_option("--max-iter", so.max_iter, "scaling sweep limit");
  solve->add_option("--out", so.out_dir, "output directory");
  solve->add_flag("--inverse-cost", so.graph.inverse_cost,
                  "derive costs as 1/affinity, ignoring the cost column");
  solve->add_flag("--reject-margins", so.margins.reject_margins,
                  "reject margins whose sums deviate from 1 instead of "
                  "renormalizing");

  DistancesOptions dop;
  CLI::App* distances = app.add_subcommand(
      "distances", "distance and dissimilarity matrices");
  distances->add_option("--graph", dop.graph.graph_path,
                        "edge CSV: src,dst,affinity,cost")->required();
  distances->add_option("--kind", dop.kind, "distance family")
      ->check(CLI::IsMember({"surprisal", "fe-pairwise", "group"}));
  distances->add_option("--mode", dop.mode, "path family")
      ->check(CLI::IsMember({"regular", "hitting"}));
  distances->add_option("--beta", dop.beta, "inverse temperature (> 0)");
  distances->add_option("--weights", dop.weights_path,
                        "node weight CSV: node,weight (default: uniform)");
  distances->add_option("--groups", dop.groups_path,
                        "group CSV: node,group,membership");
  distances->add_option("--tol", dop.tol, "scaling convergence tolerance");
  distances->add_option("--max-iter", dop.max_iter, "scaling sweep limit");
  distances->add_option("--out", dop.out_dir, "output directory");
  distances->add_flag("--inverse-cost", dop.graph.inverse_cost,
                      "derive costs as 1/affinity");

  DistancesOptions gop;
  gop.kind = "group";
  CLI::App* groups = app.add_subcommand(
      "groups", "free-energy dissimilarity between node groups");
  groups->add_option("--graph", gop.graph.graph_path,
                     "edge CSV: src,dst,affinity,cost")->required();
  groups->add_option("--groups", gop.groups_path,
                     "group CSV: node,group,membership")->required();
  groups->add_option("--mode", gop.mode, "path family")
      ->check(CLI::IsMember({"regular", "hitting"}));
  groups->add_option("--beta", gop.beta, "inverse temperature (> 0)");
  groups->add_option("--weights", gop.weights_path,
                     "node weight CSV: node,weight (default: uniform)");
  groups->add_option("--tol", gop.tol, "scaling convergence tolerance");
  groups->add_option("--max-iter", gop.max_iter, "scaling sweep limit");
  groups->add_option("--out", gop.out_dir, "output directory");
  groups->add_flag("--inverse-cost", gop.graph.inverse_cost,
                   "derive costs as 1/affinity");

  Figure1Options fo;
  CLI::App* figure1 = app.add_subcommand(
      "figure1", "lattice source-target coupling experiment tables");
  figure1->add_option("--rows", fo.rows, "lattice rows");
  figure1->add_option("--cols", fo.cols, "lattice columns");
  figure1->add_option("--sources", fo.n_sources, "number of source nodes");
  figure1->add_option("--targets", fo.n_targets, "number of target nodes");
  figure1->add_option("--betas", fo.betas, "inverse temperatures")
      ->delimiter(',');
  figure1->add_option("--seed", fo.seed, "placement seed");
  figure1->add_option("--tol", fo.tol, "scaling convergence tolerance");
  figure1->add_option("--max-iter", fo.max_iter, "scaling sweep limit");
  figure1->add_option("--out", fo.out_dir, "output directory");

  BenchOptions bo;
  CLI::App* bench = app.add_subcommand(
      "bench", "wall-time comparison of both solvers against the exact flow");
  bench->add_option("--sizes", bo.sizes, "lattice node counts (squares)")
      ->delimiter(',');
  bench->add_option("--seed", bo.seed, "placement seed");
  bench->add_option("--beta", bo.beta, "inverse temperature (> 0)");
  bench->add_option("--tol", bo.tol, "scaling convergence tolerance");
  bench->add_option("--max-iter", bo.max_iter, "scaling sweep limit");
  bench->add_option("--out", bo.out_dir, "output directory");

  OracleOptions oo;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "re-check a prior solve against exact references");
  oracle->add_option("--check", oo.check, "what to verify")
      ->required()
      ->check(CLI::IsMember({"flow", "coupling", "fundamental"}));
  oracle->add_option("--dir", oo.dir, "directory of a prior solve run");
  oracle->add_option("--graph", oo.graph_override,
                     "override the graph path recorded in the manifest");
  oracle->add_option("--margins", oo.margins_override,
                     "override the margins path recorded in the manifest");
  oracle->add_option("--max-len", oo.max_len,
                     "enumeration length cap for --check fundamental");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return run_solve(so);
    if (*distances) return run_distances(dop);
    if (*groups) return run_distances(gop);
    if (*figure1) return run_figure1(fo);
    if (*bench) return run_bench(bo);
    if (*oracle) return run_oracle(oo);
  } catch (const margot::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 4;
  } catch (const margot::InputError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const margot::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 0;
}
