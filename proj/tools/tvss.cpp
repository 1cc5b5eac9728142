// tvss: generate benchmark graphs, run the solvers, and compare them over
// Monte-Carlo runs.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvss/experiment.hpp"
#include "tvss/generator.hpp"
#include "tvss/io.hpp"
#include "tvss/label_propagation.hpp"
#include "tvss/mp_sim.hpp"
#include "tvss/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvss;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out{"out"};
};

struct GenerateArgs {
  std::optional<std::size_t> cluster_size;
  std::optional<std::size_t> gate_edges;
  std::optional<std::size_t> degree_cap;
  std::optional<double> label_fraction;
};

struct SolveArgs {
  std::string method{"accel"};
  std::string in;
  std::string graph;
  std::string labels;
  std::string truth;
  std::optional<std::size_t> iters;
  std::optional<double> eps;
  std::optional<double> eps_rel;
  std::optional<double> mu0;
  std::optional<double> kappa;
  std::optional<std::string> lipschitz_mode;
  std::optional<std::string> accumulation;
  std::optional<std::size_t> partitions;
  std::optional<std::size_t> consensus_k;
  std::optional<std::string> residual_mode;
};

struct CompareArgs {
  std::optional<std::size_t> runs;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> threads;
  std::optional<double> eps_rel;
  std::optional<std::string> lipschitz_mode;
  std::optional<std::string> accumulation;
  bool sim{false};
  std::optional<std::size_t> partitions;
  std::optional<std::size_t> consensus_k;
  std::optional<std::string> residual_mode;
};

ExperimentConfig load_config(const Common& common) {
  ExperimentConfig cfg;
  if (!common.config.empty()) load_json(common.config).get_to(cfg);
  if (common.seed) {
    cfg.seed = *common.seed;
    cfg.generator.seed = *common.seed;
  }
  cfg.output_dir = common.out;
  return cfg;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

double l2_norm(const GraphSignal& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

int cmd_generate(const Common& common, const GenerateArgs& args) {
  ExperimentConfig cfg = load_config(common);
  TwoClusterConfig gen = cfg.generator;
  if (args.cluster_size) gen.cluster_size = *args.cluster_size;
  if (args.gate_edges) gen.gate_edges = *args.gate_edges;
  if (args.degree_cap) gen.degree_cap = *args.degree_cap;
  if (args.label_fraction) gen.label_fraction = *args.label_fraction;

  const ClusterInstance inst = generate_two_cluster(gen);
  const fs::path dir = common.out;
  fs::create_directories(dir);
  io::save_edge_list(dir / "graph.tsv", inst.graph);
  io::save_signal(dir / "truth.csv", inst.truth);
  io::save_labels(dir / "labels.csv", inst.labels);

  std::cout << "N=" << inst.graph.node_count() << " |E|=" << inst.graph.edge_count()
            << " d_max=" << io::format_double(max_degree(inst.graph))
            << " max_neighbors=" << max_combinatorial_degree(inst.graph)
            << " diameter=" << diameter(inst.graph) << " M=" << inst.labels.size() << '\n';
  return 0;
}

int cmd_solve(const Common& common, const SolveArgs& args) {
  ExperimentConfig cfg = load_config(common);
  fs::path graph_path = args.graph, labels_path = args.labels, truth_path = args.truth;
  if (!args.in.empty()) {
    const fs::path in = args.in;
    if (graph_path.empty()) graph_path = in / "graph.tsv";
    if (labels_path.empty()) labels_path = in / "labels.csv";
    if (truth_path.empty() && fs::exists(in / "truth.csv")) truth_path = in / "truth.csv";
  }
  if (graph_path.empty() || labels_path.empty()) {
    throw std::invalid_argument("solve needs --in <dir> or both --graph and --labels");
  }
  const EmpiricalGraph g = io::load_edge_list(graph_path);
  const LabelSet labels = io::load_labels(labels_path, g.node_count());
  std::optional<GraphSignal> truth;
  if (!truth_path.empty()) truth = io::load_signal(truth_path, g.node_count());
  const GraphSignal* truth_ptr = truth ? &*truth : nullptr;

  SolverConfig solver = cfg.solver;
  if (args.method == "nesterov") {
    // Fixed smoothing unless the caller asks otherwise.
    solver.kappa = 1.0;
  } else if (args.method != "accel" && args.method != "lp" && args.method != "sim") {
    throw std::invalid_argument("unknown method '" + args.method + "' (expected nesterov|accel|lp|sim)");
  }
  if (args.iters) solver.max_iters = *args.iters;
  if (args.mu0) solver.mu0 = *args.mu0;
  if (args.kappa) solver.kappa = *args.kappa;
  if (args.lipschitz_mode) solver.lipschitz_mode = parse_lipschitz_mode(*args.lipschitz_mode);
  if (args.accumulation) solver.accumulation = parse_accumulation(*args.accumulation);
  if (args.eps && args.eps_rel) throw std::invalid_argument("--eps and --eps-rel are mutually exclusive");
  if (args.eps) {
    solver.epsilon = *args.eps;
  } else {
    const std::optional<double> rel = args.eps_rel ? args.eps_rel : cfg.epsilon_relative;
    if (args.eps_rel && !truth) throw std::invalid_argument("--eps-rel needs the ground truth");
    if (rel && truth) solver.epsilon = *rel * l2_norm(*truth);
  }
  validate(solver);

  const fs::path dir = common.out;
  fs::create_directories(dir);
  json summary{{"method", args.method}, {"graph", graph_path.string()}, {"labels", labels_path.string()},
               {"nodes", g.node_count()}, {"edges", g.edge_count()}, {"labeled", labels.size()}};
  const GraphSignal x0(g.node_count(), 0.0);
  GraphSignal estimate;
  std::ofstream trace_out(dir / "trace.csv", std::ios::binary);

  if (args.method == "lp") {
    PropagationResult lp = label_propagation(g, labels, solver.max_iters, x0, truth_ptr);
    write_trace_csv(trace_out, lp.trace);
    estimate = std::move(lp.x);
    summary["iterations"] = solver.max_iters;
  } else if (args.method == "sim") {
    mp::SimConfig sim = cfg.sim.value_or(mp::SimConfig{});
    sim.epsilon = solver.epsilon;
    if (args.mu0) sim.mu = *args.mu0;
    if (args.iters) sim.max_iters = *args.iters;
    if (args.lipschitz_mode) sim.lipschitz_mode = solver.lipschitz_mode;
    if (args.partitions) sim.partitions = *args.partitions;
    if (args.consensus_k) sim.consensus_rounds = *args.consensus_k;
    if (args.residual_mode) sim.residual_mode = mp::parse_residual_mode(*args.residual_mode);
    mp::Simulator simulator(g, labels, sim, x0, truth_ptr);
    const auto snapshots = simulator.run();
    mp::write_snapshots_csv(trace_out, snapshots);
    estimate = simulator.estimate();
    summary["sim_config"] = sim;
    summary["iterations"] = sim.max_iters;
    summary["total_msgs"] = simulator.stats().total_messages;
    summary["inter_partition_msgs"] = simulator.stats().inter_partition_messages;
    summary["rounds"] = simulator.stats().rounds;
  } else {
    SolveResult res = solve(g, labels, solver, x0, truth_ptr);
    write_trace_csv(trace_out, res.trace);
    estimate = std::move(res.v);
    summary["solver_config"] = solver;
    summary["iterations"] = res.trace.size();
    summary["status"] = res.status == SolveStatus::diverged    ? "diverged"
                        : res.status == SolveStatus::converged ? "converged"
                                                               : "completed";
    if (res.status == SolveStatus::diverged) {
      write_json(dir / "summary.json", summary);
      std::cerr << "error: solver diverged; trace kept in " << (dir / "trace.csv").string() << '\n';
      return 1;
    }
  }
  if (!trace_out) throw std::runtime_error("failed writing trace.csv");

  io::save_signal(dir / "labeling.csv", estimate);
  summary["epsilon"] = solver.epsilon;
  summary["tv"] = total_variation(g, estimate);
  summary["emp_err"] = empirical_error(estimate, labels);
  if (truth) summary["nmse"] = nmse(estimate, *truth);
  write_json(dir / "summary.json", summary);
  std::cout << args.method << ": tv=" << io::format_double(summary["tv"].get<double>());
  if (truth) std::cout << " nmse=" << io::format_double(summary["nmse"].get<double>());
  std::cout << '\n';
  return 0;
}

int cmd_compare(const Common& common, const CompareArgs& args) {
  ExperimentConfig cfg = load_config(common);
  if (args.runs) cfg.monte_carlo_runs = *args.runs;
  if (args.threads) cfg.threads = *args.threads;
  if (args.eps_rel) cfg.epsilon_relative = *args.eps_rel;
  if (args.lipschitz_mode) cfg.solver.lipschitz_mode = parse_lipschitz_mode(*args.lipschitz_mode);
  if (args.accumulation) cfg.solver.accumulation = parse_accumulation(*args.accumulation);
  if (args.sim && !cfg.sim) cfg.sim = mp::SimConfig{};
  if (args.iters) {
    cfg.solver.max_iters = *args.iters;
    cfg.lp_iters = 0;
  }
  if (cfg.sim) {
    cfg.sim->max_iters = cfg.solver.max_iters;
    cfg.sim->lipschitz_mode = cfg.solver.lipschitz_mode;
    if (args.partitions) cfg.sim->partitions = *args.partitions;
    if (args.consensus_k) cfg.sim->consensus_rounds = *args.consensus_k;
    if (args.residual_mode) cfg.sim->residual_mode = mp::parse_residual_mode(*args.residual_mode);
  }

  const CompareResult result = compare(cfg);
  write_compare_outputs(result, cfg, cfg.output_dir);
  const RunSummary& s = result.summary;
  std::cout << "runs=" << s.runs_ok << "/" << cfg.monte_carlo_runs
            << " nmse_nest=" << io::format_double(s.nmse_nest) << " nmse_lp=" << io::format_double(s.nmse_lp);
  if (s.nmse_sim) std::cout << " nmse_sim=" << io::format_double(*s.nmse_sim);
  std::cout << '\n';
  if (!s.errors.empty()) {
    for (const auto& e : s.errors) std::cerr << "error: " << e << '\n';
    std::cerr << "partial results written to " << cfg.output_dir.string() << '\n';
    return 1;
  }
  return 0;
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--seed", common.seed, "random seed");
  sub->add_option("--out", common.out, "output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph total-variation learning: generator, solvers and experiments"};
  app.require_subcommand(1);

  Common common;
  GenerateArgs gen;
  SolveArgs solve_args;
  CompareArgs cmp;

  auto* generate = app.add_subcommand("generate", "generate a clustered benchmark graph with labels");
  add_common(generate, common);
  generate->add_option("--cluster-size", gen.cluster_size);
  generate->add_option("--gate-edges", gen.gate_edges);
  generate->add_option("--degree-cap", gen.degree_cap);
  generate->add_option("--label-fraction", gen.label_fraction);

  auto* solve_cmd = app.add_subcommand("solve", "run one method on a graph");
  add_common(solve_cmd, common);
  solve_cmd->add_option("--method", solve_args.method, "nesterov|accel|lp|sim")
      ->check(CLI::IsMember({"nesterov", "accel", "lp", "sim"}))
      ->capture_default_str();
  solve_cmd->add_option("--in", solve_args.in, "directory with graph.tsv, labels.csv and optionally truth.csv");
  solve_cmd->add_option("--graph", solve_args.graph);
  solve_cmd->add_option("--labels", solve_args.labels);
  solve_cmd->add_option("--truth", solve_args.truth);
  solve_cmd->add_option("--iters", solve_args.iters);
  solve_cmd->add_option("--eps", solve_args.eps, "absolute error level");
  solve_cmd->add_option("--eps-rel", solve_args.eps_rel, "error level relative to ||truth||_2");
  solve_cmd->add_option("--mu0", solve_args.mu0, "initial (or fixed) smoothing");
  solve_cmd->add_option("--kappa", solve_args.kappa, "smoothing decrease factor");
  solve_cmd->add_option("--lipschitz-mode", solve_args.lipschitz_mode)->check(CLI::IsMember({"paper", "corrected"}));
  solve_cmd->add_option("--accumulation", solve_args.accumulation)
      ->check(CLI::IsMember({"literal", "step_weighted"}));
  solve_cmd->add_option("--partitions", solve_args.partitions);
  solve_cmd->add_option("--consensus-k", solve_args.consensus_k);
  solve_cmd->add_option("--residual-mode", solve_args.residual_mode)
      ->check(CLI::IsMember({"paper", "calibrated"}));

  auto* compare_cmd = app.add_subcommand("compare", "Monte-Carlo NMSE comparison");
  add_common(compare_cmd, common);
  compare_cmd->add_option("--runs", cmp.runs);
  compare_cmd->add_option("--iters", cmp.iters);
  compare_cmd->add_option("--threads", cmp.threads, "worker threads (default: TVSS_THREADS or all cores)");
  compare_cmd->add_option("--eps-rel", cmp.eps_rel);
  compare_cmd->add_option("--lipschitz-mode", cmp.lipschitz_mode)->check(CLI::IsMember({"paper", "corrected"}));
  compare_cmd->add_option("--accumulation", cmp.accumulation)->check(CLI::IsMember({"literal", "step_weighted"}));
  compare_cmd->add_flag("--sim", cmp.sim, "include the message-passing simulator");
  compare_cmd->add_option("--partitions", cmp.partitions);
  compare_cmd->add_option("--consensus-k", cmp.consensus_k);
  compare_cmd->add_option("--residual-mode", cmp.residual_mode)->check(CLI::IsMember({"paper", "calibrated"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(common, gen);
    if (solve_cmd->parsed()) return cmd_solve(common, solve_args);
    return cmd_compare(common, cmp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
