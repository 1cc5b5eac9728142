#include "tvss/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <stdexcept>
#include <string_view>
#include <thread>

#include "tvss/io.hpp"
#include "tvss/label_propagation.hpp"
#include "tvss/random.hpp"

namespace tvss {

using nlohmann::json;

SolverConfig benchmark_solver_config() {
  SolverConfig cfg;
  cfg.mu0 = 1.0;
  cfg.kappa = std::pow(2e-5, 1.0 / 2000.0);
  cfg.max_iters = 2000;
  return cfg;
}

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const char* section) {
  if (!j.is_object()) throw std::invalid_argument(std::string(section) + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in " + section);
    }
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

}  // namespace

void from_json(const json& j, TwoClusterConfig& cfg) {
  reject_unknown(j, {"cluster_size", "clusters", "degree_cap", "gate_edges", "label_fraction", "weight", "seed"},
                 "generator config");
  read_opt(j, "cluster_size", cfg.cluster_size);
  read_opt(j, "clusters", cfg.clusters);
  read_opt(j, "degree_cap", cfg.degree_cap);
  read_opt(j, "gate_edges", cfg.gate_edges);
  read_opt(j, "label_fraction", cfg.label_fraction);
  read_opt(j, "weight", cfg.weight);
  read_opt(j, "seed", cfg.seed);
}

void to_json(json& j, const TwoClusterConfig& cfg) {
  j = json{{"cluster_size", cfg.cluster_size}, {"clusters", cfg.clusters},       {"degree_cap", cfg.degree_cap},
           {"gate_edges", cfg.gate_edges},     {"label_fraction", cfg.label_fraction}, {"weight", cfg.weight},
           {"seed", cfg.seed}};
}

void from_json(const json& j, SolverConfig& cfg) {
  reject_unknown(j, {"epsilon", "mu0", "kappa", "max_iters", "lipschitz_mode", "stop", "accumulation",
                     "rel_objective_threshold"},
                 "solver config");
  read_opt(j, "epsilon", cfg.epsilon);
  read_opt(j, "mu0", cfg.mu0);
  read_opt(j, "kappa", cfg.kappa);
  read_opt(j, "max_iters", cfg.max_iters);
  if (j.contains("lipschitz_mode")) cfg.lipschitz_mode = parse_lipschitz_mode(j.at("lipschitz_mode").get<std::string>());
  if (j.contains("stop")) cfg.stop = parse_stop_rule(j.at("stop").get<std::string>());
  if (j.contains("accumulation")) cfg.accumulation = parse_accumulation(j.at("accumulation").get<std::string>());
  read_opt(j, "rel_objective_threshold", cfg.rel_objective_threshold);
}

void to_json(json& j, const SolverConfig& cfg) {
  j = json{{"epsilon", cfg.epsilon},
           {"mu0", cfg.mu0},
           {"kappa", cfg.kappa},
           {"max_iters", cfg.max_iters},
           {"lipschitz_mode", std::string(to_string(cfg.lipschitz_mode))},
           {"stop", std::string(to_string(cfg.stop))},
           {"accumulation", std::string(to_string(cfg.accumulation))},
           {"rel_objective_threshold", cfg.rel_objective_threshold}};
}

namespace mp {

void from_json(const json& j, SimConfig& cfg) {
  reject_unknown(j,
                 {"consensus_rounds", "partitions", "mu", "epsilon", "max_iters", "lipschitz_mode", "residual_mode",
                  "consensus", "seed"},
                 "sim config");
  read_opt(j, "consensus_rounds", cfg.consensus_rounds);
  read_opt(j, "partitions", cfg.partitions);
  read_opt(j, "mu", cfg.mu);
  read_opt(j, "epsilon", cfg.epsilon);
  read_opt(j, "max_iters", cfg.max_iters);
  if (j.contains("lipschitz_mode")) cfg.lipschitz_mode = parse_lipschitz_mode(j.at("lipschitz_mode").get<std::string>());
  if (j.contains("residual_mode")) cfg.residual_mode = parse_residual_mode(j.at("residual_mode").get<std::string>());
  if (j.contains("consensus")) cfg.consensus = parse_consensus_mode(j.at("consensus").get<std::string>());
  read_opt(j, "seed", cfg.seed);
}

void to_json(json& j, const SimConfig& cfg) {
  j = json{{"consensus_rounds", cfg.consensus_rounds},
           {"partitions", cfg.partitions},
           {"mu", cfg.mu},
           {"epsilon", cfg.epsilon},
           {"max_iters", cfg.max_iters},
           {"lipschitz_mode", std::string(to_string(cfg.lipschitz_mode))},
           {"residual_mode", std::string(to_string(cfg.residual_mode))},
           {"consensus", std::string(to_string(cfg.consensus))},
           {"seed", cfg.seed}};
}

}  // namespace mp

void from_json(const json& j, ExperimentConfig& cfg) {
  reject_unknown(j,
                 {"generator", "solver", "epsilon_relative", "sim", "lp_iters", "monte_carlo_runs", "seed",
                  "output_dir", "threads"},
                 "experiment config");
  read_opt(j, "generator", cfg.generator);
  read_opt(j, "solver", cfg.solver);
  if (auto it = j.find("epsilon_relative"); it != j.end()) {
    cfg.epsilon_relative = it->is_null() ? std::nullopt : std::optional<double>(it->get<double>());
  }
  if (auto it = j.find("sim"); it != j.end()) {
    if (it->is_null()) {
      cfg.sim.reset();
    } else {
      mp::SimConfig sim;
      it->get_to(sim);
      cfg.sim = sim;
    }
  }
  read_opt(j, "lp_iters", cfg.lp_iters);
  read_opt(j, "monte_carlo_runs", cfg.monte_carlo_runs);
  read_opt(j, "seed", cfg.seed);
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  read_opt(j, "threads", cfg.threads);
}

void to_json(json& j, const ExperimentConfig& cfg) {
  j = json{{"generator", cfg.generator},
           {"solver", cfg.solver},
           {"epsilon_relative", cfg.epsilon_relative ? json(*cfg.epsilon_relative) : json(nullptr)},
           {"sim", cfg.sim ? json(*cfg.sim) : json(nullptr)},
           {"lp_iters", cfg.lp_iters},
           {"monte_carlo_runs", cfg.monte_carlo_runs},
           {"seed", cfg.seed},
           {"output_dir", cfg.output_dir.string()},
           {"threads", cfg.threads}};
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.generator);
  validate(cfg.solver);
  if (cfg.monte_carlo_runs == 0) throw std::invalid_argument("monte_carlo_runs must be >= 1");
  if (cfg.solver.stop != StopRule::fixed_iters) {
    throw std::invalid_argument("compare runs every method for the same fixed iteration count; use stop=fixed_iters");
  }
  if (cfg.lp_iters != 0 && cfg.lp_iters != cfg.solver.max_iters) {
    throw std::invalid_argument("lp_iters must equal solver.max_iters");
  }
  if (cfg.epsilon_relative && !(*cfg.epsilon_relative >= 0.0)) {
    throw std::invalid_argument("epsilon_relative must be >= 0");
  }
  if (cfg.sim) {
    mp::validate(*cfg.sim);
    if (cfg.sim->max_iters != cfg.solver.max_iters) {
      throw std::invalid_argument("sim.max_iters must equal solver.max_iters");
    }
  }
}

std::size_t worker_threads(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("TVSS_THREADS"); env && *env) {
      n = static_cast<std::size_t>(std::strtoull(env, nullptr, 10));
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

namespace {

struct RunOutcome {
  bool ok{false};
  std::string error;
  std::vector<double> nest;
  std::vector<double> lp;
  std::vector<double> sim;
  double t_nest{0.0};
  double t_lp{0.0};
  double t_sim{0.0};
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double l2_norm(const GraphSignal& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

RunOutcome run_once(const ExperimentConfig& cfg, std::size_t run) {
  RunOutcome out;
  try {
    TwoClusterConfig gen = cfg.generator;
    gen.seed = derive_seed(cfg.seed, run);
    const ClusterInstance inst = generate_two_cluster(gen);
    const GraphSignal x0(inst.graph.node_count(), 0.0);

    SolverConfig solver = cfg.solver;
    if (cfg.epsilon_relative) solver.epsilon = *cfg.epsilon_relative * l2_norm(inst.truth);

    auto t0 = std::chrono::steady_clock::now();
    const SolveResult nest = solve(inst.graph, inst.labels, solver, x0, &inst.truth);
    out.t_nest = seconds_since(t0);
    if (nest.status == SolveStatus::diverged) throw SolverError("solver diverged");
    for (const auto& r : nest.trace) out.nest.push_back(*r.nmse);

    t0 = std::chrono::steady_clock::now();
    const PropagationResult lp = label_propagation(inst.graph, inst.labels, solver.max_iters, x0, &inst.truth);
    out.t_lp = seconds_since(t0);
    for (const auto& r : lp.trace) out.lp.push_back(*r.nmse);

    if (cfg.sim) {
      mp::SimConfig sim = *cfg.sim;
      sim.epsilon = solver.epsilon;
      t0 = std::chrono::steady_clock::now();
      mp::Simulator simulator(inst.graph, inst.labels, sim, x0, &inst.truth);
      for (const auto& s : simulator.run()) out.sim.push_back(*s.nmse);
      out.t_sim = seconds_since(t0);
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = "run " + std::to_string(run) + ": " + e.what();
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

CompareResult compare(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t runs = cfg.monte_carlo_runs;
  std::vector<RunOutcome> outcomes(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < runs; r = next++) outcomes[r] = run_once(cfg, r);
  };
  const std::size_t n_threads = worker_threads(cfg.threads, runs);
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  CompareResult result;
  RunSummary& s = result.summary;
  const std::size_t iters = cfg.solver.max_iters;
  result.curve_nest.assign(iters, 0.0);
  result.curve_lp.assign(iters, 0.0);
  if (cfg.sim) result.curve_sim.assign(iters, 0.0);

  for (const RunOutcome& o : outcomes) {
    if (!o.ok) {
      s.errors.push_back(o.error);
      continue;
    }
    ++s.runs_ok;
    s.per_run_nest.push_back(o.nest.back());
    s.per_run_lp.push_back(o.lp.back());
    s.wall_time_nest += o.t_nest;
    s.wall_time_lp += o.t_lp;
    for (std::size_t k = 0; k < iters; ++k) {
      result.curve_nest[k] += o.nest[k];
      result.curve_lp[k] += o.lp[k];
    }
    if (cfg.sim) {
      s.per_run_sim.push_back(o.sim.back());
      s.wall_time_sim += o.t_sim;
      for (std::size_t k = 0; k < iters; ++k) result.curve_sim[k] += o.sim[k];
    }
  }
  if (s.runs_ok == 0) {
    throw std::runtime_error("every Monte-Carlo run failed; first error: " + s.errors.front());
  }
  const double denom = static_cast<double>(s.runs_ok);
  for (auto* curve : {&result.curve_nest, &result.curve_lp, &result.curve_sim}) {
    for (double& v : *curve) v /= denom;
  }
  s.nmse_nest = mean(s.per_run_nest);
  s.nmse_lp = mean(s.per_run_lp);
  if (cfg.sim) s.nmse_sim = mean(s.per_run_sim);
  return result;
}

json summary_json(const CompareResult& result, const ExperimentConfig& cfg) {
  const RunSummary& s = result.summary;
  // Thread count and output location do not affect results; leaving them out
  // keeps the summary identical across invocations.
  json config = cfg;
  config.erase("threads");
  config.erase("output_dir");
  json j{{"config", config},
         {"runs_ok", s.runs_ok},
         {"partial", !s.errors.empty()},
         {"errors", s.errors},
         {"nmse_nest", s.nmse_nest},
         {"nmse_lp", s.nmse_lp},
         {"per_run_nest", s.per_run_nest},
         {"per_run_lp", s.per_run_lp}};
  if (s.nmse_sim) {
    j["nmse_sim"] = *s.nmse_sim;
    j["per_run_sim"] = s.per_run_sim;
  }
  return j;
}

void write_compare_outputs(const CompareResult& result, const ExperimentConfig& cfg,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "curves.csv", std::ios::binary);
    out << "k,nmse_nest,nmse_lp";
    if (!result.curve_sim.empty()) out << ",nmse_sim";
    out << '\n';
    for (std::size_t k = 0; k < result.curve_nest.size(); ++k) {
      out << k << ',' << io::format_double(result.curve_nest[k]) << ',' << io::format_double(result.curve_lp[k]);
      if (!result.curve_sim.empty()) out << ',' << io::format_double(result.curve_sim[k]);
      out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing curves.csv");
  }
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << summary_json(result, cfg).dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing summary.json");
  }
  {
    // Wall times vary between invocations, so they are kept out of summary.json.
    const RunSummary& s = result.summary;
    json timing{{"wall_time_nest", s.wall_time_nest}, {"wall_time_lp", s.wall_time_lp}};
    if (s.nmse_sim) timing["wall_time_sim"] = s.wall_time_sim;
    std::ofstream out(dir / "timing.json", std::ios::binary);
    out << timing.dump(2) << '\n';
  }
}

}  // namespace tvss
