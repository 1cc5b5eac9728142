#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvss/generator.hpp"
#include "tvss/mp_sim.hpp"
#include "tvss/solver.hpp"

namespace tvss {

/// mu0 = 1, kappa = (2e-5)^(1/2000), 2000 iterations: the annealed benchmark setting.
SolverConfig benchmark_solver_config();

struct ExperimentConfig {
  TwoClusterConfig generator;
  SolverConfig solver{benchmark_solver_config()};
  /// When set, every run uses eps = epsilon_relative * ||ground truth||_2
  /// instead of solver.epsilon.
  std::optional<double> epsilon_relative{1e-5};
  std::optional<mp::SimConfig> sim;
  /// 0 means "same as solver.max_iters"; any other value must match it.
  std::size_t lp_iters{0};
  std::size_t monte_carlo_runs{100};
  std::uint64_t seed{0};
  std::filesystem::path output_dir{"out"};
  /// 0 means: TVSS_THREADS if set, otherwise hardware concurrency.
  std::size_t threads{0};
};

/// Throws std::invalid_argument for inconsistent settings (iteration parity,
/// rel_objective stopping, zero runs).
void validate(const ExperimentConfig& cfg);

struct RunSummary {
  double nmse_nest{0.0};
  double nmse_lp{0.0};
  std::optional<double> nmse_sim;
  std::vector<double> per_run_nest;
  std::vector<double> per_run_lp;
  std::vector<double> per_run_sim;
  double wall_time_nest{0.0};
  double wall_time_lp{0.0};
  double wall_time_sim{0.0};
  std::size_t runs_ok{0};
  /// One message per failed run; non-empty means the averages are partial.
  std::vector<std::string> errors;
};

struct CompareResult {
  RunSummary summary;
  /// Mean NMSE after iteration k (index k) across successful runs.
  std::vector<double> curve_nest;
  std::vector<double> curve_lp;
  std::vector<double> curve_sim;
};

/// Runs the Monte-Carlo comparison. Runs execute on a thread pool; results
/// are aggregated in run order, so the output is independent of scheduling.
CompareResult compare(const ExperimentConfig& cfg);

/// Writes curves.csv, summary.json and timing.json into `dir`.
void write_compare_outputs(const CompareResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir);

nlohmann::json summary_json(const CompareResult& result, const ExperimentConfig& cfg);

/// Resolves the worker count: `requested`, else TVSS_THREADS, else hardware concurrency.
std::size_t worker_threads(std::size_t requested, std::size_t jobs);

// JSON mapping. Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TwoClusterConfig& cfg);
void to_json(nlohmann::json& j, const TwoClusterConfig& cfg);
void from_json(const nlohmann::json& j, SolverConfig& cfg);
void to_json(nlohmann::json& j, const SolverConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);
void to_json(nlohmann::json& j, const ExperimentConfig& cfg);

namespace mp {
void from_json(const nlohmann::json& j, SimConfig& cfg);
void to_json(nlohmann::json& j, const SimConfig& cfg);
}  // namespace mp

nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace tvss
