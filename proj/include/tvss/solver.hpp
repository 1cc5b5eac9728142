#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvss/calculus.hpp"
#include "tvss/graph.hpp"

namespace tvss {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which bound on ||grad||_op^2 feeds the step size: 2 d_max (`paper` mode) or 4 d_max (`corrected`).
enum class LipschitzMode { paper, corrected };

enum class StopRule { fixed_iters, rel_objective };

/// How z_k weighs past gradients when mu changes between iterations.
/// literal: z_k = P(x0 - (sum_l alpha_l g_l) / L_k), every gradient scaled by the current L.
/// step_weighted: z_k = P(x0 - sum_l alpha_l g_l / L_l), each gradient scaled by its own L.
/// Both coincide when kappa == 1.
enum class Accumulation { literal, step_weighted };

std::string_view to_string(LipschitzMode mode);
LipschitzMode parse_lipschitz_mode(std::string_view text);
std::string_view to_string(StopRule rule);
StopRule parse_stop_rule(std::string_view text);
std::string_view to_string(Accumulation mode);
Accumulation parse_accumulation(std::string_view text);

struct SolverConfig {
  double epsilon{0.0};
  double mu0{1.0};
  /// mu_k = mu0 * kappa^k; kappa == 1 keeps the smoothing fixed.
  double kappa{1.0};
  std::size_t max_iters{1000};
  LipschitzMode lipschitz_mode{LipschitzMode::corrected};
  StopRule stop{StopRule::fixed_iters};
  Accumulation accumulation{Accumulation::step_weighted};
  /// Used by StopRule::rel_objective: stop once |f_k - f_{k-1}| <= threshold * |f_{k-1}|.
  double rel_objective_threshold{1e-9};
};

/// Throws SolverError on epsilon < 0, mu0 <= 0, kappa outside (0,1] or max_iters == 0.
void validate(const SolverConfig& cfg);

struct TraceRecord {
  std::size_t k{0};
  double mu{0.0};
  double f_mu{0.0};
  double tv{0.0};
  double emp_err{0.0};
  /// max{0, r/eps - 1} of the projection that produced v_k; +inf when eps == 0 and r > 0.
  double lambda_eps{0.0};
  std::optional<double> nmse;
};

using SolverTrace = std::vector<TraceRecord>;

/// Header `k,mu,f_mu,tv,emp_err,lambda_eps,nmse`; nmse is left empty when unknown.
void write_trace_csv(std::ostream& out, const SolverTrace& trace);

struct SolverState {
  std::size_t k{0};  ///< completed iterations
  GraphSignal x;     ///< next point x_{k}
  GraphSignal v;     ///< projected gradient step v_{k-1}
  GraphSignal z;     ///< aggregated-gradient minimizer z_{k-1}
  GraphSignal g_accum;  ///< sum_l alpha_l g_l
  GraphSignal z_shift;  ///< sum_l alpha_l g_l / L_l (step_weighted only)
  GraphSignal x0;
  double alpha{0.5};
};

enum class SolveStatus { completed, converged, diverged };

struct SolveResult {
  GraphSignal v;
  SolverTrace trace;
  SolveStatus status{SolveStatus::completed};
};

/// sqrt((1/(2M)) sum_{i in S} (x_i - y_i)^2).
double empirical_error(std::span<const double> x, const LabelSet& labels);

/// Rows grad_i x / max{mu, ||grad_i x||}: the maximizer of the smoothed dual problem.
EdgeField dual_field(const EmpiricalGraph& g, std::span<const double> x, double mu);

/// Huber-smoothed total variation sum_i h_mu(||grad_i x||).
double smoothed_objective(const EmpiricalGraph& g, std::span<const double> x, double mu);

/// -div(dual_field(g, x, mu)).
GraphSignal smoothed_gradient(const EmpiricalGraph& g, std::span<const double> x, double mu);

double lipschitz_constant(double d_max, double mu, LipschitzMode mode);

struct Projection {
  GraphSignal v;
  double lambda_eps{0.0};
};

/**
 * Euclidean projection of q onto {x : empirical_error(x) <= eps}. Only the
 * labeled entries move: they are pulled toward y by the factor eps / r where
 * r = empirical_error(q). With eps == 0 they are set to y exactly and
 * lambda_eps is +inf.
 */
Projection project_feasible(std::span<const double> q, const LabelSet& labels, double eps);

using IterateObserver = std::function<void(const SolverState&)>;

/**
 * Nesterov's optimal scheme on the smoothed problem with closed-form
 * projections. kappa == 1 gives the fixed-smoothing method; kappa < 1
 * shrinks mu every iteration. Returns the last projected-gradient iterate.
 *
 * `truth` (optional) fills the trace's nmse column. `observer` is called
 * after every completed iteration.
 */
SolveResult solve(const EmpiricalGraph& g, const LabelSet& labels, const SolverConfig& cfg,
                  std::span<const double> x0, const GraphSignal* truth = nullptr,
                  const IterateObserver& observer = {});

/// Upper bound used for ||grad||_op^2 by `mode`.
double squared_operator_norm_bound(double d_max, LipschitzMode mode);

struct IterationBound {
  double iterations{0.0};
  /// Smoothing level delta / D that achieves accuracy delta.
  double mu{0.0};
};

/// Iterations k_delta after which the smoothed method is delta-accurate on the
/// nonsmooth problem, for a start at distance `radius` from the smoothed optimum.
IterationBound iteration_bound(double delta, double radius, double d_max, std::size_t node_count,
                               LipschitzMode mode = LipschitzMode::corrected);

}  // namespace tvss
