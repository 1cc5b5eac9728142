#include "tvss/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "tvss/io.hpp"

namespace tvss {

std::string_view to_string(LipschitzMode mode) {
  return mode == LipschitzMode::paper ? "paper" : "corrected";
}

LipschitzMode parse_lipschitz_mode(std::string_view text) {
  if (text == "paper") return LipschitzMode::paper;
  if (text == "corrected") return LipschitzMode::corrected;
  throw SolverError("unknown lipschitz mode '" + std::string(text) + "' (expected paper|corrected)");
}

std::string_view to_string(StopRule rule) {
  return rule == StopRule::fixed_iters ? "fixed_iters" : "rel_objective";
}

StopRule parse_stop_rule(std::string_view text) {
  if (text == "fixed_iters") return StopRule::fixed_iters;
  if (text == "rel_objective") return StopRule::rel_objective;
  throw SolverError("unknown stop rule '" + std::string(text) + "' (expected fixed_iters|rel_objective)");
}

std::string_view to_string(Accumulation mode) {
  return mode == Accumulation::literal ? "literal" : "step_weighted";
}

Accumulation parse_accumulation(std::string_view text) {
  if (text == "literal") return Accumulation::literal;
  if (text == "step_weighted") return Accumulation::step_weighted;
  throw SolverError("unknown accumulation '" + std::string(text) + "' (expected literal|step_weighted)");
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon)) throw SolverError("epsilon must be >= 0");
  if (!(cfg.mu0 > 0.0) || !std::isfinite(cfg.mu0)) throw SolverError("mu0 must be > 0");
  if (!(cfg.kappa > 0.0 && cfg.kappa <= 1.0)) throw SolverError("kappa must lie in (0, 1]");
  if (cfg.max_iters == 0) throw SolverError("max_iters must be positive");
  if (cfg.stop == StopRule::rel_objective && !(cfg.rel_objective_threshold > 0.0)) {
    throw SolverError("rel_objective threshold must be positive");
  }
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  out << "k,mu,f_mu,tv,emp_err,lambda_eps,nmse\n";
  for (const TraceRecord& r : trace) {
    out << r.k << ',' << io::format_double(r.mu) << ',' << io::format_double(r.f_mu) << ','
        << io::format_double(r.tv) << ',' << io::format_double(r.emp_err) << ','
        << io::format_double(r.lambda_eps) << ',';
    if (r.nmse) out << io::format_double(*r.nmse);
    out << '\n';
  }
}

double empirical_error(std::span<const double> x, const LabelSet& labels) {
  if (labels.size() == 0) throw SolverError("empirical error needs a non-empty sampling set");
  if (x.size() != labels.node_count()) throw SolverError("signal length does not match the label set");
  double sq = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double d = x[labels.nodes()[k]] - labels.values()[k];
    sq += d * d;
  }
  return std::sqrt(sq / (2.0 * static_cast<double>(labels.size())));
}

EdgeField dual_field(const EmpiricalGraph& g, std::span<const double> x, double mu) {
  if (!(mu > 0.0)) throw SolverError("smoothing parameter must be positive");
  EdgeField p = graph_gradient(g, x);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    auto row = p.row(g, i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const double scale = std::max(mu, std::sqrt(sq));
    for (double& v : row) v /= scale;
  }
  return p;
}

double smoothed_objective(const EmpiricalGraph& g, std::span<const double> x, double mu) {
  if (!(mu > 0.0)) throw SolverError("smoothing parameter must be positive");
  check_signal(g, x);
  double f = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double a = local_variation(g, x, i);
    f += a >= mu ? a - 0.5 * mu : a * a / (2.0 * mu);
  }
  return f;
}

GraphSignal smoothed_gradient(const EmpiricalGraph& g, std::span<const double> x, double mu) {
  GraphSignal grad = divergence(g, dual_field(g, x, mu));
  for (double& v : grad) v = -v;
  return grad;
}

double squared_operator_norm_bound(double d_max, LipschitzMode mode) {
  return (mode == LipschitzMode::paper ? 2.0 : 4.0) * d_max;
}

double lipschitz_constant(double d_max, double mu, LipschitzMode mode) {
  if (!(d_max > 0.0)) throw SolverError("maximum degree must be positive");
  if (!(mu > 0.0)) throw SolverError("smoothing parameter must be positive");
  return squared_operator_norm_bound(d_max, mode) / mu;
}

Projection project_feasible(std::span<const double> q, const LabelSet& labels, double eps) {
  if (!(eps >= 0.0)) throw SolverError("epsilon must be >= 0");
  Projection out{GraphSignal(q.begin(), q.end()), 0.0};
  const double r = empirical_error(q, labels);
  if (r <= eps) {
    return out;
  }
  if (eps == 0.0) {
    for (std::size_t k = 0; k < labels.size(); ++k) out.v[labels.nodes()[k]] = labels.values()[k];
    out.lambda_eps = std::numeric_limits<double>::infinity();
    return out;
  }
  const double shrink = eps / r;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const std::size_t i = labels.nodes()[k];
    const double y = labels.values()[k];
    out.v[i] = y + shrink * (q[i] - y);
  }
  out.lambda_eps = r / eps - 1.0;
  return out;
}

namespace {

bool all_finite(const GraphSignal& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

SolveResult solve(const EmpiricalGraph& g, const LabelSet& labels, const SolverConfig& cfg,
                  std::span<const double> x0, const GraphSignal* truth, const IterateObserver& observer) {
  validate(cfg);
  check_signal(g, x0, "initial guess");
  if (labels.node_count() != g.node_count()) throw SolverError("label set does not match the graph");
  if (truth) check_signal(g, *truth, "ground truth");
  if (!is_connected(g)) throw SolverError("graph must be connected");
  const double d_max = max_degree(g);

  const std::size_t n = g.node_count();
  SolverState st;
  st.x0.assign(x0.begin(), x0.end());
  st.x = st.x0;
  st.v = st.x0;
  st.z = st.x0;
  st.g_accum.assign(n, 0.0);
  if (cfg.accumulation == Accumulation::step_weighted) st.z_shift.assign(n, 0.0);
  st.alpha = 0.5;

  SolveResult result;
  result.v = st.x0;
  result.trace.reserve(cfg.max_iters);
  GraphSignal q(n);
  double previous_f = 0.0;

  for (std::size_t k = 0; k < cfg.max_iters; ++k) {
    const double mu = cfg.mu0 * std::pow(cfg.kappa, static_cast<double>(k));
    const double lip = lipschitz_constant(d_max, mu, cfg.lipschitz_mode);
    const GraphSignal grad = smoothed_gradient(g, st.x, mu);

    for (std::size_t i = 0; i < n; ++i) q[i] = st.x[i] - grad[i] / lip;
    Projection step = project_feasible(q, labels, cfg.epsilon);

    for (std::size_t i = 0; i < n; ++i) {
      st.g_accum[i] += st.alpha * grad[i];
      if (cfg.accumulation == Accumulation::literal) {
        q[i] = st.x0[i] - st.g_accum[i] / lip;
      } else {
        st.z_shift[i] += st.alpha * grad[i] / lip;
        q[i] = st.x0[i] - st.z_shift[i];
      }
    }
    Projection aggregate = project_feasible(q, labels, cfg.epsilon);

    const double tau = 2.0 / (static_cast<double>(k) + 3.0);
    st.v = std::move(step.v);
    st.z = std::move(aggregate.v);
    for (std::size_t i = 0; i < n; ++i) st.x[i] = st.v[i] + tau * (st.z[i] - st.v[i]);
    st.alpha += 0.5;
    st.k = k + 1;

    if (!all_finite(st.v) || !all_finite(st.z) || !all_finite(st.x)) {
      result.status = SolveStatus::diverged;
      return result;
    }

    TraceRecord rec;
    rec.k = k;
    rec.mu = mu;
    rec.f_mu = smoothed_objective(g, st.v, mu);
    rec.tv = total_variation(g, st.v);
    rec.emp_err = empirical_error(st.v, labels);
    rec.lambda_eps = step.lambda_eps;
    if (truth) rec.nmse = nmse(st.v, *truth);
    result.trace.push_back(rec);
    result.v = st.v;
    if (observer) observer(st);

    if (cfg.stop == StopRule::rel_objective && k > 0 &&
        std::abs(rec.f_mu - previous_f) <= cfg.rel_objective_threshold * std::abs(previous_f)) {
      result.status = SolveStatus::converged;
      return result;
    }
    previous_f = rec.f_mu;
  }
  return result;
}

IterationBound iteration_bound(double delta, double radius, double d_max, std::size_t node_count,
                               LipschitzMode mode) {
  if (!(delta > 0.0)) throw SolverError("accuracy delta must be positive");
  if (!(radius >= 0.0)) throw SolverError("radius must be non-negative");
  if (node_count == 0) throw SolverError("node count must be positive");
  // Smooth part is identically zero (L = 0); D = max ||P||_F^2 = N.
  const double smooth_lipschitz = 0.0;
  const double diameter_bound = static_cast<double>(node_count);
  const double op_sq = squared_operator_norm_bound(d_max, mode);
  IterationBound out;
  out.iterations = (2.0 / delta) * radius * std::sqrt(smooth_lipschitz * delta + diameter_bound * op_sq);
  out.mu = delta / diameter_bound;
  return out;
}

}  // namespace tvss
