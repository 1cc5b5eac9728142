#include "tvss/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tvss/io.hpp"
#include "tvss/random.hpp"

namespace tvss {

EdgeField graph_gradient(const EmpiricalGraph& g, std::span<const double> x) {
  check_signal(g, x);
  EdgeField out(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s) {
      out[s] = g.slot_sqrt_weight(s) * (x[g.slot_target(s)] - x[i]);
    }
  }
  return out;
}

GraphSignal divergence(const EmpiricalGraph& g, const EdgeField& p) {
  if (!p.supported_on(g)) {
    throw GraphError("edge field is not supported on the graph's edge set");
  }
  GraphSignal out(g.node_count(), 0.0);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double acc = 0.0;
    for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s) {
      // W is symmetric, so sqrt(W_ji) is the same stored value.
      acc += g.slot_sqrt_weight(s) * (p[s] - p[g.reverse_slot(s)]);
    }
    out[i] = acc;
  }
  return out;
}

double local_variation(const EmpiricalGraph& g, std::span<const double> x, std::size_t i) {
  double sq = 0.0;
  for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s) {
    const double d = x[g.slot_target(s)] - x[i];
    sq += g.slot_weight(s) * d * d;
  }
  return std::sqrt(sq);
}

double total_variation(const EmpiricalGraph& g, std::span<const double> x) {
  check_signal(g, x);
  double tv = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    tv += local_variation(g, x, i);
  }
  return tv;
}

double frobenius_inner(const EdgeField& a, const EdgeField& b) {
  if (a.size() != b.size()) {
    throw GraphError("edge fields live on different graphs");
  }
  double acc = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    acc += a[s] * b[s];
  }
  return acc;
}

QuadraticCheck laplacian_quadratic_check(const EmpiricalGraph& g, std::span<const double> x) {
  check_signal(g, x);
  QuadraticCheck out{0.0, 0.0};
  const EdgeField grad = graph_gradient(g, x);
  out.gradient_energy = frobenius_inner(grad, grad);

  // x^T D x - x^T W x, assembled from the matrices rather than the edge sum.
  double dx = 0.0;
  double wx = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    dx += weighted_degree(g, i) * x[i] * x[i];
    for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s) {
      wx += x[i] * g.slot_weight(s) * x[g.slot_target(s)];
    }
  }
  out.laplacian_form = dx - wx;
  return out;
}

NormEstimate operator_norm_estimate(const EmpiricalGraph& g, double tol, std::uint64_t seed, std::size_t max_iters) {
  if (g.edge_count() == 0) {
    throw GraphError("operator norm of the gradient is undefined for a graph without edges");
  }
  if (!(tol > 0.0)) {
    throw GraphError("tolerance must be positive");
  }
  Rng rng(seed);
  GraphSignal x(g.node_count());
  for (double& v : x) v = rng.uniform() - 0.5;

  auto normalize = [](GraphSignal& v) {
    double n = 0.0;
    for (double a : v) n += a * a;
    n = std::sqrt(n);
    for (double& a : v) a /= n;
    return n;
  };
  normalize(x);

  NormEstimate est;
  double previous = 0.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    GraphSignal y = divergence(g, graph_gradient(g, x));
    for (double& v : y) v = -v;
    // Rayleigh quotient of the unit vector x.
    double rq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rq += x[i] * y[i];
    est.value = std::sqrt(std::max(rq, 0.0));
    est.iterations = it;
    if (it > 1 && std::abs(rq - previous) <= tol * rq) {
      est.converged = true;
      break;
    }
    previous = rq;
    if (normalize(y) == 0.0) {
      // Start vector was constant on every component; nothing to amplify.
      break;
    }
    x = std::move(y);
  }
  return est;
}

void write_edge_field(std::ostream& out, const EmpiricalGraph& g, const EdgeField& p) {
  for (std::size_t s = 0; s < g.slot_count(); ++s) {
    out << (g.slot_source(s) + 1) << '\t' << (g.slot_target(s) + 1) << '\t' << io::format_double(p[s]) << '\n';
  }
}

}  // namespace tvss
