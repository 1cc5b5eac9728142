#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tvss/calculus.hpp"
#include "tvss/graph.hpp"
#include "tvss/random.hpp"
#include "tvss/solver.hpp"

namespace testing {

using tvss::Edge;
using tvss::EmpiricalGraph;
using tvss::GraphSignal;
using tvss::LabelSet;
using tvss::NodeIndex;
using tvss::Rng;

inline EmpiricalGraph make_graph(std::size_t n, std::vector<Edge> edges) { return EmpiricalGraph(n, edges); }

inline EmpiricalGraph single_edge(double w = 1.0) { return make_graph(2, {{0, 1, w}}); }

inline EmpiricalGraph path_graph(std::size_t n, double w = 1.0) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({NodeIndex(i), NodeIndex(i + 1), w});
  return make_graph(n, e);
}

/// Random spanning tree plus extra random edges; weights in [0.1, 3).
inline EmpiricalGraph random_connected_graph(Rng& rng, std::size_t n, double extra_density = 0.15,
                                             bool unit_weights = false) {
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  std::vector<Edge> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    const std::pair<NodeIndex, NodeIndex> key{NodeIndex(std::min(a, b)), NodeIndex(std::max(a, b))};
    if (!seen.insert(key).second) return;
    const double w = unit_weights ? 1.0 : 0.1 + 2.9 * rng.uniform();
    edges.push_back({key.first, key.second, w});
  };
  for (std::size_t i = 1; i < n; ++i) add(i, rng.index(i));
  const std::size_t extra = static_cast<std::size_t>(extra_density * n * (n - 1) / 2);
  for (std::size_t t = 0; t < extra; ++t) add(rng.index(n), rng.index(n));
  return make_graph(n, edges);
}

inline GraphSignal random_signal(Rng& rng, std::size_t n, double scale = 1.0) {
  GraphSignal x(n);
  for (double& v : x) v = scale * rng.normal();
  return x;
}

inline tvss::EdgeField random_field(Rng& rng, const EmpiricalGraph& g) {
  tvss::EdgeField p(g);
  for (std::size_t s = 0; s < g.slot_count(); ++s) p[s] = rng.normal();
  return p;
}

inline LabelSet random_labels(Rng& rng, std::size_t n, std::size_t m, double scale = 1.0) {
  std::vector<NodeIndex> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = NodeIndex(i);
  std::vector<LabelSet::Entry> entries;
  for (std::size_t t = 0; t < m; ++t) {
    std::swap(order[t], order[t + rng.index(n - t)]);
    entries.push_back({order[t], scale * rng.normal()});
  }
  return LabelSet(n, entries);
}

inline double dot(const GraphSignal& a, const GraphSignal& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const GraphSignal& a) { return std::sqrt(dot(a, a)); }

inline double max_abs_diff(const GraphSignal& a, const GraphSignal& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// ---------------------------------------------------------------------------
// Oracles. None of them calls the code under test for the quantity checked.

/// Dense matrix of x -> -div(grad x), built entry by entry from the edge list.
inline Eigen::MatrixXd dense_gradient_gram(const EmpiricalGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    // Each undirected edge contributes sqrt(w)(x_j - x_i) twice (once per row).
    a(e.u, e.u) += 2 * e.weight;
    a(e.v, e.v) += 2 * e.weight;
    a(e.u, e.v) -= 2 * e.weight;
    a(e.v, e.u) -= 2 * e.weight;
  }
  return a;
}

/// ||grad||_op from a dense symmetric eigen-decomposition.
inline double dense_operator_norm(const EmpiricalGraph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_gradient_gram(g), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// max over ||p|| <= 1 of <p, a> - mu/2 ||p||^2 by projected gradient ascent.
inline double ball_max_numeric(const std::vector<double>& a, double mu) {
  std::vector<double> p(a.size(), 0.0);
  const double step = 0.5 / mu;
  for (int it = 0; it < 400; ++it) {
    double nrm = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] += step * (a[j] - mu * p[j]);
      nrm += p[j] * p[j];
    }
    nrm = std::sqrt(nrm);
    if (nrm > 1.0) {
      for (double& v : p) v /= nrm;
    }
  }
  double val = 0.0, pp = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    val += p[j] * a[j];
    pp += p[j] * p[j];
  }
  return val - 0.5 * mu * pp;
}

/// Local gradients straight from the edge list, independent of graph_gradient.
inline std::vector<std::vector<double>> local_gradients(const EmpiricalGraph& g, const GraphSignal& x) {
  std::vector<std::vector<double>> rows(g.node_count());
  for (const Edge& e : g.edges()) {
    const double d = std::sqrt(e.weight) * (x[e.v] - x[e.u]);
    rows[e.u].push_back(d);
    rows[e.v].push_back(-d);
  }
  return rows;
}

/// Smoothed objective as a sum of numeric per-node ball maximizations.
inline double smoothed_objective_numeric(const EmpiricalGraph& g, const GraphSignal& x, double mu) {
  double total = 0.0;
  for (const auto& row : local_gradients(g, x)) total += ball_max_numeric(row, mu);
  return total;
}

inline GraphSignal central_difference(const EmpiricalGraph& g, const GraphSignal& x, double mu, double h) {
  GraphSignal out(x.size());
  GraphSignal y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] + h;
    const double fp = tvss::smoothed_objective(g, y, mu);
    y[i] = x[i] - h;
    const double fm = tvss::smoothed_objective(g, y, mu);
    y[i] = x[i];
    out[i] = (fp - fm) / (2 * h);
  }
  return out;
}

/// Projection onto {emp_err <= eps} via bisection on the multiplier of
/// v = argmin ||v - q||^2 + lambda * sum_S (v_i - y_i)^2 (as a KKT system).
struct KktProjection {
  GraphSignal v;
  double lambda;
};

inline KktProjection kkt_projection_bisection(const GraphSignal& q, const LabelSet& labels, double eps) {
  const double m = static_cast<double>(labels.size());
  auto apply = [&](double lambda) {
    GraphSignal v = q;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const auto i = labels.nodes()[t];
      v[i] = (q[i] + lambda * labels.values()[t]) / (1.0 + lambda);
    }
    return v;
  };
  auto err = [&](const GraphSignal& v) {
    double s = 0.0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const double d = v[labels.nodes()[t]] - labels.values()[t];
      s += d * d;
    }
    return std::sqrt(s / (2.0 * m));
  };
  if (err(q) <= eps) return {q, 0.0};
  double lo = 0.0, hi = 1.0;
  while (err(apply(hi)) > eps) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (err(apply(mid)) > eps ? lo : hi) = mid;
  }
  return {apply(hi), hi};
}

}  // namespace testing
