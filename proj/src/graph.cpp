#include "tvss/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace tvss {

EmpiricalGraph::EmpiricalGraph(std::size_t node_count, std::span<const Edge> edges) {
  if (node_count == 0) {
    throw GraphError("graph must have at least one node");
  }
  if (node_count > std::numeric_limits<NodeIndex>::max()) {
    throw GraphError("node count exceeds index range");
  }

  struct Directed {
    NodeIndex from;
    NodeIndex to;
    double weight;
  };
  std::vector<Directed> directed;
  directed.reserve(2 * edges.size());
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw GraphError("edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) +
                       ") references a node outside 1.." + std::to_string(node_count));
    }
    if (e.u == e.v) {
      throw GraphError("self-loop at node " + std::to_string(e.u + 1));
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw GraphError("edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) +
                       ") has non-positive or non-finite weight");
    }
    directed.push_back({e.u, e.v, e.weight});
    directed.push_back({e.v, e.u, e.weight});
  }
  std::sort(directed.begin(), directed.end(), [](const Directed& a, const Directed& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  for (std::size_t s = 1; s < directed.size(); ++s) {
    if (directed[s].from == directed[s - 1].from && directed[s].to == directed[s - 1].to) {
      NodeIndex a = std::min(directed[s].from, directed[s].to);
      NodeIndex b = std::max(directed[s].from, directed[s].to);
      throw GraphError("duplicate edge (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
    }
  }

  offsets_.assign(node_count + 1, 0);
  neighbors_.resize(directed.size());
  sources_.resize(directed.size());
  weights_.resize(directed.size());
  sqrt_weights_.resize(directed.size());
  for (std::size_t s = 0; s < directed.size(); ++s) {
    ++offsets_[directed[s].from + 1];
    neighbors_[s] = directed[s].to;
    sources_[s] = directed[s].from;
    weights_[s] = directed[s].weight;
    sqrt_weights_[s] = std::sqrt(directed[s].weight);
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());

  reverse_.resize(directed.size());
  for (std::size_t s = 0; s < directed.size(); ++s) {
    auto row = neighbors(neighbors_[s]);
    auto it = std::lower_bound(row.begin(), row.end(), sources_[s]);
    reverse_[s] = offsets_[neighbors_[s]] + static_cast<std::size_t>(it - row.begin());
  }
}

std::vector<Edge> EmpiricalGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t s = 0; s < slot_count(); ++s) {
    if (sources_[s] < neighbors_[s]) {
      out.push_back({sources_[s], neighbors_[s], weights_[s]});
    }
  }
  return out;
}

double weighted_degree(const EmpiricalGraph& g, std::size_t i) {
  if (i >= g.node_count()) {
    throw GraphError("node " + std::to_string(i + 1) + " out of range 1.." + std::to_string(g.node_count()));
  }
  double d = 0.0;
  for (double w : g.weights(i)) {
    d += w;
  }
  return d;
}

double max_degree(const EmpiricalGraph& g) {
  double best = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    best = std::max(best, weighted_degree(g, i));
  }
  return best;
}

std::size_t max_combinatorial_degree(const EmpiricalGraph& g) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    best = std::max(best, g.combinatorial_degree(i));
  }
  return best;
}

namespace {

// Hop distances from `source`; unreachable nodes keep SIZE_MAX.
std::vector<std::size_t> bfs_distances(const EmpiricalGraph& g, std::size_t source) {
  std::vector<std::size_t> dist(g.node_count(), std::numeric_limits<std::size_t>::max());
  std::queue<std::size_t> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    std::size_t i = frontier.front();
    frontier.pop();
    for (NodeIndex j : g.neighbors(i)) {
      if (dist[j] == std::numeric_limits<std::size_t>::max()) {
        dist[j] = dist[i] + 1;
        frontier.push(j);
      }
    }
  }
  return dist;
}

}  // namespace

bool is_connected(const EmpiricalGraph& g) {
  if (g.node_count() == 0) {
    return false;
  }
  auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); });
}

std::size_t diameter(const EmpiricalGraph& g) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    for (std::size_t d : bfs_distances(g, i)) {
      if (d == std::numeric_limits<std::size_t>::max()) {
        throw GraphError("diameter is undefined for a disconnected graph");
      }
      best = std::max(best, d);
    }
  }
  return best;
}

LabelSet::LabelSet(std::size_t node_count, std::vector<Entry> entries) {
  if (entries.empty()) {
    throw GraphError("label set must contain at least one node");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.node < b.node; });
  mask_.assign(node_count, 0);
  position_.assign(node_count, 0);
  nodes_.reserve(entries.size());
  values_.reserve(entries.size());
  for (const Entry& e : entries) {
    if (e.node >= node_count) {
      throw GraphError("labeled node " + std::to_string(e.node + 1) + " outside 1.." + std::to_string(node_count));
    }
    if (mask_[e.node]) {
      throw GraphError("node " + std::to_string(e.node + 1) + " labeled twice");
    }
    if (!std::isfinite(e.value)) {
      throw GraphError("label of node " + std::to_string(e.node + 1) + " is not finite");
    }
    mask_[e.node] = 1;
    position_[e.node] = nodes_.size();
    nodes_.push_back(e.node);
    values_.push_back(e.value);
  }
}

void check_signal(const EmpiricalGraph& g, std::span<const double> x, const char* what) {
  if (x.size() != g.node_count()) {
    throw GraphError(std::string(what) + " has length " + std::to_string(x.size()) + ", graph has " +
                     std::to_string(g.node_count()) + " nodes");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw GraphError(std::string(what) + " entry at node " + std::to_string(i + 1) + " is not finite");
    }
  }
}

double nmse(std::span<const double> x, std::span<const double> truth) {
  if (x.size() != truth.size()) {
    throw GraphError("nmse: length mismatch");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - truth[i]) * (x[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  if (den == 0.0) {
    throw GraphError("nmse: ground truth is identically zero");
  }
  return num / den;
}

}  // namespace tvss
