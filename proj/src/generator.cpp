#include "tvss/generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "tvss/random.hpp"

namespace tvss {

void validate(const TwoClusterConfig& cfg) {
  if (cfg.cluster_size == 0) {
    throw GraphError("cluster_size must be positive");
  }
  if (cfg.clusters == 0) {
    throw GraphError("clusters must be positive");
  }
  if (cfg.degree_cap < 2) {
    throw GraphError("degree_cap must be at least 2");
  }
  if (cfg.gate_edges == 0) {
    throw GraphError("gate_edges must be at least 1");
  }
  if (!(cfg.label_fraction > 0.0 && cfg.label_fraction <= 1.0)) {
    throw GraphError("label_fraction must lie in (0, 1]");
  }
  if (!(cfg.weight > 0.0) || !std::isfinite(cfg.weight)) {
    throw GraphError("weight must be positive and finite");
  }
}

namespace {

class Wiring {
 public:
  Wiring(std::size_t n, std::size_t cap) : degree_(n, 0), cap_(cap) {}

  bool has(std::size_t a, std::size_t b) const { return edges_.count(key(a, b)) != 0; }
  std::size_t degree(std::size_t a) const { return degree_[a]; }
  std::size_t spare(std::size_t a) const { return cap_ - degree_[a]; }

  void add(std::size_t a, std::size_t b) {
    edges_.insert(key(a, b));
    ++degree_[a];
    ++degree_[b];
  }

  std::vector<Edge> to_edges(double w) const {
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (auto [a, b] : edges_) {
      out.push_back({static_cast<NodeIndex>(a), static_cast<NodeIndex>(b), w});
    }
    return out;
  }

 private:
  static std::pair<std::size_t, std::size_t> key(std::size_t a, std::size_t b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }

  std::set<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::size_t> degree_;
  std::size_t cap_;
};

void add_gates(Wiring& wiring, Rng& rng, std::size_t first_a, std::size_t first_b, const TwoClusterConfig& cfg) {
  // A node keeps one unit of capacity for its spanning-tree edge unless it
  // is alone in its block.
  const std::size_t reserve = cfg.cluster_size > 1 ? 1 : 0;
  for (std::size_t e = 0; e < cfg.gate_edges; ++e) {
    std::vector<std::pair<std::size_t, std::size_t>> eligible;
    for (std::size_t a = first_a; a < first_a + cfg.cluster_size; ++a) {
      if (wiring.spare(a) <= reserve) continue;
      for (std::size_t b = first_b; b < first_b + cfg.cluster_size; ++b) {
        if (wiring.spare(b) > reserve && !wiring.has(a, b)) {
          eligible.emplace_back(a, b);
        }
      }
    }
    if (eligible.empty()) {
      throw GraphError("degree_cap " + std::to_string(cfg.degree_cap) + " cannot host " +
                       std::to_string(cfg.gate_edges) + " gate edges");
    }
    auto [a, b] = eligible[rng.index(eligible.size())];
    wiring.add(a, b);
  }
}

void add_spanning_tree(Wiring& wiring, Rng& rng, std::size_t first, std::size_t size) {
  std::vector<std::size_t> order(size);
  for (std::size_t k = 0; k < size; ++k) order[k] = first + k;
  for (std::size_t k = size; k > 1; --k) {
    std::swap(order[k - 1], order[rng.index(k)]);
  }
  // Nodes that can only be leaves go last so interior nodes stay available.
  std::stable_partition(order.begin(), order.end(), [&](std::size_t v) { return wiring.spare(v) >= 2; });

  std::vector<std::size_t> open;
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t v = order[k];
    if (k > 0) {
      if (open.empty()) {
        throw GraphError("degree_cap too small to connect a cluster");
      }
      const std::size_t pick = rng.index(open.size());
      const std::size_t parent = open[pick];
      wiring.add(parent, v);
      if (wiring.spare(parent) == 0) {
        open[pick] = open.back();
        open.pop_back();
      }
    }
    if (wiring.spare(v) > 0) {
      open.push_back(v);
    }
  }
}

void fill_cluster(Wiring& wiring, Rng& rng, std::size_t first, std::size_t size, std::size_t cap) {
  std::vector<std::size_t> open;
  for (std::size_t v = first; v < first + size; ++v) {
    if (wiring.spare(v) > 0) open.push_back(v);
  }
  const std::size_t attempts = 10 * size * cap;
  for (std::size_t t = 0; t < attempts && open.size() >= 2; ++t) {
    const std::size_t ia = rng.index(open.size());
    const std::size_t ib = rng.index(open.size());
    const std::size_t a = open[ia];
    const std::size_t b = open[ib];
    if (a == b || wiring.has(a, b)) continue;
    wiring.add(a, b);
    // Remove the larger position first so the smaller one stays valid.
    for (std::size_t pos : {std::max(ia, ib), std::min(ia, ib)}) {
      if (wiring.spare(open[pos]) == 0) {
        open[pos] = open.back();
        open.pop_back();
      }
    }
  }
}

}  // namespace

ClusterInstance generate_two_cluster(const TwoClusterConfig& cfg) {
  validate(cfg);
  const std::size_t n = cfg.cluster_size * cfg.clusters;
  Rng rng(cfg.seed);
  Wiring wiring(n, cfg.degree_cap);

  for (std::size_t c = 0; c + 1 < cfg.clusters; ++c) {
    add_gates(wiring, rng, c * cfg.cluster_size, (c + 1) * cfg.cluster_size, cfg);
  }
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    add_spanning_tree(wiring, rng, c * cfg.cluster_size, cfg.cluster_size);
  }
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    fill_cluster(wiring, rng, c * cfg.cluster_size, cfg.cluster_size, cfg.degree_cap);
  }

  ClusterInstance out;
  const auto edges = wiring.to_edges(cfg.weight);
  out.graph = EmpiricalGraph(n, edges);
  out.truth.resize(n);
  out.cluster_of.resize(n);
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    const double level = rng.normal();
    for (std::size_t v = c * cfg.cluster_size; v < (c + 1) * cfg.cluster_size; ++v) {
      out.truth[v] = level;
      out.cluster_of[v] = c;
    }
  }

  const auto per_cluster = static_cast<std::size_t>(
      std::ceil(cfg.label_fraction * static_cast<double>(cfg.cluster_size) - 1e-9));
  std::vector<LabelSet::Entry> entries;
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    std::vector<std::size_t> pool(cfg.cluster_size);
    for (std::size_t k = 0; k < cfg.cluster_size; ++k) pool[k] = c * cfg.cluster_size + k;
    for (std::size_t k = 0; k < per_cluster; ++k) {
      std::swap(pool[k], pool[k + rng.index(cfg.cluster_size - k)]);
      entries.push_back({static_cast<NodeIndex>(pool[k]), out.truth[pool[k]]});
    }
  }
  out.labels = LabelSet(n, std::move(entries));
  return out;
}

}  // namespace tvss
