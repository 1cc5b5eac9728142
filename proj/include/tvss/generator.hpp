#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tvss/graph.hpp"

namespace tvss {

/// Parameters of the synthetic clustered benchmark.
struct TwoClusterConfig {
  std::size_t cluster_size{100};
  std::size_t clusters{2};
  std::size_t degree_cap{8};
  std::size_t gate_edges{2};
  double label_fraction{0.1};
  double weight{1.0};
  std::uint64_t seed{0};
};

struct ClusterInstance {
  EmpiricalGraph graph;
  GraphSignal truth;
  LabelSet labels;
  /// Cluster id of every node.
  std::vector<std::size_t> cluster_of;
};

/// Throws GraphError when a field is outside its documented range.
void validate(const TwoClusterConfig& cfg);

/**
 * Builds `clusters` blocks of `cluster_size` nodes. Consecutive blocks are
 * joined by `gate_edges` edges between randomly chosen gate nodes; each block
 * gets a random spanning tree and is then filled with uniformly random
 * intra-block edges until degrees saturate at `degree_cap`. Node values are
 * one N(0,1) draw per block and ceil(label_fraction * cluster_size) nodes per
 * block are sampled as labels. Deterministic in `seed`.
 *
 * Throws GraphError if the degree cap cannot accommodate the gate edges and
 * a connected spanning structure.
 */
ClusterInstance generate_two_cluster(const TwoClusterConfig& cfg);

}  // namespace tvss
