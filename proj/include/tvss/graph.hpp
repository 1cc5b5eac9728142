#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvss {

using NodeIndex = std::uint32_t;

/// Dense real vector over the nodes of a graph (labelings, iterates, ground truth).
using GraphSignal = std::vector<double>;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected edge with 0-based endpoints.
struct Edge {
  NodeIndex u{0};
  NodeIndex v{0};
  double weight{1.0};
};

/**
 * Sparse symmetric weighted graph stored in CSR form.
 *
 * Every undirected edge {i,j} occupies two directed slots: one in the row of
 * i (pointing at j) and one in the row of j (pointing at i). Rows are sorted
 * by neighbor index. `reverse_slot(s)` maps the slot (i->j) to (j->i), which
 * is what divergence and message delivery need.
 *
 * Immutable after construction.
 */
class EmpiricalGraph {
 public:
  EmpiricalGraph() = default;

  /// Validates and builds the graph. Rejects self-loops, duplicate edges
  /// (in either orientation), out-of-range endpoints and weights that are
  /// not strictly positive and finite.
  EmpiricalGraph(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }
  std::size_t slot_count() const noexcept { return neighbors_.size(); }

  std::size_t row_begin(std::size_t i) const { return offsets_[i]; }
  std::size_t row_end(std::size_t i) const { return offsets_[i + 1]; }
  std::size_t combinatorial_degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  std::span<const NodeIndex> neighbors(std::size_t i) const {
    return {neighbors_.data() + offsets_[i], combinatorial_degree(i)};
  }
  std::span<const double> weights(std::size_t i) const {
    return {weights_.data() + offsets_[i], combinatorial_degree(i)};
  }

  NodeIndex slot_target(std::size_t s) const { return neighbors_[s]; }
  double slot_weight(std::size_t s) const { return weights_[s]; }
  double slot_sqrt_weight(std::size_t s) const { return sqrt_weights_[s]; }
  std::size_t reverse_slot(std::size_t s) const { return reverse_[s]; }

  /// Owner row of every slot.
  NodeIndex slot_source(std::size_t s) const { return sources_[s]; }

  /// Each undirected edge once, with u < v, in row-major order.
  std::vector<Edge> edges() const;

  friend bool operator==(const EmpiricalGraph& a, const EmpiricalGraph& b) {
    return a.offsets_ == b.offsets_ && a.neighbors_ == b.neighbors_ && a.weights_ == b.weights_;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeIndex> neighbors_;
  std::vector<NodeIndex> sources_;
  std::vector<double> weights_;
  std::vector<double> sqrt_weights_;
  std::vector<std::size_t> reverse_;
};

/// d_i = sum of incident edge weights.
double weighted_degree(const EmpiricalGraph& g, std::size_t i);

/// Maximum weighted degree; 0 for an edgeless graph.
double max_degree(const EmpiricalGraph& g);

std::size_t max_combinatorial_degree(const EmpiricalGraph& g);

bool is_connected(const EmpiricalGraph& g);

/// Longest shortest-path hop count. Throws for disconnected graphs.
std::size_t diameter(const EmpiricalGraph& g);

/**
 * Sampling set S with its initial labels y. Nodes are 0-based, sorted and
 * unique; at least one node is required.
 */
class LabelSet {
 public:
  struct Entry {
    NodeIndex node{0};
    double value{0.0};
  };

  LabelSet() = default;
  /// Sorts by node. Throws on duplicates, out-of-range nodes, non-finite
  /// values or an empty set.
  LabelSet(std::size_t node_count, std::vector<Entry> entries);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t node_count() const noexcept { return mask_.size(); }
  std::span<const NodeIndex> nodes() const noexcept { return nodes_; }
  std::span<const double> values() const noexcept { return values_; }

  bool contains(std::size_t i) const { return mask_[i] != 0; }
  /// Position of node i within nodes(); only valid when contains(i).
  std::size_t position(std::size_t i) const { return position_[i]; }

 private:
  std::vector<NodeIndex> nodes_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> position_;
};

/// Throws GraphError unless x has one finite entry per node.
void check_signal(const EmpiricalGraph& g, std::span<const double> x, const char* what = "signal");

/// ||x - truth||^2 / ||truth||^2.
double nmse(std::span<const double> x, std::span<const double> truth);

}  // namespace tvss
