#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "tvss/graph.hpp"
#include "tvss/solver.hpp"

namespace tvss::mp {

/// paper: r_i = sqrt(N b_i). calibrated: r_i = sqrt(N b_i / (2M)), which equals
/// the empirical error once consensus is exact.
enum class ResidualMode { paper, calibrated };

/// gossip runs K Metropolis-Hastings rounds; exact_oracle injects the true
/// mean instead (a test oracle, not a distributed protocol).
enum class ConsensusMode { gossip, exact_oracle };

std::string_view to_string(ResidualMode mode);
ResidualMode parse_residual_mode(std::string_view text);
std::string_view to_string(ConsensusMode mode);
ConsensusMode parse_consensus_mode(std::string_view text);

struct SimConfig {
  std::size_t consensus_rounds{200};
  std::size_t partitions{8};
  double mu{0.01};
  double epsilon{0.0};
  std::size_t max_iters{500};
  LipschitzMode lipschitz_mode{LipschitzMode::corrected};
  ResidualMode residual_mode{ResidualMode::calibrated};
  ConsensusMode consensus{ConsensusMode::gossip};
  /// Carried with the configuration for provenance; the simulation itself has
  /// no random components.
  std::uint64_t seed{0};
};

void validate(const SimConfig& cfg);

struct MessageStats {
  std::uint64_t total_messages{0};
  std::uint64_t inter_partition_messages{0};
  std::uint64_t rounds{0};
};

/// Everything one node knows: its own variables, its neighbors' ids and edge
/// weights, and the per-neighbor consensus weights.
struct NodeState {
  NodeIndex id{0};
  std::size_t partition{1};
  std::vector<NodeIndex> neighbors;
  std::vector<double> sqrt_weights;
  std::vector<double> u;

  double x{0.0};
  double x0{0.0};
  double q{0.0};
  double q_tilde{0.0};
  double g_bar{0.0};
  double b{0.0};
  double b_tilde{0.0};
  double r{0.0};
  double r_tilde{0.0};
  double x_hat{0.0};
  double z{0.0};
  std::optional<double> y;
  std::vector<double> p_out;

  double alpha{0.5};
  double tau{2.0 / 3.0};
};

struct Snapshot {
  std::size_t k{0};
  std::optional<double> nmse;
  /// Mean over nodes of the local residual estimates r_i.
  double emp_err_est_mean{0.0};
  /// The residual the nodes estimate, computed centrally: empirical error of q.
  double emp_err_true{0.0};
  std::uint64_t total_msgs{0};
  std::uint64_t inter_partition_msgs{0};
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, Snapshot snapshot)
      : std::runtime_error(what), snapshot_(snapshot) {}
  const Snapshot& snapshot() const noexcept { return snapshot_; }

 private:
  Snapshot snapshot_;
};

/// 1-based partition of 0-based node `node`: (node mod partitions) + 1.
std::size_t partition_of(std::size_t node, std::size_t partitions);

/// u_ij = 1 / (max{deg_i, deg_j} + 1) with combinatorial degrees, per directed slot.
std::vector<double> metropolis_weights(const EmpiricalGraph& g);

/// K synchronous Metropolis-Hastings averaging rounds.
std::vector<double> consensus_average(const EmpiricalGraph& g, std::span<const double> values, std::size_t rounds);

/// Turns a consensus estimate of (1/N) sum_S (y_i - q_i)^2 into a residual.
/// Values in (-1e-12, 0) are clamped to 0; anything more negative throws.
double residual_from_consensus(double b, std::size_t node_count, std::size_t labeled_count, ResidualMode mode);

/// tau <- 1 / (1/tau + 1/2). Generic so exact rational arithmetic can check it.
template <class T>
T advance_tau(const T& tau) {
  return T(1) / (T(1) / tau + T(1) / T(2));
}

template <class T>
T advance_alpha(const T& alpha) {
  return alpha + T(1) / T(2);
}

/// Called as (reader, sender) whenever a node reads a delivered message.
using ReadObserver = std::function<void(NodeIndex reader, NodeIndex sender)>;

/**
 * Round-synchronous simulation of the distributed learning scheme. Each
 * outer iteration runs: broadcast x; local dual field; broadcast P; local
 * gradient and accumulator updates; two consensus sweeps for the residual
 * energies; local projections and the tau-mixing step. Nodes only read
 * their own state and messages from their neighbors.
 */
class Simulator {
 public:
  Simulator(const EmpiricalGraph& g, const LabelSet& labels, const SimConfig& cfg, std::span<const double> x0,
            const GraphSignal* truth = nullptr);

  Snapshot run_iteration();
  std::vector<Snapshot> run();

  /// Per-node projected iterate x_hat (the learned labeling).
  GraphSignal estimate() const;
  GraphSignal current_x() const;

  const std::vector<NodeState>& nodes() const noexcept { return nodes_; }
  const MessageStats& stats() const noexcept { return stats_; }
  std::size_t iteration() const noexcept { return k_; }
  double lipschitz() const noexcept { return lipschitz_; }

  void set_read_observer(ReadObserver observer) { observer_ = std::move(observer); }

 private:
  std::vector<double> deliver(const std::function<double(const NodeState&, std::size_t)>& outgoing);
  void consensus(double NodeState::*field);

  EmpiricalGraph graph_;
  SimConfig cfg_;
  std::optional<GraphSignal> truth_;
  std::size_t labeled_count_{0};
  double lipschitz_{0.0};
  std::vector<NodeState> nodes_;
  MessageStats stats_;
  std::size_t k_{0};
  ReadObserver observer_;
};

/// Header `k,nmse,emp_err_est_mean,emp_err_true,total_msgs,inter_partition_msgs`.
void write_snapshots_csv(std::ostream& out, std::span<const Snapshot> snapshots);

}  // namespace tvss::mp
