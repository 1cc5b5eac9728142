#include "tvss/mp_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "tvss/io.hpp"

namespace tvss::mp {

std::string_view to_string(ResidualMode mode) { return mode == ResidualMode::paper ? "paper" : "calibrated"; }

ResidualMode parse_residual_mode(std::string_view text) {
  if (text == "paper") return ResidualMode::paper;
  if (text == "calibrated") return ResidualMode::calibrated;
  throw std::invalid_argument("unknown residual mode '" + std::string(text) + "' (expected paper|calibrated)");
}

std::string_view to_string(ConsensusMode mode) { return mode == ConsensusMode::gossip ? "gossip" : "exact_oracle"; }

ConsensusMode parse_consensus_mode(std::string_view text) {
  if (text == "gossip") return ConsensusMode::gossip;
  if (text == "exact_oracle") return ConsensusMode::exact_oracle;
  throw std::invalid_argument("unknown consensus mode '" + std::string(text) + "' (expected gossip|exact_oracle)");
}

void validate(const SimConfig& cfg) {
  if (cfg.consensus_rounds == 0) throw std::invalid_argument("consensus rounds K must be >= 1");
  if (cfg.partitions == 0) throw std::invalid_argument("partitions must be >= 1");
  if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu)) throw std::invalid_argument("mu must be > 0");
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon)) throw std::invalid_argument("epsilon must be >= 0");
  if (cfg.max_iters == 0) throw std::invalid_argument("max_iters must be positive");
}

std::size_t partition_of(std::size_t node, std::size_t partitions) { return node % partitions + 1; }

std::vector<double> metropolis_weights(const EmpiricalGraph& g) {
  std::vector<double> u(g.slot_count());
  for (std::size_t s = 0; s < g.slot_count(); ++s) {
    const std::size_t di = g.combinatorial_degree(g.slot_source(s));
    const std::size_t dj = g.combinatorial_degree(g.slot_target(s));
    u[s] = 1.0 / (static_cast<double>(std::max(di, dj)) + 1.0);
  }
  return u;
}

namespace {

// (1 - sum u) b_i + sum u b_j, written as a correction so constants are exact fixed points.
double mix(double own, std::span<const double> weights, std::span<const double> incoming) {
  double delta = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) delta += weights[k] * (incoming[k] - own);
  return own + delta;
}

}  // namespace

std::vector<double> consensus_average(const EmpiricalGraph& g, std::span<const double> values, std::size_t rounds) {
  check_signal(g, values, "consensus input");
  const auto u = metropolis_weights(g);
  std::vector<double> b(values.begin(), values.end());
  std::vector<double> next(b.size());
  std::vector<double> incoming;
  for (std::size_t round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      incoming.clear();
      for (NodeIndex j : g.neighbors(i)) incoming.push_back(b[j]);
      next[i] = mix(b[i], std::span(u).subspan(g.row_begin(i), g.combinatorial_degree(i)), incoming);
    }
    b.swap(next);
  }
  return b;
}

double residual_from_consensus(double b, std::size_t node_count, std::size_t labeled_count, ResidualMode mode) {
  if (b < -1e-12) {
    throw std::domain_error("consensus produced a negative residual energy");
  }
  b = std::max(b, 0.0);
  const double n = static_cast<double>(node_count);
  if (mode == ResidualMode::paper) return std::sqrt(n * b);
  return std::sqrt(n * b / (2.0 * static_cast<double>(labeled_count)));
}

namespace {

// A node's view of the messages delivered to it in the current round,
// aligned with its neighbor list.
class Inbox {
 public:
  Inbox(const NodeState& node, std::span<const double> values, const ReadObserver& observer)
      : node_(node), values_(values), observer_(observer) {}

  std::size_t size() const { return values_.size(); }
  double from(std::size_t k) const {
    if (observer_) observer_(node_.id, node_.neighbors[k]);
    return values_[k];
  }

 private:
  const NodeState& node_;
  std::span<const double> values_;
  const ReadObserver& observer_;
};

void compute_dual_row(NodeState& n, const Inbox& x_in, double mu) {
  double sq = 0.0;
  for (std::size_t k = 0; k < x_in.size(); ++k) {
    n.p_out[k] = n.sqrt_weights[k] * (x_in.from(k) - n.x);
    sq += n.p_out[k] * n.p_out[k];
  }
  const double scale = std::max(mu, std::sqrt(sq));
  for (double& p : n.p_out) p /= scale;
}

void compute_local_steps(NodeState& n, const Inbox& p_in, double lipschitz) {
  double div = 0.0;
  for (std::size_t k = 0; k < p_in.size(); ++k) {
    div += n.sqrt_weights[k] * (n.p_out[k] - p_in.from(k));
  }
  const double g = -div / lipschitz;
  n.q = n.x - g;
  n.g_bar += n.alpha * g;
  n.alpha = advance_alpha(n.alpha);
  n.q_tilde = n.x0 - n.g_bar;
  n.b = n.y ? (*n.y - n.q) * (*n.y - n.q) : 0.0;
  n.b_tilde = n.y ? (*n.y - n.q_tilde) * (*n.y - n.q_tilde) : 0.0;
}

double project_local(const NodeState& n, double value, double residual, double eps) {
  if (n.y && residual > eps) return *n.y + (eps / residual) * (value - *n.y);
  return value;
}

}  // namespace

Simulator::Simulator(const EmpiricalGraph& g, const LabelSet& labels, const SimConfig& cfg,
                     std::span<const double> x0, const GraphSignal* truth)
    : graph_(g), cfg_(cfg), labeled_count_(labels.size()) {
  validate(cfg_);
  check_signal(graph_, x0, "initial guess");
  if (labels.node_count() != g.node_count()) throw std::invalid_argument("label set does not match the graph");
  if (!is_connected(graph_)) throw std::invalid_argument("graph must be connected");
  if (truth) {
    check_signal(graph_, *truth, "ground truth");
    truth_ = *truth;
  }
  lipschitz_ = lipschitz_constant(max_degree(graph_), cfg_.mu, cfg_.lipschitz_mode);

  const auto u = metropolis_weights(graph_);
  nodes_.resize(graph_.node_count());
  for (std::size_t i = 0; i < graph_.node_count(); ++i) {
    NodeState& n = nodes_[i];
    n.id = static_cast<NodeIndex>(i);
    n.partition = partition_of(i, cfg_.partitions);
    auto nb = graph_.neighbors(i);
    n.neighbors.assign(nb.begin(), nb.end());
    for (std::size_t s = graph_.row_begin(i); s < graph_.row_end(i); ++s) {
      n.sqrt_weights.push_back(graph_.slot_sqrt_weight(s));
      n.u.push_back(u[s]);
    }
    n.p_out.assign(n.neighbors.size(), 0.0);
    n.x = x0[i];
    n.x0 = x0[i];
    n.q_tilde = x0[i];
    n.x_hat = x0[i];
    n.z = x0[i];
    if (labels.contains(i)) n.y = labels.values()[labels.position(i)];
  }
}

std::vector<double> Simulator::deliver(const std::function<double(const NodeState&, std::size_t)>& outgoing) {
  std::vector<double> inbox(graph_.slot_count());
  for (const NodeState& sender : nodes_) {
    for (std::size_t k = 0; k < sender.neighbors.size(); ++k) {
      const std::size_t slot = graph_.row_begin(sender.id) + k;
      inbox[graph_.reverse_slot(slot)] = outgoing(sender, k);
      ++stats_.total_messages;
      if (nodes_[sender.neighbors[k]].partition != sender.partition) ++stats_.inter_partition_messages;
    }
  }
  ++stats_.rounds;
  return inbox;
}

void Simulator::consensus(double NodeState::*field) {
  if (cfg_.consensus == ConsensusMode::exact_oracle) {
    double sum = 0.0;
    for (const NodeState& n : nodes_) sum += n.*field;
    const double mean = sum / static_cast<double>(nodes_.size());
    for (NodeState& n : nodes_) n.*field = mean;
    return;
  }
  std::vector<double> incoming;
  for (std::size_t round = 0; round < cfg_.consensus_rounds; ++round) {
    const auto inbox = deliver([field](const NodeState& n, std::size_t) { return n.*field; });
    for (NodeState& n : nodes_) {
      const Inbox view(n, std::span(inbox).subspan(graph_.row_begin(n.id), n.neighbors.size()), observer_);
      incoming.resize(view.size());
      for (std::size_t k = 0; k < view.size(); ++k) incoming[k] = view.from(k);
      n.*field = mix(n.*field, n.u, incoming);
    }
  }
}

Snapshot Simulator::run_iteration() {
  const std::size_t n_nodes = nodes_.size();

  const auto x_inbox = deliver([](const NodeState& n, std::size_t) { return n.x; });
  for (NodeState& n : nodes_) {
    compute_dual_row(n, Inbox(n, std::span(x_inbox).subspan(graph_.row_begin(n.id), n.neighbors.size()), observer_),
                     cfg_.mu);
  }

  const auto p_inbox = deliver([](const NodeState& n, std::size_t k) { return n.p_out[k]; });
  for (NodeState& n : nodes_) {
    compute_local_steps(
        n, Inbox(n, std::span(p_inbox).subspan(graph_.row_begin(n.id), n.neighbors.size()), observer_),
        lipschitz_);
  }

  consensus(&NodeState::b);
  for (NodeState& n : nodes_) n.r = residual_from_consensus(n.b, n_nodes, labeled_count_, cfg_.residual_mode);
  consensus(&NodeState::b_tilde);
  for (NodeState& n : nodes_) {
    n.r_tilde = residual_from_consensus(n.b_tilde, n_nodes, labeled_count_, cfg_.residual_mode);
  }

  bool finite = true;
  for (NodeState& n : nodes_) {
    n.x_hat = project_local(n, n.q, n.r, cfg_.epsilon);
    n.z = project_local(n, n.q_tilde, n.r_tilde, cfg_.epsilon);
    n.x = n.x_hat + n.tau * (n.z - n.x_hat);
    n.tau = advance_tau(n.tau);
    finite = finite && std::isfinite(n.x) && std::isfinite(n.x_hat) && std::isfinite(n.z);
  }

  Snapshot snap;
  snap.k = k_++;
  snap.total_msgs = stats_.total_messages;
  snap.inter_partition_msgs = stats_.inter_partition_messages;
  if (!finite) {
    throw SimulationError("non-finite node state at iteration " + std::to_string(snap.k), snap);
  }

  // Diagnostics below are computed centrally and never fed back to the nodes.
  double r_sum = 0.0;
  double sq = 0.0;
  for (const NodeState& n : nodes_) {
    r_sum += n.r;
    if (n.y) sq += (n.q - *n.y) * (n.q - *n.y);
  }
  snap.emp_err_est_mean = r_sum / static_cast<double>(n_nodes);
  snap.emp_err_true = std::sqrt(sq / (2.0 * static_cast<double>(labeled_count_)));
  if (truth_) snap.nmse = nmse(estimate(), *truth_);
  return snap;
}

std::vector<Snapshot> Simulator::run() {
  std::vector<Snapshot> out;
  out.reserve(cfg_.max_iters);
  while (k_ < cfg_.max_iters) out.push_back(run_iteration());
  return out;
}

GraphSignal Simulator::estimate() const {
  GraphSignal x(nodes_.size());
  for (const NodeState& n : nodes_) x[n.id] = n.x_hat;
  return x;
}

GraphSignal Simulator::current_x() const {
  GraphSignal x(nodes_.size());
  for (const NodeState& n : nodes_) x[n.id] = n.x;
  return x;
}

void write_snapshots_csv(std::ostream& out, std::span<const Snapshot> snapshots) {
  out << "k,nmse,emp_err_est_mean,emp_err_true,total_msgs,inter_partition_msgs\n";
  for (const Snapshot& s : snapshots) {
    out << s.k << ',';
    if (s.nmse) out << io::format_double(*s.nmse);
    out << ',' << io::format_double(s.emp_err_est_mean) << ',' << io::format_double(s.emp_err_true) << ','
        << s.total_msgs << ',' << s.inter_partition_msgs << '\n';
  }
}

}  // namespace tvss::mp
