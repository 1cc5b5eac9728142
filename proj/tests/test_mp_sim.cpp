#include <doctest.h>

#include <set>
#include <sstream>

#include <boost/rational.hpp>

#include "support.hpp"
#include "tvss/generator.hpp"
#include "tvss/mp_sim.hpp"

using namespace tvss;
using namespace tvss::mp;

TEST_CASE("partition assignment is 1-based") {
  CHECK(partition_of(0, 8) == 1);
  CHECK(partition_of(7, 8) == 8);
  CHECK(partition_of(8, 8) == 1);
  CHECK(partition_of(5, 1) == 1);
}

TEST_CASE("Metropolis-Hastings weights") {
  const auto star = testing::make_graph(4, {{0, 1, 5.0}, {0, 2, 1.0}, {0, 3, 1.0}});
  const auto u = metropolis_weights(star);
  for (double w : u) CHECK(w == 0.25);
  Rng rng(31);
  const auto g = testing::random_connected_graph(rng, 30);
  const auto w = metropolis_weights(g);
  for (std::size_t i = 0; i < 30; ++i) {
    double s = 0.0;
    for (std::size_t k = g.row_begin(i); k < g.row_end(i); ++k) {
      s += w[k];
      CHECK(w[k] == w[g.reverse_slot(k)]);
    }
    CHECK(s < 1.0);
  }
}

TEST_CASE("consensus: fixed point, mean preservation, range contraction") {
  Rng rng(32);
  const auto g = testing::random_connected_graph(rng, 40);
  CHECK(consensus_average(g, std::vector<double>(40, 2.5), 17) == std::vector<double>(40, 2.5));
  auto b = testing::random_signal(rng, 40);
  const double sum0 = std::accumulate(b.begin(), b.end(), 0.0);
  for (int round = 0; round < 50; ++round) {
    const auto next = consensus_average(g, b, 1);
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    CHECK(std::abs(sum - sum0) <= 1e-12 * std::max(1.0, std::abs(sum0)) * 40);
    const auto [lo0, hi0] = std::minmax_element(b.begin(), b.end());
    const auto [lo1, hi1] = std::minmax_element(next.begin(), next.end());
    CHECK(*hi1 - *lo1 <= *hi0 - *lo0 + 1e-15);
    b = next;
  }
  const auto far = consensus_average(g, b, 5000);
  for (double v : far) CHECK(v == doctest::Approx(sum0 / 40.0).epsilon(1e-9));
}

TEST_CASE("residual from consensus") {
  CHECK(residual_from_consensus(0.0, 10, 2, ResidualMode::calibrated) == 0.0);
  CHECK(residual_from_consensus(-1e-13, 10, 2, ResidualMode::paper) == 0.0);
  CHECK_THROWS(residual_from_consensus(-1e-9, 10, 2, ResidualMode::paper));
  const double b = 0.37;
  CHECK(residual_from_consensus(b, 10, 3, ResidualMode::paper) ==
        doctest::Approx(std::sqrt(6.0) * residual_from_consensus(b, 10, 3, ResidualMode::calibrated)));

  // Exact consensus + calibrated mode reproduces the empirical error.
  Rng rng(33);
  const auto labels = testing::random_labels(rng, 12, 5);
  const auto q = testing::random_signal(rng, 12);
  double mean = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const double d = labels.values()[t] - q[labels.nodes()[t]];
    mean += d * d / 12.0;
  }
  CHECK(std::abs(residual_from_consensus(mean, 12, 5, ResidualMode::calibrated) - empirical_error(q, labels)) <=
        1e-12);
}

TEST_CASE("mode parsing and config validation") {
  CHECK(parse_residual_mode("paper") == ResidualMode::paper);
  CHECK(parse_consensus_mode(to_string(ConsensusMode::exact_oracle)) == ConsensusMode::exact_oracle);
  CHECK_THROWS_AS(parse_residual_mode("x"), std::invalid_argument);
  SimConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.consensus_rounds = 0;
  CHECK_THROWS(validate(cfg));
  cfg = {};
  cfg.partitions = 0;
  CHECK_THROWS(validate(cfg));
  cfg = {};
  cfg.mu = 0;
  CHECK_THROWS(validate(cfg));
}

TEST_CASE("initial node state") {
  const auto inst = generate_two_cluster({});
  const Simulator sim(inst.graph, inst.labels, SimConfig{}, GraphSignal(200, 0.0));
  for (const auto& n : sim.nodes()) {
    CHECK(n.alpha == 0.5);
    CHECK(n.tau == doctest::Approx(2.0 / 3.0));
    CHECK(n.g_bar == 0.0);
    CHECK(n.q_tilde == n.x0);
    CHECK(n.y.has_value() == inst.labels.contains(n.id));
    CHECK(n.partition == partition_of(n.id, 8));
  }
  CHECK_THROWS(Simulator(testing::make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}}), LabelSet(4, {{0, 1.0}}), SimConfig{},
                         GraphSignal(4, 0.0)));
}

TEST_CASE("exact-consensus simulator tracks the centralized solver every iteration") {
  const auto inst = generate_two_cluster({});
  SimConfig sc;
  sc.mu = 0.05;
  sc.epsilon = 1e-3;
  sc.max_iters = 60;
  sc.consensus = ConsensusMode::exact_oracle;
  const GraphSignal x0(200, 0.0);
  Simulator sim(inst.graph, inst.labels, sc, x0);
  SolverConfig cfg;
  cfg.mu0 = sc.mu;
  cfg.epsilon = sc.epsilon;
  cfg.max_iters = sc.max_iters;
  std::vector<GraphSignal> central;
  solve(inst.graph, inst.labels, cfg, x0, nullptr, [&](const SolverState& st) { central.push_back(st.v); });
  for (std::size_t k = 0; k < sc.max_iters; ++k) {
    sim.run_iteration();
    CHECK(testing::max_abs_diff(sim.estimate(), central[k]) <= 1e-9);
  }
  CHECK(sim.stats().total_messages == 2 * inst.graph.edge_count() * 2 * sc.max_iters);
}

TEST_CASE("message accounting and locality") {
  const auto inst = generate_two_cluster({});
  SimConfig sc;
  sc.consensus_rounds = 7;
  sc.max_iters = 3;
  Simulator sim(inst.graph, inst.labels, sc, GraphSignal(200, 0.0), &inst.truth);

  std::set<std::pair<NodeIndex, NodeIndex>> edges;
  for (const auto& e : inst.graph.edges()) {
    edges.insert({e.u, e.v});
    edges.insert({e.v, e.u});
  }
  std::size_t reads = 0, foreign = 0;
  sim.set_read_observer([&](NodeIndex reader, NodeIndex sender) {
    ++reads;
    if (!edges.count({reader, sender})) ++foreign;
  });
  const auto snaps = sim.run();
  const std::uint64_t per_iter = 2 * inst.graph.edge_count() * (2 + 2 * sc.consensus_rounds);
  REQUIRE(snaps.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(snaps[k].total_msgs == per_iter * (k + 1));
    CHECK(snaps[k].inter_partition_msgs <= snaps[k].total_msgs);
    CHECK(snaps[k].nmse.has_value());
  }
  CHECK(reads == per_iter * 3);
  CHECK(foreign == 0);
  CHECK(sim.stats().rounds == 3 * (2 + 2 * sc.consensus_rounds));

  sc.partitions = 1;
  Simulator single(inst.graph, inst.labels, sc, GraphSignal(200, 0.0));
  single.run();
  CHECK(single.stats().inter_partition_messages == 0);
}

TEST_CASE("tau and alpha follow the closed forms") {
  const auto inst = generate_two_cluster({});
  SimConfig sc;
  sc.consensus_rounds = 2;
  Simulator sim(inst.graph, inst.labels, sc, GraphSignal(200, 0.0));
  for (std::size_t k = 1; k <= 5; ++k) {
    sim.run_iteration();
    CHECK(sim.nodes()[0].tau == doctest::Approx(2.0 / (double(k) + 3.0)));
    CHECK(sim.nodes()[0].alpha == doctest::Approx((double(k) + 1.0) / 2.0));
  }
  using Q = boost::rational<long long>;
  Q tau(2, 3), alpha(1, 2);
  for (long long k = 0; k <= 200; ++k) {
    CHECK(tau == Q(2, k + 3));
    CHECK(alpha == Q(k + 1, 2));
    tau = advance_tau(tau);
    alpha = advance_alpha(alpha);
  }
}

TEST_CASE("determinism and snapshot CSV") {
  const auto inst = generate_two_cluster({});
  SimConfig sc;
  sc.consensus_rounds = 5;
  sc.max_iters = 4;
  Simulator a(inst.graph, inst.labels, sc, GraphSignal(200, 0.0), &inst.truth);
  Simulator b(inst.graph, inst.labels, sc, GraphSignal(200, 0.0), &inst.truth);
  const auto sa = a.run();
  const auto sb = b.run();
  CHECK(a.estimate() == b.estimate());
  std::ostringstream oa, ob;
  write_snapshots_csv(oa, sa);
  write_snapshots_csv(ob, sb);
  CHECK(oa.str() == ob.str());
  CHECK(oa.str().rfind("k,nmse,emp_err_est_mean,emp_err_true,total_msgs,inter_partition_msgs\n", 0) == 0);
}
