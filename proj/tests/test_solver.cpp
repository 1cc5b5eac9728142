#include <doctest.h>

#include <limits>
#include <sstream>

#include "support.hpp"
#include "tvss/generator.hpp"
#include "tvss/solver.hpp"

using namespace tvss;

TEST_CASE("empirical error") {
  const LabelSet s(2, {{0, 0.0}});
  CHECK(empirical_error(GraphSignal{2, 5}, s) == doctest::Approx(std::sqrt(2.0)));
  CHECK(empirical_error(GraphSignal{0, 5}, s) == 0.0);
  const LabelSet t(3, {{0, 1.0}, {2, -1.0}});
  const double e = empirical_error(GraphSignal{2, 0, 0}, t);
  CHECK(empirical_error(GraphSignal{3, 0, 1}, t) == doctest::Approx(2.0 * e));
}

TEST_CASE("dual field by hand") {
  const auto g = testing::single_edge();
  auto p = dual_field(g, GraphSignal{0, 1}, 0.5);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -1.0);
  p = dual_field(g, GraphSignal{0, 1}, 2.0);
  CHECK(p[0] == 0.5);
  const auto flat = dual_field(g, GraphSignal{3, 3}, 1.0);
  for (double v : flat.values()) CHECK(v == 0.0);
  // At ||grad_i x|| == mu both branches agree.
  p = dual_field(g, GraphSignal{0, 1}, 1.0);
  CHECK(p[0] == 1.0);
}

TEST_CASE("dual rows stay in the unit ball") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const auto g = testing::random_connected_graph(rng, 25);
    const auto x = testing::random_signal(rng, 25, 3.0);
    const double mu = 0.01 + rng.uniform();
    const auto p = dual_field(g, x, mu);
    for (std::size_t i = 0; i < 25; ++i) {
      double s = 0.0;
      for (double v : p.row(g, i)) s += v * v;
      CHECK(std::sqrt(s) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("smoothed objective") {
  const auto g = testing::single_edge();
  CHECK(smoothed_objective(g, GraphSignal{0, 1}, 0.5) == doctest::Approx(1.5));
  CHECK(smoothed_objective(g, GraphSignal{0, 1}, 2.0) ==
        doctest::Approx(testing::smoothed_objective_numeric(g, GraphSignal{0, 1}, 2.0)).epsilon(1e-10));
  CHECK(smoothed_objective(g, GraphSignal{4, 4}, 1.0) == 0.0);

  Rng rng(22);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 5 + rng.index(25);
    const auto h = testing::random_connected_graph(rng, n);
    const auto x = testing::random_signal(rng, n);
    const double mu = 0.05 + 2.0 * rng.uniform();
    const double f = smoothed_objective(h, x, mu);
    const double gap = total_variation(h, x) - f;
    CHECK(gap >= -1e-12);
    CHECK(gap <= 0.5 * mu * static_cast<double>(n) + 1e-12);
    CHECK(std::abs(f - testing::smoothed_objective_numeric(h, x, mu)) <= 1e-8 * std::max(1.0, f));
  }
}

TEST_CASE("smoothed gradient") {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4 + rng.index(26);
    const auto g = testing::random_connected_graph(rng, n);
    const auto x = testing::random_signal(rng, n);
    const double mu = 0.1 + rng.uniform();
    const auto grad = smoothed_gradient(g, x, mu);
    const auto fd = testing::central_difference(g, x, mu, 1e-6);
    double scale = 1.0, sum = 0.0;
    for (double v : grad) {
      scale = std::max(scale, std::abs(v));
      sum += v;
    }
    CHECK(testing::max_abs_diff(grad, fd) <= 1e-5 * scale);
    CHECK(std::abs(sum) <= 1e-12 * scale * static_cast<double>(n));
  }
  const auto zero = smoothed_gradient(testing::path_graph(4), GraphSignal(4, 1.0), 1.0);
  CHECK(zero == GraphSignal(4, 0.0));
}

TEST_CASE("Lipschitz constants") {
  CHECK(lipschitz_constant(8, 1, LipschitzMode::paper) == 16.0);
  CHECK(lipschitz_constant(8, 1, LipschitzMode::corrected) == 32.0);
  CHECK(lipschitz_constant(8, 0.5, LipschitzMode::corrected) == 64.0);
  CHECK(squared_operator_norm_bound(3, LipschitzMode::paper) == 6.0);
  CHECK(squared_operator_norm_bound(3, LipschitzMode::corrected) == 12.0);
  CHECK(parse_lipschitz_mode("paper") == LipschitzMode::paper);
  CHECK_THROWS(parse_lipschitz_mode("loose"));
  CHECK(to_string(LipschitzMode::corrected) == "corrected");
  CHECK(parse_accumulation(to_string(Accumulation::literal)) == Accumulation::literal);
  CHECK(parse_stop_rule(to_string(StopRule::rel_objective)) == StopRule::rel_objective);
}

TEST_CASE("projection by hand") {
  const LabelSet s(2, {{0, 0.0}});
  auto p = project_feasible(GraphSignal{2, 5}, s, 1.0);
  CHECK(p.v[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(p.v[1] == 5.0);
  CHECK(p.lambda_eps == doctest::Approx(std::sqrt(2.0) - 1.0));

  p = project_feasible(GraphSignal{0.5, 5}, s, 1.0);
  CHECK(p.v == GraphSignal{0.5, 5});
  CHECK(p.lambda_eps == 0.0);

  p = project_feasible(GraphSignal{2, 5}, s, 0.0);
  CHECK(p.v == GraphSignal{0, 5});
  CHECK(p.lambda_eps == std::numeric_limits<double>::infinity());

  p = project_feasible(GraphSignal{0, 5}, s, 0.0);
  CHECK(p.lambda_eps == 0.0);
  CHECK_THROWS(project_feasible(GraphSignal{0, 5}, s, -1.0));
}

TEST_CASE("projection matches the KKT oracle and is optimal") {
  Rng rng(24);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + rng.index(19);
    const auto labels = testing::random_labels(rng, n, 1 + rng.index(n));
    const auto q = testing::random_signal(rng, n, 2.0);
    const double r = empirical_error(q, labels);
    const double eps = (t % 2 == 0) ? r * rng.uniform() : r * (1.0 + rng.uniform());
    const auto p = project_feasible(q, labels, eps);
    const auto oracle = testing::kkt_projection_bisection(q, labels, eps);
    CHECK(testing::max_abs_diff(p.v, oracle.v) <= 1e-8);
    CHECK(empirical_error(p.v, labels) <= eps + 1e-12);
    CHECK(p.lambda_eps == doctest::Approx(std::max(0.0, r / eps - 1.0)));
    CHECK(p.lambda_eps == doctest::Approx(oracle.lambda).epsilon(1e-6));

    // Random feasible points are never closer to q.
    const double dist = testing::norm2([&] {
      GraphSignal d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = p.v[i] - q[i];
      return d;
    }());
    for (int k = 0; k < 20; ++k) {
      GraphSignal w = p.v;
      for (double& v : w) v += 0.3 * rng.normal();
      const double ew = empirical_error(w, labels);
      if (ew > eps) {
        for (std::size_t j = 0; j < labels.size(); ++j) {
          const auto i = labels.nodes()[j];
          w[i] = labels.values()[j] + (eps / ew) * (w[i] - labels.values()[j]);
        }
      }
      GraphSignal d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = w[i] - q[i];
      CHECK(testing::norm2(d) >= dist - 1e-10);
    }
  }
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.epsilon = -1;
  CHECK_THROWS_AS(validate(cfg), SolverError);
  cfg = {};
  cfg.mu0 = 0;
  CHECK_THROWS_AS(validate(cfg), SolverError);
  cfg = {};
  cfg.kappa = 1.5;
  CHECK_THROWS_AS(validate(cfg), SolverError);
  cfg.kappa = 0.0;
  CHECK_THROWS_AS(validate(cfg), SolverError);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(validate(cfg), SolverError);
}

TEST_CASE("feasible constant start is a fixed point") {
  const auto g = testing::path_graph(5);
  const LabelSet s(5, {{0, 2.0}, {4, 2.0}});
  SolverConfig cfg;
  cfg.max_iters = 50;
  const GraphSignal x0(5, 2.0);
  const auto res = solve(g, s, cfg, x0);
  CHECK(res.v == x0);
  CHECK(res.trace.size() == 50);
  for (const auto& r : res.trace) CHECK(r.tv == 0.0);
}

TEST_CASE("solver invariants: feasibility, state bookkeeping, determinism") {
  const auto inst = generate_two_cluster({});
  SolverConfig cfg;
  cfg.epsilon = 0.05;
  cfg.mu0 = 0.5;
  cfg.kappa = 0.995;
  cfg.max_iters = 200;
  const GraphSignal x0(200, 0.0);
  std::size_t calls = 0;
  const auto res = solve(inst.graph, inst.labels, cfg, x0, &inst.truth, [&](const SolverState& st) {
    ++calls;
    CHECK(st.alpha == doctest::Approx((static_cast<double>(st.k) + 1.0) / 2.0));
    CHECK(empirical_error(st.v, inst.labels) <= cfg.epsilon + 1e-12);
    CHECK(empirical_error(st.z, inst.labels) <= cfg.epsilon + 1e-12);
  });
  CHECK(calls == 200);
  REQUIRE(res.trace.size() == 200);
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    CHECK(res.trace[k].k == k);
    CHECK(res.trace[k].mu == doctest::Approx(0.5 * std::pow(0.995, double(k))));
    CHECK(std::isfinite(res.trace[k].f_mu));
    CHECK(res.trace[k].nmse.has_value());
  }
  const auto again = solve(inst.graph, inst.labels, cfg, x0, &inst.truth);
  CHECK(again.v == res.v);
}

TEST_CASE("accumulation modes agree for fixed smoothing") {
  const auto inst = generate_two_cluster({});
  SolverConfig cfg;
  cfg.mu0 = 0.1;
  cfg.max_iters = 100;
  const GraphSignal x0(200, 0.0);
  cfg.accumulation = Accumulation::literal;
  const auto a = solve(inst.graph, inst.labels, cfg, x0);
  cfg.accumulation = Accumulation::step_weighted;
  const auto b = solve(inst.graph, inst.labels, cfg, x0);
  CHECK(testing::max_abs_diff(a.v, b.v) <= 1e-9);
}

TEST_CASE("relative objective stopping") {
  const auto inst = generate_two_cluster({});
  SolverConfig cfg;
  cfg.mu0 = 0.1;
  cfg.max_iters = 5000;
  cfg.stop = StopRule::rel_objective;
  cfg.rel_objective_threshold = 1e-6;
  const auto res = solve(inst.graph, inst.labels, cfg, GraphSignal(200, 0.0));
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.trace.size() < 5000);
}

TEST_CASE("solver preconditions") {
  const auto g = testing::make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  const LabelSet s(4, {{0, 1.0}});
  CHECK_THROWS_AS(solve(g, s, SolverConfig{}, GraphSignal(4, 0.0)), SolverError);
  const auto p = testing::path_graph(4);
  CHECK_THROWS(solve(p, s, SolverConfig{}, GraphSignal(3, 0.0)));
  CHECK_THROWS(solve(p, LabelSet(5, {{0, 1.0}}), SolverConfig{}, GraphSignal(4, 0.0)));
}

TEST_CASE("trace CSV") {
  SolverTrace t(2);
  t[0].k = 0;
  t[0].lambda_eps = std::numeric_limits<double>::infinity();
  t[1].k = 1;
  t[1].nmse = 0.25;
  std::ostringstream out;
  write_trace_csv(out, t);
  CHECK(out.str() == "k,mu,f_mu,tv,emp_err,lambda_eps,nmse\n0,0,0,0,0,inf,\n1,0,0,0,0,0,0.25\n");
}

TEST_CASE("iteration bound") {
  const auto b = iteration_bound(0.1, 1.0, 8.0, 200, LipschitzMode::paper);
  CHECK(b.iterations == doctest::Approx(20.0 * std::sqrt(200.0 * 16.0)));
  CHECK(b.mu == doctest::Approx(0.1 / 200.0));
  const auto half = iteration_bound(0.05, 1.0, 8.0, 200, LipschitzMode::paper);
  CHECK(half.iterations >= 2.0 * b.iterations);
  CHECK(iteration_bound(0.1, 0.0, 8.0, 200, LipschitzMode::corrected).iterations == 0.0);
  CHECK_THROWS(iteration_bound(0.0, 1.0, 8.0, 200, LipschitzMode::paper));
}
