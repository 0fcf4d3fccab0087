#include <doctest.h>

#include <cmath>

#include "qadmit/harness.hpp"

using namespace qadmit;

namespace {

RunConfig single_node_config(double arrival_rate, double service_rate,
                             int servers = 1) {
  RunConfig cfg;
  cfg.topology.nodes = {{servers, gamma_from_rate_scv(service_rate, 1.0)}};
  cfg.arrival = gamma_from_rate_scv(arrival_rate, 1.0);
  cfg.control = make_reward_params(1.0, 0.1, 15.0);
  cfg.steps = 20000;
  cfg.warmup = 2000;
  cfg.window = 1000;
  cfg.seeds = {1};
  return cfg;
}

}  // namespace

TEST_CASE("decisions split exactly between accept and reject") {
  RunConfig cfg = single_node_config(0.9, 1.0);
  const TrainResult r = train(cfg, 1);
  CHECK(r.summary.accepted + r.summary.rejected == cfg.steps);
  for (const MetricsRow& row : r.metrics) {
    CHECK(row.acceptance_rate >= 0.0);
    CHECK(row.acceptance_rate <= 1.0);
    CHECK(row.p_violation_accept >= 0.0);
    CHECK(row.p_violation_accept <= 1.0);
    CHECK(row.goodput <= row.throughput + 1e-12);
  }
}

TEST_CASE("training twice with the same seed gives identical results") {
  RunConfig cfg = single_node_config(0.8, 1.0);
  cfg.control = make_reward_params(4.0, 0.1, 8.0);
  const TrainResult a = train(cfg, 7);
  const TrainResult b = train(cfg, 7);
  CHECK(a.q.to_text() == b.q.to_text());
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].p_violation_accept == b.metrics[i].p_violation_accept);
    CHECK(a.metrics[i].r_bar == b.metrics[i].r_bar);
    CHECK(a.metrics[i].throughput == b.metrics[i].throughput);
  }
  CHECK(a.summary.reward_sum == b.summary.reward_sum);
}

TEST_CASE("rewards stay inside the four-value image") {
  RunConfig cfg = single_node_config(1.1, 1.0);
  cfg.control = make_reward_params(8.0, 0.1, 6.0);
  const TrainResult r = train(cfg, 3);
  // every completed experience carries one of {r1A, r2A, r1R, r2R}
  const double reconstructed =
      cfg.control.accept_meet() *
          static_cast<double>(r.summary.departed - r.summary.violations) +
      cfg.control.accept_miss() * static_cast<double>(r.summary.violations) +
      cfg.control.reject_meet() *
          static_cast<double>(r.summary.rejections_would_meet);
  CHECK(r.summary.reward_sum ==
        doctest::Approx(reconstructed).epsilon(1e-9));
  CHECK(r.summary.rejected >= r.summary.rejections_would_meet);
}

TEST_CASE("with lambda=0 the trained policy accepts every visited state") {
  RunConfig cfg = single_node_config(0.9, 0.6, 2);
  cfg.control = make_reward_params(0.0, 0.1, 15.0);
  cfg.steps = 30000;
  cfg.warmup = 3000;
  const TrainResult r = train(cfg, 2);
  int frequent = 0;
  for (const auto& [state, visits] : r.visits) {
    if (visits >= 100) {
      ++frequent;
      CHECK(r.q.greedy_action(state) == Action::Accept);
    }
  }
  CHECK(frequent > 0);
}

TEST_CASE("r_bar tracks the empirical mean reward under a frozen policy") {
  RunConfig cfg = single_node_config(0.5, 1.0);
  cfg.steps = 100000;
  cfg.warmup = 10000;
  const QTable empty;  // greedy w.r.t. all-zero: accept everywhere
  const TrainResult r =
      run_policy(cfg, 5, PolicyMode::Greedy, &empty, 0.001);
  const double empirical =
      r.summary.reward_sum / static_cast<double>(r.summary.completed_experiences);
  CHECK(std::abs(r.summary.final_window.r_bar - empirical) <= 0.05);
  CHECK(r.summary.accepted == cfg.steps);
}

TEST_CASE("always-reject earns the unnecessary-rejection penalty") {
  RunConfig cfg = single_node_config(0.9, 1.0);
  const TrainResult r = run_policy(cfg, 11, PolicyMode::AlwaysReject);
  CHECK(r.summary.accepted == 0);
  CHECK(r.summary.final_window.acceptance_rate == 0.0);
  // the network stays empty, every hypothetical delay meets the bound
  CHECK(r.summary.final_window.objective == doctest::Approx(-1.0));
  CHECK(r.summary.final_window.throughput == 0.0);
}

TEST_CASE("baseline on an underloaded node: goodput ~ throughput ~ rate") {
  RunConfig cfg = single_node_config(0.5, 1.0);
  cfg.steps = 50000;
  cfg.warmup = 5000;
  const TrainResult r = baseline_no_ac(cfg, 13);
  CHECK(r.summary.final_window.acceptance_rate == 1.0);
  CHECK(r.summary.final_window.throughput == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.summary.final_window.goodput ==
        doctest::Approx(r.summary.final_window.throughput).epsilon(0.01));
}

TEST_CASE("near-zero arrival rate gives near-zero rows") {
  RunConfig cfg = single_node_config(1e-9, 1.0);
  cfg.steps = 2000;
  cfg.warmup = 200;
  cfg.window = 300;
  const TrainResult r = baseline_no_ac(cfg, 1);
  REQUIRE(!r.metrics.empty());
  for (const MetricsRow& row : r.metrics) {
    CHECK(row.p_violation_accept == 0.0);
    CHECK(row.throughput < 1e-6);
    CHECK(row.goodput < 1e-6);
  }
}

TEST_CASE("overload without control pushes the violation fraction up") {
  RunConfig cfg = single_node_config(1.3, 1.0);
  cfg.control = make_reward_params(0.0, 0.1, 10.0);
  cfg.steps = 40000;
  cfg.warmup = 0;
  cfg.window = 4000;
  const TrainResult r = baseline_no_ac(cfg, 3);
  REQUIRE(r.metrics.size() >= 3);
  CHECK(r.metrics.back().p_violation_accept >
        r.metrics.front().p_violation_accept);
  CHECK(r.metrics.back().p_violation_accept > 0.9);
}

TEST_CASE("evaluate reproduces the training tail and flags unseen states") {
  RunConfig cfg = single_node_config(0.9, 1.0);
  cfg.control = make_reward_params(6.0, 0.1, 6.0);
  cfg.steps = 80000;
  cfg.warmup = 8000;
  const TrainResult trained = train(cfg, 17);

  RunConfig eval_cfg = cfg;
  eval_cfg.steps = 40000;
  eval_cfg.warmup = 4000;
  const TrainResult rolled = evaluate(eval_cfg, trained.q, 18);
  CHECK(std::abs(rolled.summary.final_window.p_violation_accept -
                 trained.summary.final_window.p_violation_accept) < 0.06);
  CHECK(std::abs(rolled.summary.final_window.acceptance_rate -
                 trained.summary.final_window.acceptance_rate) < 0.1);

  const QTable empty;
  const TrainResult blind = evaluate(eval_cfg, empty, 18);
  CHECK(blind.summary.unseen_state_decisions == eval_cfg.steps);
  CHECK(blind.summary.accepted == eval_cfg.steps);  // default tie-break
}

TEST_CASE("deterministic threshold scenario recovers accept-iff-q<=4") {
  RunConfig cfg;
  cfg.topology.nodes = {{1, deterministic_from_value(1.0)}};
  cfg.arrival = deterministic_from_value(0.731);
  cfg.control = make_reward_params(16.0, 0.1, 5.5);
  cfg.agent.alpha = 0.02;
  cfg.agent.beta = 0.001;
  cfg.agent.eps_start = 0.3;
  cfg.agent.eps_end = 0.02;
  cfg.steps = 100000;
  cfg.warmup = 10000;
  const TrainResult r = train(cfg, 1);
  bool saw_accept_region = false;
  bool saw_reject_region = false;
  for (const auto& [state, visits] : r.visits) {
    if (visits < 100) continue;
    const Action a = r.q.greedy_action(state);
    if (state[0] <= 4) {
      CHECK(a == Action::Accept);
      saw_accept_region = true;
    } else {
      CHECK(a == Action::Reject);
      saw_reject_region = true;
    }
  }
  CHECK(saw_accept_region);
  CHECK(saw_reject_region);
}

TEST_CASE("singleton sweep returns its lambda with the constraint flagged") {
  RunConfig cfg = single_node_config(0.95, 1.0);
  cfg.control = make_reward_params(0.0, 0.1, 5.0);
  cfg.steps = 30000;
  cfg.warmup = 3000;
  cfg.seeds = {1, 2};
  const SweepResult sweep = lambda_sweep(cfg, {0.0});
  CHECK(sweep.lambda_star == 0.0);
  CHECK(sweep.kkt_residual == 0.0);
  CHECK_FALSE(sweep.constraint_satisfied_at_star);
  CHECK(sweep.records.size() == 2);
  CHECK(sweep.per_lambda.size() == 1);
  CHECK(sweep.per_lambda[0].p_violation_mean > 0.1);
}

TEST_CASE("sweep rejects an empty grid") {
  RunConfig cfg = single_node_config(0.9, 1.0);
  CHECK_THROWS_AS(lambda_sweep(cfg, {}), ConfigError);
}

TEST_CASE("run config validation catches bad combinations") {
  RunConfig cfg = single_node_config(0.9, 1.0);
  cfg.warmup = cfg.steps;
  CHECK_THROWS_AS(finalize_run_config(cfg), ConfigError);

  RunConfig w = single_node_config(0.9, 1.0);
  w.window = 50;
  CHECK_THROWS_AS(finalize_run_config(w), ConfigError);

  RunConfig s = single_node_config(0.9, 1.0);
  s.seeds.clear();
  CHECK_THROWS_AS(finalize_run_config(s), ConfigError);

  RunConfig d = single_node_config(0.9, 1.0);
  d.warmup = -1;  // derived default
  finalize_run_config(d);
  CHECK(d.warmup == d.steps / 10);
  CHECK(d.agent.decay_steps == d.steps / 2);
}

TEST_CASE("multi-seed runs aggregate one result per seed") {
  RunConfig cfg = single_node_config(0.8, 1.0);
  cfg.steps = 5000;
  cfg.warmup = 500;
  cfg.window = 500;
  cfg.seeds = {1, 2, 3};
  const std::vector<TrainResult> results = train_all(cfg);
  REQUIRE(results.size() == 3);
  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].summary.seed == cfg.seeds[i]);
    CHECK(!results[i].metrics.empty());
  }
  // distinct seeds explore differently
  CHECK(results[0].summary.reward_sum != results[1].summary.reward_sum);
}
