#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "qadmit/agent.hpp"
#include "qadmit/shadow.hpp"
#include "qadmit/simulation.hpp"
#include "qadmit/topology.hpp"

namespace qadmit {

struct RunConfig {
  TopologyConfig topology;
  DistributionSpec arrival = GammaSpec{};
  RewardParams control;
  AgentConfig agent;
  std::int64_t steps = 200000;
  std::int64_t warmup = -1;  // -1 resolves to steps/10
  std::int64_t window = 5000;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
};

/// Resolves defaulted fields (warmup, exploration decay horizon) and
/// validates every constraint, including the topology. Throws ConfigError.
void finalize_run_config(RunConfig& cfg);

struct MetricsRow {
  std::int64_t step = 0;
  double p_violation_accept = 0.0;  // fraction of the window's departures with d >= d_ub
  double objective = 0.0;           // -(rejections whose shadow delay met the bound)/steps
  double acceptance_rate = 0.0;
  double throughput = 0.0;          // departures per unit time
  double goodput = 0.0;             // deadline-meeting departures per unit time
  double r_bar = 0.0;
  std::uint64_t seed = 0;
};
using MetricsSeries = std::vector<MetricsRow>;

struct RunSummary {
  std::uint64_t seed = 0;
  MetricsRow final_window;
  double g_tilde = 0.0;  // r̄ averaged over the last 20% of steps
  std::int64_t steps = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t departed = 0;
  std::int64_t violations = 0;  // departures with d >= d_ub, whole run
  std::int64_t rejections_would_meet = 0;  // shadow delay < d_ub, whole run
  std::int64_t completed_experiences = 0;
  double reward_sum = 0.0;  // over completed experiences
  std::int64_t unseen_state_decisions = 0;  // greedy rollouts only
};

struct TrainResult {
  QTable q;
  MetricsSeries metrics;
  RunSummary summary;
  std::unordered_map<StateVector, std::int64_t, StateVectorHash> visits;
};

enum class PolicyMode { Train, Greedy, AlwaysAccept, AlwaysReject };

/// One seeded run of the arrival-step loop: observe the queue-length vector,
/// choose Accept/Reject, measure rejections in a shadow clone, and complete
/// each experience when its job departs. Train mode applies the R-learning
/// updates; Greedy mode follows `frozen` with ties toward Accept and, when
/// `greedy_rbar_beta` > 0, tracks r̄ without touching the Q values. `trace`
/// receives the simulator's event dump when non-null.
TrainResult run_policy(const RunConfig& cfg, std::uint64_t seed,
                       PolicyMode mode, const QTable* frozen = nullptr,
                       double greedy_rbar_beta = 0.0,
                       std::ostream* trace = nullptr);

TrainResult train(const RunConfig& cfg, std::uint64_t seed);
TrainResult evaluate(const RunConfig& cfg, const QTable& frozen,
                     std::uint64_t seed);
TrainResult baseline_no_ac(const RunConfig& cfg, std::uint64_t seed);

/// Runs one task per seed in cfg.seeds (in parallel), results in seed order.
std::vector<TrainResult> train_all(const RunConfig& cfg);
std::vector<TrainResult> baseline_all(const RunConfig& cfg);
std::vector<TrainResult> evaluate_all(const RunConfig& cfg, const QTable& frozen);

struct SweepRecord {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double g_tilde = 0.0;
  double p_violation_accept = 0.0;
  double objective = 0.0;
  double acceptance_rate = 0.0;
  double throughput = 0.0;
  double goodput = 0.0;
};

struct SweepLambdaSummary {
  double lambda = 0.0;
  double g_tilde_mean = 0.0;
  double g_tilde_stderr = 0.0;
  double p_violation_mean = 0.0;
  double objective_mean = 0.0;
  double acceptance_mean = 0.0;
  double throughput_mean = 0.0;
  double goodput_mean = 0.0;
  bool constraint_satisfied = false;  // p_violation_mean <= eps_ub
};

struct SweepResult {
  std::vector<SweepRecord> records;            // grid-major, then seed order
  std::vector<SweepLambdaSummary> per_lambda;  // grid order
  double lambda_star = 0.0;                    // argmin of g_tilde_mean
  std::size_t lambda_star_index = 0;
  double kkt_residual = 0.0;  // λ*·(P(d<d_ub|A) − (1−ε_ub)) at λ*
  bool constraint_satisfied_at_star = false;
};

/// Trains one controller per (λ, seed) over the grid and picks the λ
/// minimizing the seed-averaged g̃(λ). Runs are independent and execute
/// concurrently.
SweepResult lambda_sweep(const RunConfig& base, const std::vector<double>& grid);

}  // namespace qadmit
