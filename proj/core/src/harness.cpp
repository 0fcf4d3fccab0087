#include "qadmit/harness.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

namespace qadmit {

void finalize_run_config(RunConfig& cfg) {
  Topology::build(cfg.topology);  // full topology validation
  if (const auto* g = std::get_if<GammaSpec>(&cfg.arrival)) {
    gamma_from_rate_scv(g->rate, g->scv);
  } else {
    deterministic_from_value(std::get<DeterministicSpec>(cfg.arrival).value);
  }
  make_reward_params(cfg.control.lambda, cfg.control.eps_ub, cfg.control.d_ub);

  if (cfg.steps < 1) {
    throw ConfigError("run.steps must be >= 1");
  }
  if (cfg.warmup < 0) {
    cfg.warmup = cfg.steps / 10;
  }
  if (cfg.warmup >= cfg.steps) {
    throw ConfigError("run.steps must exceed run.warmup");
  }
  if (cfg.window < 100) {
    throw ConfigError("run.window must be >= 100");
  }
  if (cfg.agent.decay_steps < 0) {
    cfg.agent.decay_steps = cfg.steps / 2;
  }
  validate(cfg.agent);
  if (cfg.seeds.empty()) {
    throw ConfigError("run.seeds must be non-empty");
  }
}

namespace {

struct WindowTallies {
  std::int64_t steps = 0;
  std::int64_t accepts = 0;
  std::int64_t departures = 0;
  std::int64_t violations = 0;
  std::int64_t good = 0;
  std::int64_t rejections_would_meet = 0;
  double start_clock = 0.0;

  void reset(double clock) {
    *this = WindowTallies{};
    start_clock = clock;
  }
};

void run_parallel(std::size_t tasks, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                            tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < tasks;
           i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

TrainResult run_policy(const RunConfig& config, std::uint64_t seed,
                       PolicyMode mode, const QTable* frozen,
                       double greedy_rbar_beta, std::ostream* trace) {
  RunConfig cfg = config;
  finalize_run_config(cfg);
  if (mode == PolicyMode::Greedy && frozen == nullptr) {
    throw std::logic_error("Greedy mode needs a frozen Q table");
  }

  NetworkSim sim(Topology::build(cfg.topology), cfg.arrival, seed);
  sim.set_trace(trace);
  RngStream agent_stream(seed, "agent");
  RngStream shadow_stream(seed, "shadow");

  TrainResult result;
  AgentState agent;
  if (mode == PolicyMode::Greedy) {
    agent.q = *frozen;
  }
  ExperienceBuffer buffer;

  const std::int64_t tail_start = cfg.steps - cfg.steps / 5;
  double tail_rbar_sum = 0.0;
  std::int64_t tail_rbar_count = 0;

  WindowTallies window;
  RunSummary& summary = result.summary;
  summary.seed = seed;
  summary.steps = cfg.steps;

  StepOutcome outcome = sim.advance_to_next_arrival();
  StateVector state = std::move(outcome.state);

  const auto apply_experience = [&](const CompletedExperience& exp) {
    summary.reward_sum += exp.reward;
    ++summary.completed_experiences;
    switch (mode) {
      case PolicyMode::Train:
        apply_update(exp, agent, cfg.agent);
        break;
      case PolicyMode::Greedy:
        if (greedy_rbar_beta > 0.0 && exp.greedy) {
          agent.avg_reward +=
              greedy_rbar_beta * td_error(exp, agent.q, agent.avg_reward);
        }
        break;
      default:
        break;  // fixed policies keep tallies only
    }
  };

  for (std::int64_t step = 0; step < cfg.steps; ++step) {
    ActionChoice choice;
    switch (mode) {
      case PolicyMode::Train:
        choice = select_action(state, agent.q, cfg.agent, agent_stream, step);
        break;
      case PolicyMode::Greedy:
        if (!agent.q.contains(state)) ++summary.unseen_state_decisions;
        choice = {agent.q.greedy_action(state), true};
        break;
      case PolicyMode::AlwaysAccept:
        choice = {Action::Accept, true};
        break;
      case PolicyMode::AlwaysReject:
        choice = {Action::Reject, true};
        break;
    }
    ++result.visits[state];

    std::optional<JobId> accepted;
    std::optional<double> shadow_delay;
    if (choice.action == Action::Accept) {
      accepted = sim.inject_arrival();
      ++summary.accepted;
      ++window.accepts;
    } else {
      ShadowSim shadow(sim);
      shadow_delay = shadow.measure_hypothetical_delay(shadow_stream);
      sim.discard_arrival();
      ++summary.rejected;
    }

    outcome = sim.advance_to_next_arrival();

    if (accepted) {
      buffer.record(
          {*accepted, state, Action::Accept, outcome.state, choice.greedy});
    }

    // A rejection's reward exists at the decision instant, so its experience
    // is applied before the step's departures, which follow in time order.
    if (shadow_delay) {
      if (cfg.control.meets_bound(*shadow_delay)) {
        ++window.rejections_would_meet;
        ++summary.rejections_would_meet;
      }
      apply_experience({state, Action::Reject, outcome.state, choice.greedy,
                        reward_for_rejection(*shadow_delay, cfg.control)});
    }
    for (const Departure& dep : outcome.departed) {
      ++summary.departed;
      ++window.departures;
      if (cfg.control.meets_bound(dep.delay)) {
        ++window.good;
      } else {
        ++window.violations;
        ++summary.violations;
      }
      apply_experience(buffer.complete(
          dep.job, reward_value(Action::Accept, dep.delay, cfg.control)));
    }

    ++window.steps;
    if (step >= tail_start) {
      tail_rbar_sum += agent.avg_reward;
      ++tail_rbar_count;
    }

    const std::int64_t done = step + 1;
    if (done == cfg.warmup) {
      window.reset(outcome.clock);
    } else if (done > cfg.warmup && window.steps == cfg.window) {
      MetricsRow row;
      row.step = done;
      row.p_violation_accept =
          window.departures > 0
              ? static_cast<double>(window.violations) / window.departures
              : 0.0;
      row.objective =
          -static_cast<double>(window.rejections_would_meet) / window.steps;
      row.acceptance_rate = static_cast<double>(window.accepts) / window.steps;
      const double span = outcome.clock - window.start_clock;
      row.throughput = span > 0.0 ? window.departures / span : 0.0;
      row.goodput = span > 0.0 ? window.good / span : 0.0;
      row.r_bar = agent.avg_reward;
      row.seed = seed;
      result.metrics.push_back(row);
      window.reset(outcome.clock);
    }

    state = std::move(outcome.state);
  }

  summary.g_tilde =
      tail_rbar_count > 0 ? tail_rbar_sum / tail_rbar_count : agent.avg_reward;
  if (!result.metrics.empty()) {
    summary.final_window = result.metrics.back();
  } else {
    summary.final_window.seed = seed;
  }
  result.q = std::move(agent.q);
  return result;
}

TrainResult train(const RunConfig& cfg, std::uint64_t seed) {
  return run_policy(cfg, seed, PolicyMode::Train);
}

TrainResult evaluate(const RunConfig& cfg, const QTable& frozen,
                     std::uint64_t seed) {
  return run_policy(cfg, seed, PolicyMode::Greedy, &frozen);
}

TrainResult baseline_no_ac(const RunConfig& cfg, std::uint64_t seed) {
  return run_policy(cfg, seed, PolicyMode::AlwaysAccept);
}

namespace {

std::vector<TrainResult> run_all(const RunConfig& cfg,
                                 const std::function<TrainResult(std::uint64_t)>& one) {
  std::vector<TrainResult> results(cfg.seeds.size());
  run_parallel(cfg.seeds.size(),
               [&](std::size_t i) { results[i] = one(cfg.seeds[i]); });
  return results;
}

}  // namespace

std::vector<TrainResult> train_all(const RunConfig& cfg) {
  return run_all(cfg, [&](std::uint64_t s) { return train(cfg, s); });
}

std::vector<TrainResult> baseline_all(const RunConfig& cfg) {
  return run_all(cfg, [&](std::uint64_t s) { return baseline_no_ac(cfg, s); });
}

std::vector<TrainResult> evaluate_all(const RunConfig& cfg,
                                      const QTable& frozen) {
  return run_all(cfg, [&](std::uint64_t s) { return evaluate(cfg, frozen, s); });
}

SweepResult lambda_sweep(const RunConfig& base,
                         const std::vector<double>& grid) {
  if (grid.empty()) {
    throw ConfigError("lambda grid must be non-empty");
  }
  for (double l : grid) {
    if (!(l >= 0.0)) {
      throw ConfigError("lambda grid values must be >= 0");
    }
  }
  RunConfig cfg = base;
  finalize_run_config(cfg);

  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t tasks = grid.size() * n_seeds;
  std::vector<SweepRecord> records(tasks);
  run_parallel(tasks, [&](std::size_t i) {
    const std::size_t gi = i / n_seeds;
    const std::size_t si = i % n_seeds;
    RunConfig run_cfg = cfg;
    run_cfg.control.lambda = grid[gi];
    const TrainResult r = train(run_cfg, cfg.seeds[si]);
    records[i] = {grid[gi],
                  cfg.seeds[si],
                  r.summary.g_tilde,
                  r.summary.final_window.p_violation_accept,
                  r.summary.final_window.objective,
                  r.summary.final_window.acceptance_rate,
                  r.summary.final_window.throughput,
                  r.summary.final_window.goodput};
  });

  SweepResult result;
  result.records = std::move(records);
  result.per_lambda.reserve(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    SweepLambdaSummary s;
    s.lambda = grid[gi];
    double g_sq = 0.0;
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const SweepRecord& r = result.records[gi * n_seeds + si];
      s.g_tilde_mean += r.g_tilde;
      g_sq += r.g_tilde * r.g_tilde;
      s.p_violation_mean += r.p_violation_accept;
      s.objective_mean += r.objective;
      s.acceptance_mean += r.acceptance_rate;
      s.throughput_mean += r.throughput;
      s.goodput_mean += r.goodput;
    }
    const double n = static_cast<double>(n_seeds);
    s.g_tilde_mean /= n;
    s.p_violation_mean /= n;
    s.objective_mean /= n;
    s.acceptance_mean /= n;
    s.throughput_mean /= n;
    s.goodput_mean /= n;
    if (n_seeds > 1) {
      const double var =
          std::max(0.0, (g_sq - n * s.g_tilde_mean * s.g_tilde_mean) / (n - 1));
      s.g_tilde_stderr = std::sqrt(var / n);
    }
    s.constraint_satisfied = s.p_violation_mean <= cfg.control.eps_ub;
    result.per_lambda.push_back(s);
  }

  result.lambda_star_index = 0;
  for (std::size_t gi = 1; gi < result.per_lambda.size(); ++gi) {
    if (result.per_lambda[gi].g_tilde_mean <
        result.per_lambda[result.lambda_star_index].g_tilde_mean) {
      result.lambda_star_index = gi;
    }
  }
  const SweepLambdaSummary& star = result.per_lambda[result.lambda_star_index];
  result.lambda_star = star.lambda;
  result.kkt_residual =
      star.lambda * (cfg.control.eps_ub - star.p_violation_mean);
  result.constraint_satisfied_at_star = star.constraint_satisfied;
  return result;
}

}  // namespace qadmit
