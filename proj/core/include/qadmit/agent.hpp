#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "qadmit/random.hpp"
#include "qadmit/types.hpp"

namespace qadmit {

enum class Action : int { Accept = 0, Reject = 1 };

/// Lagrangian-shaped reward table. With multiplier `lambda`, violation budget
/// `eps_ub` and delay bound `d_ub`, accepted jobs earn eps_ub*lambda when they
/// meet the bound and -(1-eps_ub)*lambda when they miss it; rejections earn -1
/// when the (hypothetical) delay would have met the bound and 0 otherwise.
/// A delay equal to d_ub counts as a violation.
struct RewardParams {
  double lambda = 0.0;
  double eps_ub = 0.1;
  double d_ub = 15.0;

  double accept_meet() const { return eps_ub * lambda; }            // r1A
  double accept_miss() const { return -(1.0 - eps_ub) * lambda; }   // r2A
  double reject_meet() const { return -1.0; }                       // r1R
  double reject_miss() const { return 0.0; }                        // r2R

  bool meets_bound(double delay) const { return delay < d_ub; }
};

RewardParams make_reward_params(double lambda, double eps_ub, double d_ub);

/// Eq.-style case split on (action, realized delay). The delay must be
/// present: for accepted jobs it is known at departure, for rejected jobs it
/// comes from the shadow measurement.
double reward_value(Action action, std::optional<double> delay,
                    const RewardParams& params);

struct AgentConfig {
  double alpha = 0.01;          // Q learning rate
  double beta = 0.001;          // r̄ step size
  double eps_start = 0.3;
  double eps_end = 0.01;
  std::int64_t decay_steps = 0; // 0 = resolved to half the run by the harness
};

void validate(const AgentConfig& cfg);

/// Linear decay from eps_start to eps_end over decay_steps, then flat.
double epsilon_at(const AgentConfig& cfg, std::int64_t step);

/// Differential action values with lazy state creation; unvisited entries
/// read as 0.
class QTable {
 public:
  double value(const StateVector& s, Action a) const;
  double max_value(const StateVector& s) const;
  /// Ties break toward Accept.
  Action greedy_action(const StateVector& s) const;
  void add(const StateVector& s, Action a, double delta);
  bool contains(const StateVector& s) const { return values_.count(s) > 0; }
  std::size_t state_count() const { return values_.size(); }
  int state_dimension() const;  // -1 when empty

  /// One row per (state, action): "q1,...,qN A|R value", states sorted
  /// lexicographically, A before R, values printed losslessly.
  std::string to_text() const;
  static QTable from_text(std::string_view text);  // ConfigError with row number

 private:
  std::unordered_map<StateVector, std::pair<double, double>, StateVectorHash>
      values_;
};

struct ActionChoice {
  Action action = Action::Accept;
  bool greedy = false;
};

/// ε-greedy over {Accept, Reject}: with probability ε a uniform random action
/// (greedy flag false, even if it happens to match the argmax), otherwise the
/// argmax with ties toward Accept (flag true).
ActionChoice select_action(const StateVector& state, const QTable& q,
                           const AgentConfig& cfg, RngStream& stream,
                           std::int64_t step);

struct PendingExperience {
  JobId job = 0;
  StateVector state;
  Action action = Action::Accept;
  StateVector next_state;
  bool greedy = false;
};

struct CompletedExperience {
  StateVector state;
  Action action = Action::Accept;
  StateVector next_state;
  bool greedy = false;
  double reward = 0.0;
};

/// Incomplete experiences of accepted-and-not-yet-departed jobs, keyed by job
/// id. Rejected jobs complete in their own step and never enter the buffer.
class ExperienceBuffer {
 public:
  void record(PendingExperience exp);                     // logic_error on duplicate
  CompletedExperience complete(JobId job, double reward); // logic_error on unknown
  bool contains(JobId job) const { return pending_.count(job) > 0; }
  std::size_t size() const { return pending_.size(); }

 private:
  std::unordered_map<JobId, PendingExperience> pending_;
};

struct AgentState {
  QTable q;
  double avg_reward = 0.0;  // r̄
};

/// δ = r - r̄ + max_a Q(s',a) - Q(s,a), against the current table and r̄.
double td_error(const CompletedExperience& exp, const QTable& q,
                double avg_reward);

/// Q(s,a) += α·δ for every completed experience; r̄ += β·δ only when the
/// decision was greedy. δ is evaluated before either mutation.
void apply_update(const CompletedExperience& exp, AgentState& agent,
                  const AgentConfig& cfg);

}  // namespace qadmit
