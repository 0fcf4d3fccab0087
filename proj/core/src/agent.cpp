#include "qadmit/agent.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qadmit {

RewardParams make_reward_params(double lambda, double eps_ub, double d_ub) {
  if (!(lambda >= 0.0)) {
    throw ConfigError("lambda must be >= 0, got " + std::to_string(lambda));
  }
  if (!(eps_ub > 0.0 && eps_ub < 1.0)) {
    throw ConfigError("eps_ub must be in (0,1), got " + std::to_string(eps_ub));
  }
  if (!(d_ub > 0.0)) {
    throw ConfigError("d_ub must be > 0, got " + std::to_string(d_ub));
  }
  return RewardParams{lambda, eps_ub, d_ub};
}

double reward_value(Action action, std::optional<double> delay,
                    const RewardParams& params) {
  if (!delay) {
    throw std::logic_error("reward requires a realized delay");
  }
  const bool meets = params.meets_bound(*delay);
  if (action == Action::Accept) {
    return meets ? params.accept_meet() : params.accept_miss();
  }
  return meets ? params.reject_meet() : params.reject_miss();
}

void validate(const AgentConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    throw ConfigError("alpha must be in (0,1], got " + std::to_string(cfg.alpha));
  }
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
    throw ConfigError("beta must be in (0,1], got " + std::to_string(cfg.beta));
  }
  if (!(cfg.eps_start >= cfg.eps_end && cfg.eps_start <= 1.0 &&
        cfg.eps_end >= 0.0)) {
    throw ConfigError("need 1 >= eps_start >= eps_end >= 0");
  }
  if (cfg.decay_steps < 0) {
    throw ConfigError("decay_steps must be >= 0");
  }
}

double epsilon_at(const AgentConfig& cfg, std::int64_t step) {
  if (cfg.decay_steps <= 0 || step >= cfg.decay_steps) {
    return cfg.eps_end;
  }
  const double frac = static_cast<double>(step) / cfg.decay_steps;
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

double QTable::value(const StateVector& s, Action a) const {
  const auto it = values_.find(s);
  if (it == values_.end()) return 0.0;
  return a == Action::Accept ? it->second.first : it->second.second;
}

double QTable::max_value(const StateVector& s) const {
  const auto it = values_.find(s);
  if (it == values_.end()) return 0.0;
  return std::max(it->second.first, it->second.second);
}

Action QTable::greedy_action(const StateVector& s) const {
  const auto it = values_.find(s);
  if (it == values_.end()) return Action::Accept;
  return it->second.first >= it->second.second ? Action::Accept
                                               : Action::Reject;
}

void QTable::add(const StateVector& s, Action a, double delta) {
  auto& entry = values_[s];
  (a == Action::Accept ? entry.first : entry.second) += delta;
}

int QTable::state_dimension() const {
  if (values_.empty()) return -1;
  return static_cast<int>(values_.begin()->first.size());
}

std::string QTable::to_text() const {
  std::vector<const StateVector*> states;
  states.reserve(values_.size());
  for (const auto& [s, v] : values_) states.push_back(&s);
  std::sort(states.begin(), states.end(),
            [](const StateVector* a, const StateVector* b) { return *a < *b; });

  std::string out;
  char buf[64];
  for (const StateVector* s : states) {
    const auto& [qa, qr] = values_.at(*s);
    std::string key;
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (i) key += ',';
      key += std::to_string((*s)[i]);
    }
    std::snprintf(buf, sizeof(buf), "%.17g", qa);
    out += key + " A " + buf + "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", qr);
    out += key + " R " + buf + "\n";
  }
  return out;
}

QTable QTable::from_text(std::string_view text) {
  QTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, act;
    double value;
    if (!(ls >> key >> act >> value) || (act != "A" && act != "R")) {
      throw ConfigError("qtable row " + std::to_string(row) +
                        ": expected 'q1,...,qN A|R value'");
    }
    StateVector s;
    std::size_t pos = 0;
    while (pos <= key.size()) {
      const std::size_t comma = key.find(',', pos);
      const std::string part =
          key.substr(pos, comma == std::string::npos ? comma : comma - pos);
      try {
        std::size_t used = 0;
        s.push_back(std::stoi(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        throw ConfigError("qtable row " + std::to_string(row) +
                          ": bad state component '" + part + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!table.values_.empty() &&
        static_cast<int>(s.size()) != table.state_dimension()) {
      throw ConfigError("qtable row " + std::to_string(row) +
                        ": inconsistent state dimension");
    }
    auto& entry = table.values_[s];
    (act == "A" ? entry.first : entry.second) = value;
  }
  return table;
}

ActionChoice select_action(const StateVector& state, const QTable& q,
                           const AgentConfig& cfg, RngStream& stream,
                           std::int64_t step) {
  const double eps = epsilon_at(cfg, step);
  if (stream.uniform01() < eps) {
    const Action a =
        stream.uniform01() < 0.5 ? Action::Accept : Action::Reject;
    return {a, false};
  }
  return {q.greedy_action(state), true};
}

void ExperienceBuffer::record(PendingExperience exp) {
  const JobId id = exp.job;
  if (!pending_.emplace(id, std::move(exp)).second) {
    throw std::logic_error("pending experience already recorded for job " +
                           std::to_string(id));
  }
}

CompletedExperience ExperienceBuffer::complete(JobId job, double reward) {
  const auto it = pending_.find(job);
  if (it == pending_.end()) {
    throw std::logic_error("no pending experience for job " +
                           std::to_string(job));
  }
  CompletedExperience done{std::move(it->second.state), it->second.action,
                           std::move(it->second.next_state),
                           it->second.greedy, reward};
  pending_.erase(it);
  return done;
}

double td_error(const CompletedExperience& exp, const QTable& q,
                double avg_reward) {
  return exp.reward - avg_reward + q.max_value(exp.next_state) -
         q.value(exp.state, exp.action);
}

void apply_update(const CompletedExperience& exp, AgentState& agent,
                  const AgentConfig& cfg) {
  const double delta = td_error(exp, agent.q, agent.avg_reward);
  agent.q.add(exp.state, exp.action, cfg.alpha * delta);
  if (exp.greedy) {
    agent.avg_reward += cfg.beta * delta;
  }
}

}  // namespace qadmit
