#pragma once

#include <deque>
#include <vector>

#include "qadmit/agent.hpp"
#include "qadmit/simulation.hpp"

namespace qadmit {

/// Snapshot of the real network taken at an external-arrival instant, used to
/// measure the end-to-end delay a rejected job would have seen. Residual
/// completion times of in-service jobs are copied exactly; waiting jobs carry
/// no service times yet (they are drawn at service start, from the dedicated
/// shadow stream, as is any routing). No external arrivals ever enter a
/// shadow, so the fast-forward is finite. The snapshot references the real
/// sim's topology and must not outlive it; it never mutates the real sim.
class ShadowSim {
 public:
  explicit ShadowSim(const NetworkSim& real);

  StateVector observe_state() const;
  double clock() const { return clock_; }

  /// Injects the rejected job at the ingress and processes events until it
  /// leaves the network; returns its end-to-end delay. One-shot.
  double measure_hypothetical_delay(RngStream& shadow_stream);

 private:
  struct Slot {
    double completion_time;
    bool probe;
  };
  struct Node {
    std::deque<bool> waiting;  // true = the probe
    std::vector<Slot> in_service;
  };

  void enter_node(int node, bool probe, double now, RngStream& stream);

  const Topology* topo_;
  std::vector<Node> nodes_;
  double clock_;
  bool used_ = false;
};

/// -1 when the hypothetical delay meets the bound (an unnecessary rejection),
/// 0 otherwise. The caller pairs this with the next state observed in the
/// real environment.
inline double reward_for_rejection(double delay, const RewardParams& params) {
  return reward_value(Action::Reject, delay, params);
}

}  // namespace qadmit
