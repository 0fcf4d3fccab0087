#include "qadmit/shadow.hpp"

#include <stdexcept>

namespace qadmit {

ShadowSim::ShadowSim(const NetworkSim& real)
    : topo_(&real.topo_), clock_(real.clock_) {
  nodes_.resize(real.nodes_.size());
  for (std::size_t n = 0; n < real.nodes_.size(); ++n) {
    const auto& src = real.nodes_[n];
    auto& dst = nodes_[n];
    dst.waiting.assign(src.waiting.size(), false);
    dst.in_service.reserve(src.in_service.size());
    for (const auto& slot : src.in_service) {
      dst.in_service.push_back({slot.completion_time, false});
    }
  }
}

StateVector ShadowSim::observe_state() const {
  StateVector q(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    q[i] = static_cast<int>(nodes_[i].waiting.size() +
                            nodes_[i].in_service.size());
  }
  return q;
}

void ShadowSim::enter_node(int node, bool probe, double now,
                           RngStream& stream) {
  auto& st = nodes_[node];
  if (static_cast<int>(st.in_service.size()) < topo_->node(node).servers) {
    const double s = sample(topo_->node(node).service, stream);
    st.in_service.push_back({now + s, probe});
  } else {
    st.waiting.push_back(probe);
  }
}

double ShadowSim::measure_hypothetical_delay(RngStream& shadow_stream) {
  if (used_) {
    throw std::logic_error("shadow already consumed");
  }
  used_ = true;

  const double injected_at = clock_;
  enter_node(topo_->ingress(), true, clock_, shadow_stream);

  for (;;) {
    // Earliest completion, ties by node index then slot order.
    int best_node = -1;
    int best_slot = -1;
    double best_time = 0.0;
    for (int n = 0; n < static_cast<int>(nodes_.size()); ++n) {
      const auto& slots = nodes_[n].in_service;
      for (int i = 0; i < static_cast<int>(slots.size()); ++i) {
        if (best_node < 0 || slots[i].completion_time < best_time) {
          best_node = n;
          best_slot = i;
          best_time = slots[i].completion_time;
        }
      }
    }
    if (best_node < 0) {
      throw std::logic_error("shadow ran out of events before the probe left");
    }

    clock_ = best_time;
    auto& st = nodes_[best_node];
    const bool probe = st.in_service[best_slot].probe;
    st.in_service[best_slot] = st.in_service.back();
    st.in_service.pop_back();

    if (!st.waiting.empty()) {
      const bool next_probe = st.waiting.front();
      st.waiting.pop_front();
      const double s = sample(topo_->node(best_node).service, shadow_stream);
      st.in_service.push_back({clock_ + s, next_probe});
    }

    const auto& succ = topo_->successors(best_node);
    if (succ.empty()) {
      if (probe) {
        return clock_ - injected_at;
      }
      continue;
    }
    int next_node = succ.front();
    if (succ.size() > 1) {
      const auto& probs = topo_->branch_probabilities(best_node);
      const double u = shadow_stream.uniform01();
      double cum = 0.0;
      for (std::size_t i = 0; i < succ.size(); ++i) {
        cum += probs[i];
        if (u < cum) {
          next_node = succ[i];
          break;
        }
        next_node = succ[i];
      }
    }
    enter_node(next_node, probe, clock_, shadow_stream);
  }
}

}  // namespace qadmit
