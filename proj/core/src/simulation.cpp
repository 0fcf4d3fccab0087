#include "qadmit/simulation.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace qadmit {

double end_to_end_delay(const Job& job) {
  if (!job.departure_time) {
    throw std::logic_error("job " + std::to_string(job.id) +
                           " has not departed yet");
  }
  return *job.departure_time - job.arrival_time;
}

NetworkSim::NetworkSim(Topology topology, DistributionSpec arrival,
                       std::uint64_t seed)
    : topo_(std::move(topology)),
      arrival_(arrival),
      arrival_stream_(seed, "arrival"),
      routing_stream_(seed, "routing") {
  const int n = topo_.node_count();
  service_streams_.reserve(n);
  for (int i = 0; i < n; ++i) {
    service_streams_.emplace_back(seed, "service/" + std::to_string(i));
  }
  nodes_.resize(n);
  stats_.resize(n);
}

StateVector NetworkSim::observe_state() const {
  StateVector q(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    q[i] = nodes_[i].occupancy();
  }
  return q;
}

const Job* NetworkSim::find_job(JobId id) const {
  const auto it = jobs_.find(id);
  return it == jobs_.end() ? nullptr : &it->second;
}

std::int64_t NetworkSim::in_system_count() const {
  std::int64_t total = 0;
  for (const auto& node : nodes_) total += node.occupancy();
  return total;
}

NodeStats NetworkSim::node_stats(int node) const {
  NodeStats s = stats_[node];
  s.area_in_system +=
      nodes_[node].occupancy() * (clock_ - nodes_[node].last_change);
  return s;
}

NodeOccupancy NetworkSim::node_occupancy(int node) const {
  return {static_cast<int>(nodes_[node].waiting.size()),
          static_cast<int>(nodes_[node].in_service.size())};
}

std::optional<NetworkSim::NextCompletion> NetworkSim::next_completion() const {
  std::optional<NextCompletion> best;
  for (int n = 0; n < static_cast<int>(nodes_.size()); ++n) {
    const auto& slots = nodes_[n].in_service;
    for (int i = 0; i < static_cast<int>(slots.size()); ++i) {
      if (!best || slots[i].completion_time < best->time ||
          (slots[i].completion_time == best->time &&
           (n < best->node ||
            (n == best->node &&
             slots[i].job < nodes_[best->node].in_service[best->slot].job)))) {
        best = NextCompletion{slots[i].completion_time, n, i};
      }
    }
  }
  return best;
}

void NetworkSim::touch(int node, double now) {
  auto& st = nodes_[node];
  stats_[node].area_in_system += st.occupancy() * (now - st.last_change);
  st.last_change = now;
}

void NetworkSim::trace_event(double t, const char* kind, int node,
                             std::int64_t job) {
  if (trace_) {
    *trace_ << t << ' ' << kind << ' ' << node << ' ' << job << '\n';
  }
}

void NetworkSim::start_service(int node, JobId id, double now) {
  const double s = sample(topo_.node(node).service, service_streams_[node]);
  nodes_[node].in_service.push_back({id, now + s});
  trace_event(now, "start", node, static_cast<std::int64_t>(id));
}

void NetworkSim::node_arrival(int node, JobId id, double now) {
  touch(node, now);
  Job& job = jobs_.at(id);
  job.path.push_back(node);
  job.current_node = node;
  job.node_entry_time = now;
  ++stats_[node].arrivals;
  auto& st = nodes_[node];
  if (static_cast<int>(st.in_service.size()) < topo_.node(node).servers) {
    start_service(node, id, now);
  } else {
    st.waiting.push_back(id);
  }
}

void NetworkSim::handle_completion(const NextCompletion& c) {
  clock_ = c.time;
  auto& st = nodes_[c.node];
  const JobId id = st.in_service[c.slot].job;

  touch(c.node, c.time);
  st.in_service[c.slot] = st.in_service.back();
  st.in_service.pop_back();
  trace_event(c.time, "complete", c.node, static_cast<std::int64_t>(id));

  Job& job = jobs_.at(id);
  ++stats_[c.node].departures;
  stats_[c.node].sojourn_sum += c.time - job.node_entry_time;

  // Work conservation: the freed server picks up the head of the FIFO.
  if (!st.waiting.empty()) {
    const JobId next = st.waiting.front();
    st.waiting.pop_front();
    start_service(c.node, next, c.time);
  }

  const auto& succ = topo_.successors(c.node);
  if (succ.empty()) {
    job.departure_time = c.time;
    const double delay = c.time - job.arrival_time;
    step_departures_.push_back({id, delay, c.time});
    ++departed_;
    delay_sum_ += delay;
    trace_event(c.time, "depart", c.node, static_cast<std::int64_t>(id));
    if (!keep_departed_) {
      jobs_.erase(id);
    }
    return;
  }

  int next_node = succ.front();
  if (succ.size() > 1) {
    const auto& probs = topo_.branch_probabilities(c.node);
    const double u = routing_stream_.uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < succ.size(); ++i) {
      cum += probs[i];
      if (u < cum) {
        next_node = succ[i];
        break;
      }
      next_node = succ[i];  // rounding leftovers land on the last branch
    }
  }
  trace_event(c.time, "transfer", next_node, static_cast<std::int64_t>(id));
  node_arrival(next_node, id, c.time);
}

StepOutcome NetworkSim::advance_to_next_arrival() {
  if (arrival_pending_) {
    throw std::logic_error("pending arrival was neither injected nor discarded");
  }
  const double next_arrival =
      last_arrival_time_ + sample(arrival_, arrival_stream_);

  while (auto c = next_completion()) {
    if (c->time > next_arrival) break;
    handle_completion(*c);
  }

  clock_ = next_arrival;
  last_arrival_time_ = next_arrival;
  arrival_pending_ = true;
  trace_event(clock_, "arrival", topo_.ingress(), -1);

  StepOutcome out;
  out.state = observe_state();
  out.departed = std::move(step_departures_);
  step_departures_.clear();
  out.clock = clock_;
  return out;
}

JobId NetworkSim::inject_arrival() {
  if (!arrival_pending_) {
    throw std::logic_error("inject_arrival outside an arrival instant");
  }
  arrival_pending_ = false;
  const JobId id = next_job_id_++;
  Job job;
  job.id = id;
  job.arrival_time = clock_;
  jobs_.emplace(id, std::move(job));
  ++injected_;
  trace_event(clock_, "inject", topo_.ingress(), static_cast<std::int64_t>(id));
  node_arrival(topo_.ingress(), id, clock_);
  return id;
}

void NetworkSim::discard_arrival() {
  if (!arrival_pending_) {
    throw std::logic_error("discard_arrival outside an arrival instant");
  }
  arrival_pending_ = false;
  ++discarded_;
}

}  // namespace qadmit
