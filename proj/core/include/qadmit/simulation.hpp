#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "qadmit/random.hpp"
#include "qadmit/topology.hpp"
#include "qadmit/types.hpp"

namespace qadmit {

struct Job {
  JobId id = 0;
  double arrival_time = 0.0;  // external arrival instant
  std::vector<int> path;      // nodes visited, in order
  std::optional<double> departure_time;

  // transient while the job is inside the network
  int current_node = -1;
  double node_entry_time = 0.0;
};

/// departure - external arrival; throws std::logic_error while in flight.
double end_to_end_delay(const Job& job);

struct Departure {
  JobId job = 0;
  double delay = 0.0;
  double time = 0.0;
};

struct StepOutcome {
  StateVector state;                // observed at the arrival instant, before the decision
  std::vector<Departure> departed;  // jobs that left the network during the step
  double clock = 0.0;               // the arrival instant
};

struct NodeStats {
  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  double area_in_system = 0.0;  // integral of q_n(t) dt up to the current clock
  double sojourn_sum = 0.0;     // sum of (node departure - node arrival)
};

struct NodeOccupancy {
  int waiting = 0;
  int in_service = 0;
};

/// Event-driven simulation of a multi-server FCFS queueing network. The
/// simulator owns the external arrival process and advances one step per
/// arrival: all service completions (and the instantaneous transfers they
/// trigger) with time <= the arrival instant are processed first, then the
/// state is observed. The pending arrival must be resolved through
/// inject_arrival() or discard_arrival() before the next advance.
///
/// Ties execute completions before arrivals, then by node index, then job id.
/// Service times are drawn when service starts; routing is drawn when a job
/// completes service at a branch node. Streams: "arrival", "service/<n>",
/// "routing".
class NetworkSim {
 public:
  NetworkSim(Topology topology, DistributionSpec arrival, std::uint64_t seed);

  StepOutcome advance_to_next_arrival();
  JobId inject_arrival();
  void discard_arrival();
  bool arrival_pending() const { return arrival_pending_; }

  StateVector observe_state() const;
  double clock() const { return clock_; }
  const Topology& topology() const { return topo_; }

  const Job* find_job(JobId id) const;
  /// Keep records of departed jobs (for traces and hand-checked tests).
  void set_keep_departed(bool keep) { keep_departed_ = keep; }
  /// One line per event: clock kind node job. nullptr disables.
  void set_trace(std::ostream* sink) { trace_ = sink; }

  std::int64_t injected_count() const { return injected_; }
  std::int64_t discarded_count() const { return discarded_; }
  std::int64_t departed_count() const { return departed_; }
  std::int64_t in_system_count() const;
  double delay_sum() const { return delay_sum_; }
  /// Node tallies with the occupancy integral extended to the current clock.
  NodeStats node_stats(int node) const;
  NodeOccupancy node_occupancy(int node) const;

 private:
  friend class ShadowSim;

  struct ServiceSlot {
    JobId job;
    double completion_time;
  };
  struct NodeState {
    std::deque<JobId> waiting;
    std::vector<ServiceSlot> in_service;
    double last_change = 0.0;

    int occupancy() const {
      return static_cast<int>(waiting.size() + in_service.size());
    }
  };
  struct NextCompletion {
    double time;
    int node;
    int slot;
  };

  std::optional<NextCompletion> next_completion() const;
  void touch(int node, double now);
  void node_arrival(int node, JobId id, double now);
  void start_service(int node, JobId id, double now);
  void handle_completion(const NextCompletion& c);
  void trace_event(double t, const char* kind, int node, std::int64_t job);

  Topology topo_;
  DistributionSpec arrival_;
  RngStream arrival_stream_;
  RngStream routing_stream_;
  std::vector<RngStream> service_streams_;

  std::vector<NodeState> nodes_;
  std::vector<NodeStats> stats_;
  std::unordered_map<JobId, Job> jobs_;
  std::vector<Departure> step_departures_;

  double clock_ = 0.0;
  double last_arrival_time_ = 0.0;
  bool arrival_pending_ = false;
  JobId next_job_id_ = 0;

  std::int64_t injected_ = 0;
  std::int64_t discarded_ = 0;
  std::int64_t departed_ = 0;
  double delay_sum_ = 0.0;

  bool keep_departed_ = false;
  std::ostream* trace_ = nullptr;
};

}  // namespace qadmit
