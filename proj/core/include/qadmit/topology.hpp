#pragma once

#include <map>
#include <utility>
#include <vector>

#include "qadmit/random.hpp"

namespace qadmit {

struct NodeConfig {
  int servers = 1;
  DistributionSpec service = GammaSpec{};
};

/// Raw topology description, as it appears in a run config. Node indices are
/// 0-based. `branch_probs` maps a node with more than one outgoing edge to
/// one probability per successor, in the order its edges are listed.
struct TopologyConfig {
  std::vector<NodeConfig> nodes;
  std::vector<std::pair<int, int>> edges;
  std::map<int, std::vector<double>> branch_probs;
};

/// Validated acyclic service network: a single ingress from which every node
/// is reachable; egress nodes are those with no successors. A tandem chain is
/// the special case without branch groups.
class Topology {
 public:
  static Topology build(const TopologyConfig& config);  // throws ConfigError

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int ingress() const { return ingress_; }
  const NodeConfig& node(int n) const { return nodes_[n]; }
  const std::vector<int>& successors(int n) const { return successors_[n]; }
  /// Empty unless the node has more than one successor.
  const std::vector<double>& branch_probabilities(int n) const {
    return branch_probs_[n];
  }
  bool is_egress(int n) const { return successors_[n].empty(); }

 private:
  Topology() = default;

  std::vector<NodeConfig> nodes_;
  std::vector<std::vector<int>> successors_;
  std::vector<std::vector<double>> branch_probs_;
  int ingress_ = 0;
};

inline Topology build_topology(const TopologyConfig& config) {
  return Topology::build(config);
}

}  // namespace qadmit
