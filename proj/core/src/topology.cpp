#include "qadmit/topology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qadmit {
namespace {

std::string node_str(int n) { return "node " + std::to_string(n); }

}  // namespace

Topology Topology::build(const TopologyConfig& config) {
  const int n = static_cast<int>(config.nodes.size());
  if (n == 0) {
    throw ConfigError("topology must have at least one node");
  }
  for (int i = 0; i < n; ++i) {
    const NodeConfig& nc = config.nodes[i];
    if (nc.servers < 1) {
      throw ConfigError(node_str(i) + ": server count must be >= 1");
    }
    // Re-validate distribution parameters regardless of how the spec was built.
    if (const auto* g = std::get_if<GammaSpec>(&nc.service)) {
      gamma_from_rate_scv(g->rate, g->scv);
    } else {
      deterministic_from_value(std::get<DeterministicSpec>(nc.service).value);
    }
  }

  Topology topo;
  topo.nodes_ = config.nodes;
  topo.successors_.assign(n, {});
  topo.branch_probs_.assign(n, {});

  std::vector<int> indegree(n, 0);
  for (const auto& [from, to] : config.edges) {
    if (from < 0 || from >= n || to < 0 || to >= n) {
      throw ConfigError("edge [" + std::to_string(from) + "," +
                        std::to_string(to) + "] references a missing node");
    }
    if (from == to) {
      throw ConfigError(node_str(from) + ": self-loop edge");
    }
    auto& succ = topo.successors_[from];
    if (std::find(succ.begin(), succ.end(), to) != succ.end()) {
      throw ConfigError("duplicate edge [" + std::to_string(from) + "," +
                        std::to_string(to) + "]");
    }
    succ.push_back(to);
    ++indegree[to];
  }

  // Kahn's algorithm; leftover nodes mean a cycle.
  {
    std::vector<int> degree = indegree;
    std::vector<int> ready;
    for (int i = 0; i < n; ++i) {
      if (degree[i] == 0) ready.push_back(i);
    }
    int visited = 0;
    while (!ready.empty()) {
      const int u = ready.back();
      ready.pop_back();
      ++visited;
      for (int v : topo.successors_[u]) {
        if (--degree[v] == 0) ready.push_back(v);
      }
    }
    if (visited != n) {
      throw ConfigError("topology graph contains a cycle");
    }
  }

  std::vector<int> entry_nodes;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) entry_nodes.push_back(i);
  }
  if (entry_nodes.size() != 1) {
    throw ConfigError("topology must have exactly one ingress, found " +
                      std::to_string(entry_nodes.size()));
  }
  topo.ingress_ = entry_nodes.front();

  // Every node must be reachable from the ingress.
  {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{topo.ingress_};
    seen[topo.ingress_] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : topo.successors_[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!seen[i]) {
        throw ConfigError(node_str(i) + " is not reachable from the ingress");
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto succ_count = topo.successors_[i].size();
    const auto it = config.branch_probs.find(i);
    if (succ_count > 1) {
      if (it == config.branch_probs.end()) {
        throw ConfigError(node_str(i) + " has " + std::to_string(succ_count) +
                          " successors but no branch probabilities");
      }
      const auto& probs = it->second;
      if (probs.size() != succ_count) {
        throw ConfigError(node_str(i) + ": expected " +
                          std::to_string(succ_count) +
                          " branch probabilities, got " +
                          std::to_string(probs.size()));
      }
      double sum = 0.0;
      for (double p : probs) {
        if (!(p > 0.0)) {
          throw ConfigError(node_str(i) + ": branch probabilities must be > 0");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError(node_str(i) + ": branch probabilities sum to " +
                          std::to_string(sum) + ", expected 1");
      }
      topo.branch_probs_[i] = probs;
    } else if (it != config.branch_probs.end()) {
      throw ConfigError(node_str(i) +
                        " has branch probabilities but fewer than 2 successors");
    }
  }

  return topo;
}

}  // namespace qadmit
