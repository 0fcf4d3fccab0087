#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qadmit {

using JobId = std::uint64_t;

/// Per-node job counts (waiting + in service) observed at an external
/// arrival instant.
using StateVector = std::vector<int>;

struct StateVectorHash {
  std::size_t operator()(const StateVector& s) const noexcept {
    // FNV-1a over the components; stable across platforms.
    std::uint64_t h = 1469598103934665603ull;
    for (int q : s) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(q));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace qadmit
