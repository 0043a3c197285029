#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acceldse/hwmodel.hpp"
#include "acceldse/netmodel.hpp"

namespace acceldse {

// One pipeline stage: first layer (1-based) and number of consecutive
// layers. Idle cores carry (0, 0).
struct StageAssign {
  int64_t l_initial = 0;
  int64_t n_c = 0;
};

struct PartitionPlan {
  std::vector<StageAssign> stages;      // exactly k entries
  std::vector<double> stage_latencies;  // sums of assigned layer latencies
  double max_latency = 0.0;
  double speedup = 0.0;  // sum(D) / max_latency, within [1, k]
};

// Minimize the maximum stage latency over contiguous partitions of D into k
// stages. Branch and bound: stages accumulate layers until the running sum
// first exceeds the global average sum(D)/k, branch on including/excluding
// that boundary layer, seed the incumbent with the include-only greedy plan,
// prune any partial stage whose sum reaches the incumbent. The returned plan
// is the lexicographically smallest optimal cut sequence; trailing idle
// cores get (0, 0). Throws ValidationError for empty D, negative entries,
// or k < 1.
PartitionPlan bnb_partition(const std::vector<double>& latencies, int64_t k);

// Reference dynamic program over the same search space; returns the optimal
// max stage latency.
double dp_oracle_partition(const std::vector<double>& latencies, int64_t k);

// sum(D) / max_latency for a plan over D.
double speedup(const std::vector<double>& latencies,
               const PartitionPlan& plan);

struct NetworkPartition {
  std::vector<std::string> layer_names;  // report rows, Input skipped
  std::vector<double> layer_latencies;
  PartitionPlan plan;
};

// Simulate the network under the config, then partition its per-layer
// latencies across k cores.
NetworkPartition partition_network(const NetworkTopology& net,
                                   const AcceleratorConfig& config, int64_t k);

}  // namespace acceldse
