#include "acceldse/partition.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>

#include "acceldse/rsim.hpp"

namespace acceldse {

namespace {

double stage_sum(const std::vector<double>& lat, int64_t first, int64_t count) {
  double s = 0.0;
  for (int64_t i = first; i < first + count; ++i) s += lat[static_cast<size_t>(i)];
  return s;
}

// Greedy seed: each stage absorbs layers while it stays at or below the
// average of the remaining work, always taking at least one and leaving one
// for every later stage. Feasible by construction; its bottleneck primes the
// search incumbent.
double greedy_seed(const std::vector<double>& lat, int64_t k) {
  const int64_t n = static_cast<int64_t>(lat.size());
  double remaining = std::accumulate(lat.begin(), lat.end(), 0.0);
  double bottleneck = 0.0;
  int64_t i = 0;
  for (int64_t s = 0; s < k && i < n; ++s) {
    const int64_t stages_left = k - s;
    double sum = 0.0;
    if (stages_left == 1) {
      sum = stage_sum(lat, i, n - i);
      i = n;
    } else {
      const double avg = remaining / static_cast<double>(stages_left);
      while (i < n && n - i > stages_left - 1 &&
             (sum == 0.0 || sum + lat[static_cast<size_t>(i)] <= avg)) {
        sum += lat[static_cast<size_t>(i)];
        ++i;
      }
    }
    bottleneck = std::max(bottleneck, sum);
    remaining -= sum;
  }
  return bottleneck;
}

// Exact minimal bottleneck via branch and bound. Each node grows the stage
// under construction; candidate stage ends are visited balanced-first,
// fanning out from the longest prefix at or below the average of the
// remaining work, so near-even splits set a tight incumbent early. Three
// lower bounds prune: the partial bottleneck, the remaining work spread
// over the remaining stages, and the largest single layer still unplaced.
// Both fan directions stop once their bound exceeds the incumbent (stage
// sums grow upward, the remaining-work spread grows downward).
double bnb_bottleneck(const std::vector<double>& lat, int64_t k) {
  const int64_t n = static_cast<int64_t>(lat.size());
  std::vector<double> prefix(static_cast<size_t>(n) + 1, 0.0);
  for (int64_t i = 0; i < n; ++i)
    prefix[static_cast<size_t>(i) + 1] =
        prefix[static_cast<size_t>(i)] + lat[static_cast<size_t>(i)];
  std::vector<double> tail_max(static_cast<size_t>(n) + 1, 0.0);
  for (int64_t i = n - 1; i >= 0; --i)
    tail_max[static_cast<size_t>(i)] = std::max(
        tail_max[static_cast<size_t>(i) + 1], lat[static_cast<size_t>(i)]);

  double incumbent = greedy_seed(lat, k);

  std::function<void(int64_t, int64_t, double)> descend =
      [&](int64_t i, int64_t stage, double bottleneck) {
        const int64_t stages_left = k - stage;
        const double remaining =
            prefix[static_cast<size_t>(n)] - prefix[static_cast<size_t>(i)];
        const double spread = remaining / static_cast<double>(stages_left);
        if (std::max({bottleneck, spread, tail_max[static_cast<size_t>(i)]}) >=
            incumbent)
          return;
        if (stages_left == 1) {
          incumbent = std::max(bottleneck, remaining);
          return;
        }
        const int64_t lo = i + 1;                // every stage takes a layer
        const int64_t hi = n - stages_left + 1;  // leave one per later stage
        int64_t boundary = i;
        double sum = 0.0;
        while (boundary < hi &&
               sum + lat[static_cast<size_t>(boundary)] <= spread) {
          sum += lat[static_cast<size_t>(boundary)];
          ++boundary;
        }
        int64_t down = std::max(boundary, lo);
        int64_t up = down + 1;
        bool down_open = true, up_open = true, take_down = true;
        while ((down_open && down >= lo) || (up_open && up <= hi)) {
          const bool can_down = down_open && down >= lo;
          int64_t j;
          if (can_down && (take_down || !(up_open && up <= hi))) {
            j = down--;
            take_down = false;
          } else {
            j = up++;
            take_down = true;
          }
          const double s =
              prefix[static_cast<size_t>(j)] - prefix[static_cast<size_t>(i)];
          const double rem = remaining - s;
          const double rem_spread = rem / static_cast<double>(stages_left - 1);
          // Both cutoffs are monotone in j, so they retire a whole direction.
          if (s >= incumbent) up_open = false;
          if (rem_spread >= incumbent) down_open = false;
          const double b = std::max(bottleneck, s);
          if (std::max({b, rem_spread, tail_max[static_cast<size_t>(j)]}) >=
              incumbent)
            continue;
          descend(j, stage + 1, b);
        }
      };
  descend(0, 0, 0.0);
  return incumbent;
}

// Can the suffix starting at `i` split into `stages` chains, each with sum
// at most `cap`? Greedy longest-prefix packing decides this exactly.
bool suffix_feasible(const std::vector<double>& lat, int64_t i, int64_t stages,
                     double cap) {
  const int64_t n = static_cast<int64_t>(lat.size());
  for (int64_t s = 0; s < stages; ++s) {
    if (i >= n) return true;  // idle tail stages are fine
    double sum = 0.0;
    while (i < n && sum + lat[static_cast<size_t>(i)] <= cap) {
      sum += lat[static_cast<size_t>(i)];
      ++i;
    }
    if (sum == 0.0 && i < n) return false;  // one layer alone exceeds the cap
  }
  return i >= n;
}

}  // namespace

double dp_oracle_partition(const std::vector<double>& latencies,
                           int64_t num_stages) {
  const int64_t n = static_cast<int64_t>(latencies.size());
  if (num_stages < 1) throw ValidationError("stage count must be positive");
  if (n == 0) throw ValidationError("no layers to partition");
  std::vector<double> prefix(static_cast<size_t>(n) + 1, 0.0);
  for (int64_t i = 0; i < n; ++i)
    prefix[static_cast<size_t>(i) + 1] =
        prefix[static_cast<size_t>(i)] + latencies[static_cast<size_t>(i)];

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int64_t k = std::min(num_stages, n);
  // best[s][i]: minimal bottleneck covering the first i layers with s stages
  std::vector<std::vector<double>> best(
      static_cast<size_t>(k) + 1,
      std::vector<double>(static_cast<size_t>(n) + 1, kInf));
  best[0][0] = 0.0;
  for (int64_t s = 1; s <= k; ++s) {
    for (int64_t i = s; i <= n; ++i) {
      for (int64_t j = s - 1; j < i; ++j) {
        double b = std::max(best[static_cast<size_t>(s) - 1][static_cast<size_t>(j)],
                            prefix[static_cast<size_t>(i)] -
                                prefix[static_cast<size_t>(j)]);
        if (b < best[static_cast<size_t>(s)][static_cast<size_t>(i)])
          best[static_cast<size_t>(s)][static_cast<size_t>(i)] = b;
      }
    }
  }
  return best[static_cast<size_t>(k)][static_cast<size_t>(n)];
}

PartitionPlan bnb_partition(const std::vector<double>& latencies,
                            int64_t num_stages) {
  const int64_t n = static_cast<int64_t>(latencies.size());
  if (num_stages < 1) throw ValidationError("stage count must be positive");
  if (n == 0) throw ValidationError("no layers to partition");
  for (double d : latencies)
    if (!(d >= 0.0)) throw ValidationError("layer latencies must be non-negative");

  const int64_t k = std::min(num_stages, n);
  const double optimum = bnb_bottleneck(latencies, k);

  // Reconstruct the lexicographically smallest optimal layout: each stage
  // takes the shortest non-empty prefix that stays within the optimum while
  // the remainder still fits into the stages after it.
  PartitionPlan plan;
  plan.max_latency = optimum;
  int64_t i = 0;
  for (int64_t s = 0; s < k; ++s) {
    const int64_t stages_left = k - s;
    if (i >= n) {
      plan.stages.push_back({0, 0});
      plan.stage_latencies.push_back(0.0);
      continue;
    }
    if (stages_left == 1) {
      int64_t count = n - i;
      plan.stages.push_back({i + 1, count});
      plan.stage_latencies.push_back(stage_sum(latencies, i, count));
      i = n;
      continue;
    }
    double sum = 0.0;
    int64_t j = i;
    int64_t chosen = -1;
    double chosen_sum = 0.0;
    while (j < n) {
      sum += latencies[static_cast<size_t>(j)];
      ++j;
      if (sum > optimum) break;
      if (suffix_feasible(latencies, j, stages_left - 1, optimum)) {
        chosen = j;
        chosen_sum = sum;
        break;
      }
    }
    if (chosen < 0)
      throw SimulationError("partition reconstruction failed");  // unreachable
    plan.stages.push_back({i + 1, chosen - i});
    plan.stage_latencies.push_back(chosen_sum);
    i = chosen;
  }
  for (int64_t s = k; s < num_stages; ++s) {
    plan.stages.push_back({0, 0});
    plan.stage_latencies.push_back(0.0);
  }
  double total = std::accumulate(latencies.begin(), latencies.end(), 0.0);
  plan.speedup =
      plan.max_latency > 0.0 ? total / plan.max_latency : 1.0;
  return plan;
}

double speedup(const std::vector<double>& latencies, const PartitionPlan& plan) {
  double total = std::accumulate(latencies.begin(), latencies.end(), 0.0);
  if (plan.max_latency <= 0.0) return 1.0;
  return total / plan.max_latency;
}

NetworkPartition partition_network(const NetworkTopology& net,
                                   const AcceleratorConfig& config,
                                   int64_t num_stages) {
  NetworkReport report = simulate_network(net, config);
  NetworkPartition result;
  for (const LayerReport& lr : report.layers) {
    result.layer_names.push_back(lr.name);
    result.layer_latencies.push_back(lr.latency.total);
  }
  result.plan = bnb_partition(result.layer_latencies, num_stages);
  return result;
}

}  // namespace acceldse
