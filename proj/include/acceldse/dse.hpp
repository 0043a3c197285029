#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "acceldse/hwmodel.hpp"
#include "acceldse/netmodel.hpp"
#include "acceldse/rsim.hpp"

namespace acceldse {

enum class Objective { Energy, Latency, Edp };

const char* objective_name(Objective o);
Objective parse_objective(const std::string& text);

struct DesignPoint {
  double gb_psum_kb = 0.0;
  double gb_ifmap_kb = 0.0;
  int64_t array_index = 0;  // 1-based position in the candidate array list
  ArrayDims array;

  // Canonical order: gb_psum, then gb_ifmap, then array index.
  friend bool operator<(const DesignPoint& a, const DesignPoint& b);
  friend bool operator==(const DesignPoint& a, const DesignPoint& b);
};

std::string point_label(const DesignPoint& p);

struct SweepRecord {
  DesignPoint point;
  double energy = 0.0;
  double latency = 0.0;
  double edp = 0.0;
};

struct SweepSpace {
  std::vector<double> gb_psum_kb;
  std::vector<double> gb_ifmap_kb;
  std::vector<ArrayDims> arrays;

  int64_t size() const {
    return static_cast<int64_t>(gb_psum_kb.size() * gb_ifmap_kb.size() *
                                arrays.size());
  }
};

struct SweepResult {
  std::string network;
  SweepSpace space;
  std::vector<SweepRecord> records;  // canonical point order
};

// 5 x 5 buffer sizes {13,27,54,108,216} KB and six arrays from [12,14] up to
// [256,256]: 150 points.
SweepSpace default_space();

// Evaluate every point of the space. Points are simulated independently
// (jobs > 1 runs them on a thread pool) and always aggregated in canonical
// order, so results are identical for any job count. Errors are annotated
// with the failing point.
SweepResult sweep(const NetworkTopology& net, const AcceleratorConfig& base,
                  const SweepSpace& space, int jobs = 1);

// Mean percentage distance of a value slice above its minimum:
// mean((v - min)/min * 100). Empty slice throws ValidationError.
double mu_min(const std::vector<double>& values);

// Percentage span of a slice: (max - min)/min * 100.
double delta_min_max(const std::vector<double>& values);

struct SliceMetrics {
  double fixed_kb = 0.0;       // coordinate shared with the min-energy point
  double mu_min_pct = 0.0;
  double delta_min_max_pct = 0.0;
};

// Energy metrics for one array: the 25-point slice is anchored at the
// minimum-energy point; `sweep_ifmap` selects whether the slice varies
// gb_ifmap (gb_psum fixed at the anchor's) or vice versa.
SliceMetrics slice_metrics(const SweepResult& result, int64_t array_index,
                           bool sweep_ifmap);

// Mean and max percentage EDP distance above the global minimum over all
// points of the sweep.
std::pair<double, double> edp_distance_stats(const SweepResult& result);

double objective_value(const SweepRecord& r, Objective o);

// Points whose objective lies within (1 + epsilon) of the minimum, in
// canonical order. The minimum itself is chosen lexicographically among
// ties. Growing epsilon never shrinks the set.
std::vector<DesignPoint> near_optimal_set(const SweepResult& result,
                                          double epsilon, Objective objective);

struct CoreRecommendation {
  double epsilon = 0.0;
  Objective objective = Objective::Edp;
  std::vector<DesignPoint> cores;
  // network -> indices into `cores` of every core whose point covers it
  std::map<std::string, std::vector<int64_t>> coverage;
};

// Smallest set of design points covering every network's near-optimal set.
// Exact minimum set cover (subsets enumerated by size) when there are at
// most 32 distinct points, greedy max-coverage otherwise. Ties prefer points
// covering more networks, then canonical point order. Throws
// SimulationError listing uncovered networks when no cover of at most
// max_core_types points exists.
CoreRecommendation recommend_cores(
    const std::map<std::string, std::vector<DesignPoint>>& near_optimal,
    int64_t max_core_types, double epsilon, Objective objective);

struct CrossPenalty {
  double energy_pct = 0.0;
  double latency_pct = 0.0;
  double edp_pct = 0.0;
};

// Percentage increase of running a network on `away` instead of `home`:
// (away - home)/home * 100 per metric.
CrossPenalty cross_penalty(const SweepResult& result, const DesignPoint& home,
                           const DesignPoint& away);

}  // namespace acceldse
