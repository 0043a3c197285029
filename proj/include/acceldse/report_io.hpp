#pragma once

#include <string>
#include <vector>

#include "acceldse/dse.hpp"
#include "acceldse/partition.hpp"
#include "acceldse/rsim.hpp"

namespace acceldse {

// Provenance stamp embedded in every emitted report. Contains no
// timestamps or machine state, so reruns are byte-identical.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string config_hash;
  std::string space;  // description of the evaluated space, may be empty
};

std::string version_string();

// Deterministic number formatting shared by all emitters.
std::string format_number(double v);

// Per-layer CSV: layer,macs,e_rf,e_gb,e_dram,e_mac,e_total,t_dram,
// t_delivery,t_compute,t_writeback,t_total,util,psum_spill,ifmap_refetch.
// The manifest rides in a leading comment line.
std::string report_to_csv(const NetworkReport& report,
                          const RunManifest& manifest);

// Totals + per-layer report as JSON with the manifest embedded.
std::string report_to_json(const NetworkReport& report,
                           const RunManifest& manifest);

// Sweep CSV: network,gb_psum_kb,gb_ifmap_kb,array_rows,array_cols,energy,
// latency,edp in canonical point order.
std::string sweep_to_csv(const SweepResult& result,
                         const RunManifest& manifest);

// Parse a sweep CSV produced by sweep_to_csv (used by the recommend
// command). Throws ParseError on malformed rows.
SweepResult sweep_from_csv(const std::string& text);

// Distance metrics (per-array slices and global EDP stats) plus the
// near-optimal set, as JSON.
std::string metrics_to_json(const SweepResult& result, double epsilon,
                            Objective objective, const RunManifest& manifest);

// Energy versus gb_psum, one column per array, at a fixed gb_ifmap size:
// plot-ready CSV.
std::string plotdata_to_csv(const SweepResult& result, double fixed_ifmap_kb,
                            const RunManifest& manifest);

std::string recommendation_to_json(const CoreRecommendation& rec,
                                   const RunManifest& manifest);

// {cores:[{l_initial,n_c,stage_latency}],max_latency,speedup} + manifest.
std::string plan_to_json(const NetworkPartition& partition,
                         const RunManifest& manifest);

// Human-readable stage tuple table for terminal output.
std::string plan_to_table(const NetworkPartition& partition);

}  // namespace acceldse
