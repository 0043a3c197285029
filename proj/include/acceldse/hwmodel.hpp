#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "acceldse/errors.hpp"

namespace acceldse {

struct ArrayDims {
  int64_t rows = 0;
  int64_t cols = 0;
  bool operator==(const ArrayDims&) const = default;
};

// Per-access costs of one memory level. Energies are in abstract units
// relative to a register-file access; times are in cycles per word.
struct MemoryLevelCost {
  double read_energy = 0.0;
  double write_energy = 0.0;
  double read_time = 0.0;
  double write_time = 0.0;
};

// Global-buffer partition sizes in KB. The weight region is not capacity
// checked (it is assumed large enough for any single layer), but its size
// selects the cost-table entry used to price weight accesses.
struct BufferAlloc {
  double gb_ifmap_kb = 54.0;
  double gb_psum_kb = 54.0;
  double gb_weights_kb = 54.0;
};

struct AcceleratorConfig {
  ArrayDims array{16, 16};
  BufferAlloc alloc;
  int64_t rf_capacity_words = 512;
  MemoryLevelCost rf_cost{1.0, 1.0, 1.0, 1.0};
  // Exact-match lookup by capacity in KB; no interpolation.
  std::map<double, MemoryLevelCost> gb_cost_table;
  MemoryLevelCost dram_cost{200.0, 200.0, 20.0, 20.0};
  double mac_energy = 1.0;
  double mac_time = 1.0;          // cycles per MAC
  double bus_words_per_cycle = 1.0;
  int64_t word_bits = 16;
  bool overlap_delivery = false;  // overlap pass delivery with compute
  bool strict_costs = false;      // missing cost entries error instead of
                                  // being filled from the default rule
};

// Default global-buffer cost for a capacity: 6.0*sqrt(kb/54) clamped to
// [5, 10] energy units, 2-cycle access times. Throws ValidationError for
// non-positive capacities.
MemoryLevelCost default_cost_table(double capacity_kb);

// Capacity of a buffer in data words.
int64_t capacity_words(double capacity_kb, int64_t word_bits);

// Config with the default cost tables for the standard capacity set.
AcceleratorConfig default_config();

// Parse a config document; unknown keys are errors, missing cost entries are
// filled from default_cost_table unless strict_costs. Throws ParseError /
// ValidationError.
AcceleratorConfig load_config(const std::string& text);

// All detected violations (empty means valid).
std::vector<std::string> validate(const AcceleratorConfig& config);

// Cost entry for a capacity; fills from the default rule unless
// strict_costs, in which case a missing entry throws ValidationError.
MemoryLevelCost gb_cost_for(const AcceleratorConfig& config, double capacity_kb);

// Canonical JSON dump (sorted keys) used for manifests and hashing.
std::string config_to_json(const AcceleratorConfig& config);

// FNV-1a 64-bit over the canonical dump, hex encoded.
std::string config_hash(const AcceleratorConfig& config);

}  // namespace acceldse
