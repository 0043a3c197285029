#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acceldse/hwmodel.hpp"
#include "acceldse/netmodel.hpp"

namespace acceldse {

// Mapping of one conv-like layer onto the PE array under the row-stationary
// dataflow: filter rows are pinned along array rows, each array column
// produces one output row, input rows stream along diagonals. Channels stack
// vertically in groups of q; filters replicate side by side when at least
// two output-row strips fit across the columns.
struct PassPlan {
  int64_t logical_rows = 0;     // kernel height K_y
  int64_t logical_cols = 0;     // output height O_y
  int64_t channels_per_pass = 0;  // q = min(C, floor(rows / K_y))
  int64_t col_strip = 0;          // output rows processed per pass
  int64_t passes_channels = 0;    // ceil(C / q) accumulation rounds
  int64_t passes_strips = 0;      // ceil(O_y / col_strip)
  int64_t filter_groups = 0;      // filters side by side per array load
  int64_t filter_iterations = 0;  // ceil(M / filter_groups)
  int64_t active_pes = 0;         // PEs busy in a full pass
};

struct LevelCounts {
  int64_t ifmap_read = 0;
  int64_t ifmap_write = 0;
  int64_t weight_read = 0;
  int64_t weight_write = 0;
  int64_t psum_read = 0;
  int64_t psum_write = 0;

  int64_t total() const {
    return ifmap_read + ifmap_write + weight_read + weight_write + psum_read +
           psum_write;
  }
};

// Word-granular access counts per memory level. DRAM psum writes include the
// final output (one word per output element) plus spill round-trips; DRAM
// psum reads are spill restores only.
struct AccessCounts {
  LevelCounts rf;
  LevelCounts gb;
  LevelCounts dram;
  int64_t mac_count = 0;
};

struct EnergyBreakdown {
  double rf = 0.0;
  double gb = 0.0;
  double dram = 0.0;
  double mac = 0.0;
  double total = 0.0;
};

struct LatencyBreakdown {
  double dram_xfer = 0.0;   // DRAM word transfer time (in + out)
  double delivery = 0.0;    // buffer-to-array bus time
  double compute = 0.0;     // MAC time, delivery-gated per pass
  double writeback = 0.0;   // psum emission into the global buffer
  double total = 0.0;
};

struct LayerReport {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  int64_t macs = 0;
  AccessCounts counts;
  EnergyBreakdown energy;
  LatencyBreakdown latency;
  double utilization = 1.0;         // active PE fraction, compute weighted
  int64_t psum_spill_words = 0;     // overflow words round-tripped to DRAM
  int64_t ifmap_refetch_words = 0;  // overflow words refetched per filter pass
};

struct NetworkReport {
  std::string network;
  std::vector<LayerReport> layers;  // Input markers are skipped
  double energy_total = 0.0;
  double latency_total = 0.0;
  double edp = 0.0;
};

// Map a conv-like layer onto the array. Throws SimulationError when the
// kernel does not fit (K_y > rows) or the per-PE working set (one filter row
// + one input row + one output row) overflows the register file.
PassPlan plan_layer(const LayerSpec& layer, const TensorShape& in,
                    const AcceleratorConfig& config);

// Word-granular access counts for one conv-like layer.
//
// Movement model (three-level hierarchy, no DRAM<->RF path):
//   - DRAM->GB ifmap: each real input word once per output-row strip that
//     needs it; when a pass working set (q channels x strip rows) exceeds
//     the ifmap buffer, the overflow is refetched once per additional filter
//     iteration and recorded in ifmap_refetch_words.
//   - DRAM->GB weights: each weight word exactly once.
//   - GB->RF: one read per delivered word per array load; a filter-row word
//     multicast along its PE row and an ifmap word shared along a diagonal
//     each count once.
//   - RF<->PE: per MAC, one ifmap read, one weight read, one psum read and
//     one psum write.
//   - Psums: partial blocks live in the psum buffer across accumulation
//     rounds; overflow words round-trip to DRAM once per round and are
//     recorded in psum_spill_words; the finished output leaves once.
AccessCounts count_accesses(const PassPlan& plan, const LayerSpec& layer,
                            const TensorShape& in, const BufferAlloc& alloc,
                            int64_t word_bits);

// Energy of one layer: sum of counts x per-access costs plus
// mac_energy x mac_count. Summation order is fixed: per level in field order
// (ifmap r/w, weight r/w, psum r/w), levels RF, GB, DRAM, MAC term last.
EnergyBreakdown layer_energy(const AccessCounts& counts,
                             const AcceleratorConfig& config);

// Latency of one layer. Per pass, delivery (distinct bus words divided by
// bus_words_per_cycle) gates compute (O_x * K_x * mac_time per PE chain),
// then the emitted psum block writes back; passes are serial. DRAM transfer
// time is charged once per layer for the words that actually move. With
// overlap_delivery, steady-state passes take max(delivery, compute).
LatencyBreakdown layer_latency(const PassPlan& plan, const LayerSpec& layer,
                               const TensorShape& in,
                               const AccessCounts& counts,
                               const AcceleratorConfig& config);

// Fraction of the array active during a full pass. Throws SimulationError
// when the plan has no active PEs.
double utilization(const PassPlan& plan, const ArrayDims& array);

// Full report for one layer (Pool layers are data movement only; Input
// markers are rejected).
LayerReport simulate_layer(const LayerSpec& layer, const TensorShape& in,
                           const AcceleratorConfig& config);

// Simulate every compute layer of the network; layer order is preserved and
// the Input marker is skipped. Errors are annotated with the layer name.
NetworkReport simulate_network(const NetworkTopology& net,
                               const AcceleratorConfig& config);

// Distinct bus words needed to load one pass (filter words + shared ifmap
// diagonal words + psum read-back), exposed for delivery-schedule tests.
int64_t pass_delivery_words(int64_t channels, int64_t filter_groups,
                            int64_t kernel_x, int64_t kernel_y,
                            int64_t real_input_rows, int64_t row_words,
                            int64_t psum_readback_words);

}  // namespace acceldse
