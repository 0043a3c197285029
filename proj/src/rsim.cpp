#include "acceldse/rsim.hpp"

#include <algorithm>
#include <cmath>

namespace acceldse {

namespace {

// Conv-like layers normalized to one geometry; fully connected layers become
// a 1x1 convolution over 1x1 space with the flattened input as channels.
struct ConvGeom {
  int64_t C = 0;   // accumulated (or, for depthwise, independent) channels
  int64_t M = 0;   // output filter count
  int64_t Kx = 1, Ky = 1;
  int64_t stride = 1, pad = 0;
  int64_t Ix = 0, Iy = 0;
  int64_t Ox = 0, Oy = 0;
  bool depthwise = false;
};

ConvGeom make_geom(const LayerSpec& layer, const TensorShape& in) {
  ConvGeom g;
  if (layer.kind == LayerKind::FullyConnected) {
    g.C = in.words();
    g.M = layer.units;
    g.Ix = g.Iy = g.Ox = g.Oy = 1;
    return g;
  }
  g.C = in.channels;
  g.M = layer.kind == LayerKind::DepthwiseConv ? in.channels
                                               : layer.num_filters;
  g.Kx = layer.kernel_x;
  g.Ky = layer.kernel_y;
  g.stride = layer.stride;
  g.pad = layer.pad;
  g.Ix = in.width;
  g.Iy = in.height;
  TensorShape out = output_shape(layer, in);
  g.Ox = out.width;
  g.Oy = out.height;
  g.depthwise = layer.kind == LayerKind::DepthwiseConv;
  return g;
}

// Real words fetched per input row of a strip: one burst from the row start
// through the last word any output column needs (pad columns are generated,
// not moved).
int64_t fetched_row_words(const ConvGeom& g) {
  if (g.Ox <= 0) return 0;
  // last window that still starts inside the real row
  int64_t ox_last = std::min(g.Ox - 1, (g.Ix - 1 + g.pad) / g.stride);
  if (ox_last < 0) return 0;
  int64_t hi = std::min(ox_last * g.stride - g.pad + g.Kx, g.Ix);
  return std::max<int64_t>(0, hi);
}

// Real input rows touched by output rows [out_lo, out_lo + sr).
int64_t strip_input_rows(const ConvGeom& g, int64_t out_lo, int64_t sr) {
  if (sr <= 0) return 0;
  if (g.stride <= g.Ky) {
    int64_t lo = std::max(out_lo * g.stride, g.pad);
    int64_t hi = std::min((out_lo + sr - 1) * g.stride + g.Ky, g.pad + g.Iy);
    return std::max<int64_t>(0, hi - lo);
  }
  int64_t rows = 0;  // stride gaps: windows are disjoint
  for (int64_t oy = out_lo; oy < out_lo + sr; ++oy) {
    int64_t lo = std::max(oy * g.stride, g.pad);
    int64_t hi = std::min(oy * g.stride + g.Ky, g.pad + g.Iy);
    rows += std::max<int64_t>(0, hi - lo);
  }
  return rows;
}

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

struct RoundGroup {
  int64_t channels = 0;
  int64_t count = 0;
  bool readback = false;  // partial psums return from the buffer first
};

struct IterGroup {
  int64_t filters = 0;
  int64_t count = 0;
};

// Everything simulate_layer needs, computed in one walk over the pass
// structure so counts and latency can never disagree.
struct LayerSim {
  AccessCounts counts;
  LatencyBreakdown latency;
  double util_num = 0.0;
  double util_den = 0.0;
  int64_t psum_spill = 0;
  int64_t ifmap_refetch = 0;
};

}  // namespace

int64_t pass_delivery_words(int64_t channels, int64_t filter_groups,
                            int64_t kernel_x, int64_t kernel_y,
                            int64_t real_input_rows, int64_t row_words,
                            int64_t psum_readback_words) {
  // Multicast counts each distinct word once: a filter-row word serves its
  // whole PE row, an ifmap word its whole diagonal and every filter replica.
  return channels * filter_groups * kernel_x * kernel_y +
         channels * real_input_rows * row_words + psum_readback_words;
}

PassPlan plan_layer(const LayerSpec& layer, const TensorShape& in,
                    const AcceleratorConfig& config) {
  if (!is_conv_like(layer.kind))
    throw SimulationError(layer.name + ": only conv-like layers map onto the array");
  ConvGeom g = make_geom(layer, in);
  const ArrayDims& array = config.array;
  if (g.Ky > array.rows)
    throw SimulationError(layer.name + ": kernel rows " + std::to_string(g.Ky) +
                          " exceed array rows " + std::to_string(array.rows));
  // Per-PE residency: one filter row, one input row segment, one output row.
  int64_t row_seg = std::min(g.Ix, (g.Ox - 1) * g.stride + g.Kx);
  if (g.Kx + row_seg + g.Ox > config.rf_capacity_words)
    throw SimulationError(layer.name + ": per-PE working set " +
                          std::to_string(g.Kx + row_seg + g.Ox) +
                          " words overflows the register file (" +
                          std::to_string(config.rf_capacity_words) + ")");

  PassPlan plan;
  plan.logical_rows = g.Ky;
  plan.logical_cols = g.Oy;
  int64_t q_slots = std::max<int64_t>(1, array.rows / g.Ky);
  plan.channels_per_pass = std::min(q_slots, g.C);
  plan.col_strip = std::min(g.Oy, array.cols);
  plan.passes_strips = ceil_div(g.Oy, plan.col_strip);
  int64_t g_raw =
      2 * g.Oy <= array.cols ? std::max<int64_t>(1, array.cols / g.Oy) : 1;
  if (g.depthwise) {
    plan.passes_channels = 1;
    plan.filter_groups = std::max<int64_t>(
        1, std::min(g_raw, ceil_div(g.C, plan.channels_per_pass)));
    plan.filter_iterations =
        ceil_div(g.C, plan.channels_per_pass * plan.filter_groups);
  } else {
    plan.passes_channels = ceil_div(g.C, plan.channels_per_pass);
    plan.filter_groups = std::max<int64_t>(1, std::min(g_raw, g.M));
    plan.filter_iterations = ceil_div(g.M, plan.filter_groups);
  }
  plan.active_pes = plan.channels_per_pass * g.Ky * plan.filter_groups *
                    plan.col_strip;
  return plan;
}

double utilization(const PassPlan& plan, const ArrayDims& array) {
  if (plan.active_pes <= 0 || array.rows <= 0 || array.cols <= 0)
    throw SimulationError("utilization undefined for an empty pass");
  return static_cast<double>(plan.active_pes) /
         static_cast<double>(array.rows * array.cols);
}

namespace {

// Shared engine for conv-like layers: walks strips, accumulation rounds and
// filter iterations analytically (ragged tail groups, never per-pass loops)
// and fills counts and latency together.
LayerSim run_conv_layer(const PassPlan& plan, const LayerSpec& layer,
                        const TensorShape& in, const AcceleratorConfig& config) {
  ConvGeom g = make_geom(layer, in);
  LayerSim sim;
  AccessCounts& cnt = sim.counts;

  const int64_t cap_if =
      capacity_words(config.alloc.gb_ifmap_kb, config.word_bits);
  const int64_t cap_ps =
      capacity_words(config.alloc.gb_psum_kb, config.word_bits);
  const int64_t q = plan.channels_per_pass;
  const int64_t R = plan.passes_channels;
  const int64_t gf = plan.filter_groups;
  const int64_t F = plan.filter_iterations;
  const int64_t rw = fetched_row_words(g);
  const double bus = config.bus_words_per_cycle;
  const double c_time = static_cast<double>(g.Ox * g.Kx) * config.mac_time;
  const double gb_ps_wt = gb_cost_for(config, config.alloc.gb_psum_kb).write_time;

  double delivery = 0.0, compute = 0.0, writeback = 0.0;
  double d_first = 0.0;
  bool first_load = true;

  for (int64_t s = 0; s < plan.passes_strips; ++s) {
    const int64_t out_lo = s * plan.col_strip;
    const int64_t sr = std::min(plan.col_strip, g.Oy - out_lo);
    const int64_t in_rows = strip_input_rows(g, out_lo, sr);

    // Every channel's strip rows enter the buffer once.
    const int64_t base_if = g.C * in_rows * rw;
    cnt.dram.ifmap_read += base_if;
    cnt.gb.ifmap_write += base_if;

    if (g.depthwise) {
      // Independent per-channel convolutions stream through the array;
      // nothing accumulates across loads and nothing is reused across them.
      const int64_t per_load = q * gf;
      const int64_t full_loads = F - 1;
      const int64_t last_ch = g.C - per_load * full_loads;
      const IterGroup groups[2] = {{per_load, full_loads}, {last_ch, 1}};
      for (const IterGroup& grp : groups) {
        if (grp.count <= 0 || grp.filters <= 0) continue;
        const int64_t ch = grp.filters;
        const int64_t d_words =
            pass_delivery_words(ch, 1, g.Kx, g.Ky, in_rows, rw, 0);
        const int64_t block = g.Ox * sr * ch;
        const int64_t ovf = std::max<int64_t>(0, block - cap_ps);
        const double d = static_cast<double>(d_words) / bus;
        if (first_load) { d_first = d; first_load = false; }
        delivery += (config.overlap_delivery ? std::max(d, c_time) - c_time : d) *
                    static_cast<double>(grp.count);
        compute += c_time * static_cast<double>(grp.count);
        writeback += static_cast<double>(block) * gb_ps_wt *
                     static_cast<double>(grp.count);
        cnt.gb.ifmap_read += grp.count * ch * in_rows * rw;
        cnt.gb.weight_read += grp.count * ch * g.Kx * g.Ky;
        cnt.gb.psum_write += grp.count * (block + ovf);
        cnt.gb.psum_read += grp.count * (block + ovf);
        cnt.dram.psum_write += grp.count * (block + ovf);
        cnt.dram.psum_read += grp.count * ovf;
        sim.psum_spill += grp.count * ovf;
        sim.util_num += static_cast<double>(grp.count * ch * g.Ky * sr) * c_time;
        sim.util_den += static_cast<double>(grp.count * config.array.rows *
                                            config.array.cols) * c_time;
      }
      continue;
    }

    // Accumulation rounds (first round has no psum read-back; the last may
    // carry fewer channels) crossed with filter iterations (last may carry
    // fewer filters).
    RoundGroup rounds[3];
    if (R == 1) {
      rounds[0] = {g.C, 1, false};
    } else {
      rounds[0] = {q, 1, false};
      rounds[1] = {q, R - 2, true};
      rounds[2] = {g.C - q * (R - 1), 1, true};
    }
    const IterGroup iters[2] = {{gf, F - 1}, {g.M - gf * (F - 1), 1}};

    // Ifmap overflow beyond the buffer is refetched for every filter
    // iteration after the first.
    if (F > 1) {
      for (const RoundGroup& r : rounds) {
        if (r.count <= 0 || r.channels <= 0) continue;
        int64_t ovf = std::max<int64_t>(0, r.channels * in_rows * rw - cap_if);
        sim.ifmap_refetch += r.count * ovf * (F - 1);
      }
    }

    // Psum residency. With several rounds every filter's partial block stays
    // live between them; overflow words round-trip to DRAM once per round.
    // With a single round only the in-flight block occupies the buffer.
    const int64_t strip_out = g.Ox * sr * g.M;
    if (R > 1) {
      const int64_t live = strip_out;
      const int64_t ovf = std::max<int64_t>(0, live - cap_ps);
      sim.psum_spill += ovf * R;
      cnt.dram.psum_write += ovf * R;
      cnt.dram.psum_read += ovf * R;
      cnt.gb.psum_read += ovf * R;
      cnt.gb.psum_write += ovf * R;
    } else {
      for (const IterGroup& it : iters) {
        if (it.count <= 0 || it.filters <= 0) continue;
        int64_t ovf = std::max<int64_t>(0, g.Ox * sr * it.filters - cap_ps);
        sim.psum_spill += it.count * ovf;
        cnt.dram.psum_write += it.count * ovf;
        cnt.dram.psum_read += it.count * ovf;
        cnt.gb.psum_read += it.count * ovf;
        cnt.gb.psum_write += it.count * ovf;
      }
    }
    // Emissions (every round), read-backs (all but the first round), final
    // exit (once).
    cnt.gb.psum_write += strip_out * R;
    cnt.gb.psum_read += strip_out * (R - 1) + strip_out;
    cnt.dram.psum_write += strip_out;

    for (const RoundGroup& r : rounds) {
      if (r.count <= 0 || r.channels <= 0) continue;
      cnt.gb.ifmap_read += r.count * F * r.channels * in_rows * rw;
      for (const IterGroup& it : iters) {
        if (it.count <= 0 || it.filters <= 0) continue;
        const int64_t n = r.count * it.count;
        const int64_t readback = r.readback ? g.Ox * sr * it.filters : 0;
        const int64_t d_words = pass_delivery_words(
            r.channels, it.filters, g.Kx, g.Ky, in_rows, rw, readback);
        const double d = static_cast<double>(d_words) / bus;
        if (first_load && !r.readback) { d_first = d; first_load = false; }
        delivery += (config.overlap_delivery ? std::max(d, c_time) - c_time : d) *
                    static_cast<double>(n);
        compute += c_time * static_cast<double>(n);
        writeback += static_cast<double>(g.Ox * sr * it.filters) * gb_ps_wt *
                     static_cast<double>(n);
        cnt.gb.weight_read += n * r.channels * it.filters * g.Kx * g.Ky;
        sim.util_num += static_cast<double>(n * r.channels * g.Ky *
                                            it.filters * sr) * c_time;
        sim.util_den += static_cast<double>(n * config.array.rows *
                                            config.array.cols) * c_time;
      }
    }
  }

  // Refetched overflow re-enters through the buffer like any other fetch.
  cnt.dram.ifmap_read += sim.ifmap_refetch;
  cnt.gb.ifmap_write += sim.ifmap_refetch;

  // Weights move from DRAM exactly once.
  LayerVolumes vol = layer_volumes(layer, in);
  cnt.dram.weight_read += vol.weight_words;
  cnt.gb.weight_write += vol.weight_words;

  // Register-file traffic is per MAC: ifmap read, weight read, psum
  // read-modify-write.
  cnt.mac_count = layer_macs(layer, in);
  cnt.rf.ifmap_read = cnt.mac_count;
  cnt.rf.weight_read = cnt.mac_count;
  cnt.rf.psum_read = cnt.mac_count;
  cnt.rf.psum_write = cnt.mac_count;

  if (config.overlap_delivery) delivery += d_first;

  sim.latency.delivery = delivery;
  sim.latency.compute = compute;
  sim.latency.writeback = writeback;
  const int64_t dram_reads =
      cnt.dram.ifmap_read + cnt.dram.weight_read + cnt.dram.psum_read;
  sim.latency.dram_xfer =
      static_cast<double>(dram_reads) * config.dram_cost.read_time +
      static_cast<double>(cnt.dram.psum_write) * config.dram_cost.write_time;
  sim.latency.total = sim.latency.dram_xfer + sim.latency.delivery +
                      sim.latency.compute + sim.latency.writeback;
  return sim;
}

LayerSim run_pool_layer(const LayerSpec& layer, const TensorShape& in,
                        const AcceleratorConfig& config) {
  LayerSim sim;
  LayerVolumes vol = layer_volumes(layer, in);
  AccessCounts& cnt = sim.counts;
  cnt.dram.ifmap_read = vol.ifmap_words;
  cnt.gb.ifmap_write = vol.ifmap_words;
  cnt.gb.ifmap_read = vol.ifmap_words;
  cnt.gb.psum_write = vol.ofmap_words;
  cnt.gb.psum_read = vol.ofmap_words;
  cnt.dram.psum_write = vol.ofmap_words;

  const double gb_ps_wt = gb_cost_for(config, config.alloc.gb_psum_kb).write_time;
  sim.latency.delivery =
      static_cast<double>(vol.ifmap_words) / config.bus_words_per_cycle;
  sim.latency.writeback = static_cast<double>(vol.ofmap_words) * gb_ps_wt;
  sim.latency.dram_xfer =
      static_cast<double>(cnt.dram.ifmap_read) * config.dram_cost.read_time +
      static_cast<double>(cnt.dram.psum_write) * config.dram_cost.write_time;
  sim.latency.total = sim.latency.dram_xfer + sim.latency.delivery +
                      sim.latency.compute + sim.latency.writeback;
  sim.util_num = sim.util_den = 1.0;
  return sim;
}

double level_energy(const LevelCounts& c, const MemoryLevelCost& read_cost,
                    const MemoryLevelCost& write_cost) {
  // Field order is part of the contract (fixed float summation order).
  double e = 0.0;
  e += static_cast<double>(c.ifmap_read) * read_cost.read_energy;
  e += static_cast<double>(c.ifmap_write) * write_cost.write_energy;
  e += static_cast<double>(c.weight_read) * read_cost.read_energy;
  e += static_cast<double>(c.weight_write) * write_cost.write_energy;
  e += static_cast<double>(c.psum_read) * read_cost.read_energy;
  e += static_cast<double>(c.psum_write) * write_cost.write_energy;
  return e;
}

}  // namespace

AccessCounts count_accesses(const PassPlan& plan, const LayerSpec& layer,
                            const TensorShape& in, const BufferAlloc& alloc,
                            int64_t word_bits) {
  AcceleratorConfig cfg = default_config();
  cfg.alloc = alloc;
  cfg.word_bits = word_bits;
  // Counting never depends on costs or the bus; reuse the shared engine.
  cfg.array = {plan.channels_per_pass * plan.logical_rows,
               plan.filter_groups * plan.col_strip};
  return run_conv_layer(plan, layer,
                        layer.kind == LayerKind::FullyConnected
                            ? TensorShape{in.words(), 1, 1}
                            : in,
                        cfg)
      .counts;
}

EnergyBreakdown layer_energy(const AccessCounts& counts,
                             const AcceleratorConfig& config) {
  EnergyBreakdown e;
  e.rf = level_energy(counts.rf, config.rf_cost, config.rf_cost);
  // Buffer partitions are priced by their own capacities.
  const MemoryLevelCost gb_if = gb_cost_for(config, config.alloc.gb_ifmap_kb);
  const MemoryLevelCost gb_wt = gb_cost_for(config, config.alloc.gb_weights_kb);
  const MemoryLevelCost gb_ps = gb_cost_for(config, config.alloc.gb_psum_kb);
  double gb = 0.0;
  gb += static_cast<double>(counts.gb.ifmap_read) * gb_if.read_energy;
  gb += static_cast<double>(counts.gb.ifmap_write) * gb_if.write_energy;
  gb += static_cast<double>(counts.gb.weight_read) * gb_wt.read_energy;
  gb += static_cast<double>(counts.gb.weight_write) * gb_wt.write_energy;
  gb += static_cast<double>(counts.gb.psum_read) * gb_ps.read_energy;
  gb += static_cast<double>(counts.gb.psum_write) * gb_ps.write_energy;
  e.gb = gb;
  e.dram = level_energy(counts.dram, config.dram_cost, config.dram_cost);
  e.mac = static_cast<double>(counts.mac_count) * config.mac_energy;
  e.total = ((e.rf + e.gb) + e.dram) + e.mac;
  return e;
}

LatencyBreakdown layer_latency(const PassPlan& plan, const LayerSpec& layer,
                               const TensorShape& in,
                               const AccessCounts& counts,
                               const AcceleratorConfig& config) {
  LayerSim sim = run_conv_layer(plan, layer,
                                layer.kind == LayerKind::FullyConnected
                                    ? TensorShape{in.words(), 1, 1}
                                    : in,
                                config);
  // DRAM time follows the caller's counts (they may embed extra traffic).
  const int64_t dram_reads =
      counts.dram.ifmap_read + counts.dram.weight_read + counts.dram.psum_read;
  sim.latency.dram_xfer =
      static_cast<double>(dram_reads) * config.dram_cost.read_time +
      static_cast<double>(counts.dram.psum_write) * config.dram_cost.write_time;
  sim.latency.total = sim.latency.dram_xfer + sim.latency.delivery +
                      sim.latency.compute + sim.latency.writeback;
  return sim.latency;
}

LayerReport simulate_layer(const LayerSpec& layer, const TensorShape& in,
                           const AcceleratorConfig& config) {
  if (layer.kind == LayerKind::Input)
    throw SimulationError("input markers are not simulated");
  LayerReport report;
  report.name = layer.name;
  report.kind = layer.kind;

  LayerSim sim;
  if (layer.kind == LayerKind::Pool) {
    sim = run_pool_layer(layer, in, config);
    report.utilization = 1.0;  // no array use
  } else {
    TensorShape eff_in = layer.kind == LayerKind::FullyConnected
                             ? TensorShape{in.words(), 1, 1}
                             : in;
    PassPlan plan = plan_layer(layer, eff_in, config);
    sim = run_conv_layer(plan, layer, eff_in, config);
    report.utilization = sim.util_den > 0.0 ? sim.util_num / sim.util_den : 1.0;
  }
  report.counts = sim.counts;
  report.macs = sim.counts.mac_count;
  report.energy = layer_energy(sim.counts, config);
  report.latency = sim.latency;
  report.psum_spill_words = sim.psum_spill;
  report.ifmap_refetch_words = sim.ifmap_refetch;
  return report;
}

NetworkReport simulate_network(const NetworkTopology& net,
                               const AcceleratorConfig& config) {
  NetworkReport report;
  report.network = net.name;
  TensorShape shape = net.input_shape;
  auto process = [&](const LayerSpec& layer, bool fc_part) {
    TensorShape in = shape;
    if (!fc_part && layer.in_channels > 0 && layer.kind != LayerKind::Input)
      in.channels = layer.in_channels;  // declared channel override
    try {
      if (layer.kind != LayerKind::Input)
        report.layers.push_back(simulate_layer(layer, in, config));
    } catch (const SimulationError& e) {
      throw SimulationError(net.name + "." + layer.name + ": " + e.what());
    }
    shape = output_shape(layer, in);
  };
  for (const LayerSpec& layer : net.conv_part) process(layer, false);
  shape = {shape.words(), 1, 1};
  for (const LayerSpec& layer : net.fc_part) process(layer, true);

  for (const LayerReport& lr : report.layers) {
    report.energy_total += lr.energy.total;
    report.latency_total += lr.latency.total;
  }
  report.edp = report.energy_total * report.latency_total;
  return report;
}

}  // namespace acceldse
