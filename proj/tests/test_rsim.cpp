#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "acceldse/rsim.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace acceldse;

namespace {

LayerSpec conv(int64_t c, int64_t m, int64_t k, int64_t stride, int64_t pad) {
  LayerSpec l;
  l.kind = LayerKind::Conv;
  l.name = "conv";
  l.in_channels = c;
  l.num_filters = m;
  l.kernel_x = l.kernel_y = k;
  l.stride = stride;
  l.pad = pad;
  return l;
}

LayerSpec depthwise(int64_t c, int64_t k) {
  LayerSpec l;
  l.kind = LayerKind::DepthwiseConv;
  l.name = "dw";
  l.in_channels = c;
  l.num_filters = c;
  l.kernel_x = l.kernel_y = k;
  return l;
}

LayerSpec fully_connected(int64_t units) {
  LayerSpec l;
  l.kind = LayerKind::FullyConnected;
  l.name = "fc";
  l.units = units;
  return l;
}

LayerSpec pool2x2(int64_t c) {
  LayerSpec l;
  l.kind = LayerKind::Pool;
  l.name = "pool";
  l.in_channels = c;
  l.pool_window = 2;
  l.pool_stride = 2;
  return l;
}

AcceleratorConfig cfg44() {
  AcceleratorConfig cfg = default_config();
  cfg.array = {4, 4};
  return cfg;
}

// capacity in KB that holds exactly `words` 16-bit words
double kb_for_words(int64_t words) {
  return static_cast<double>(words) * 16.0 / (1024.0 * 8.0);
}

void check_counts(const AccessCounts& got, const AccessCounts& want) {
  CHECK(got.rf.ifmap_read == want.rf.ifmap_read);
  CHECK(got.rf.ifmap_write == want.rf.ifmap_write);
  CHECK(got.rf.weight_read == want.rf.weight_read);
  CHECK(got.rf.weight_write == want.rf.weight_write);
  CHECK(got.rf.psum_read == want.rf.psum_read);
  CHECK(got.rf.psum_write == want.rf.psum_write);
  CHECK(got.gb.ifmap_read == want.gb.ifmap_read);
  CHECK(got.gb.ifmap_write == want.gb.ifmap_write);
  CHECK(got.gb.weight_read == want.gb.weight_read);
  CHECK(got.gb.weight_write == want.gb.weight_write);
  CHECK(got.gb.psum_read == want.gb.psum_read);
  CHECK(got.gb.psum_write == want.gb.psum_write);
  CHECK(got.dram.ifmap_read == want.dram.ifmap_read);
  CHECK(got.dram.ifmap_write == want.dram.ifmap_write);
  CHECK(got.dram.weight_read == want.dram.weight_read);
  CHECK(got.dram.weight_write == want.dram.weight_write);
  CHECK(got.dram.psum_read == want.dram.psum_read);
  CHECK(got.dram.psum_write == want.dram.psum_write);
  CHECK(got.mac_count == want.mac_count);
}

}  // namespace

TEST_CASE("pass planning stacks channels and replicates filter groups") {
  AcceleratorConfig cfg = cfg44();

  // single channel, single filter: three kernel rows, three output rows
  PassPlan p = plan_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);
  CHECK(p.logical_rows == 3);
  CHECK(p.logical_cols == 3);
  CHECK(p.channels_per_pass == 1);
  CHECK(p.col_strip == 3);
  CHECK(p.passes_strips == 1);
  CHECK(p.filter_groups == 1);
  CHECK(p.filter_iterations == 1);
  CHECK(p.passes_channels == 1);
  CHECK(p.active_pes == 9);

  // two channel stacks and two filter groups fit an 8x4 array
  cfg.array = {8, 4};
  PassPlan wide = plan_layer(conv(2, 4, 3, 1, 0), {2, 4, 4}, cfg);
  CHECK(wide.channels_per_pass == 2);
  CHECK(wide.col_strip == 2);
  CHECK(wide.filter_groups == 2);
  CHECK(wide.filter_iterations == 2);
  CHECK(wide.passes_channels == 1);
  CHECK(wide.active_pes == 24);

  // fully connected: flattened input stacks 16 deep, all units side by side
  cfg.array = {16, 16};
  PassPlan fc = plan_layer(fully_connected(10), {32, 1, 1}, cfg);
  CHECK(fc.logical_rows == 1);
  CHECK(fc.logical_cols == 1);
  CHECK(fc.channels_per_pass == 16);
  CHECK(fc.filter_groups == 10);
  CHECK(fc.filter_iterations == 1);
  CHECK(fc.passes_channels == 2);
  CHECK(fc.active_pes == 160);

  // depthwise never accumulates across rounds
  PassPlan dw = plan_layer(depthwise(3, 3), {3, 5, 5}, cfg44());
  CHECK(dw.channels_per_pass == 1);
  CHECK(dw.passes_channels == 1);
  CHECK(dw.filter_iterations == 3);
  CHECK(dw.active_pes == 9);
}

TEST_CASE("pass planning rejects oversized kernels and RF overflow") {
  AcceleratorConfig cfg = cfg44();
  CHECK_THROWS_AS(plan_layer(conv(1, 1, 5, 1, 0), {1, 8, 8}, cfg),
                  SimulationError);

  // per-PE working set: one kernel row + one input row + one output row.
  // K=3 on a width-5 row makes 3 + 5 + 3 = 11 words.
  LayerSpec thin = conv(1, 1, 3, 1, 0);
  cfg.rf_capacity_words = 11;
  CHECK_NOTHROW(plan_layer(thin, {1, 5, 5}, cfg));
  cfg.rf_capacity_words = 10;
  CHECK_THROWS_AS(plan_layer(thin, {1, 5, 5}, cfg), SimulationError);
}

TEST_CASE("delivery word counts cover filters, diagonals and read-back") {
  // kernel words + shared diagonal words, no read-back
  CHECK(pass_delivery_words(1, 1, 3, 3, 5, 5, 0) == 34);
  // padded 4x2 input: 9 kernel words + 4 real rows x 2 words
  CHECK(pass_delivery_words(1, 1, 3, 3, 4, 2, 0) == 17);
  // 2x2 kernel on a 3x2 input: 4 + 6
  CHECK(pass_delivery_words(1, 1, 2, 2, 3, 2, 0) == 10);
  // read-back words ride the same bus
  CHECK(pass_delivery_words(1, 1, 3, 3, 5, 5, 9) == 43);
  // filter groups re-send kernel words, ifmap words are shared
  CHECK(pass_delivery_words(1, 2, 3, 3, 5, 5, 0) == 43);
}

TEST_CASE("utilization is the active fraction of the array") {
  AcceleratorConfig cfg = cfg44();
  PassPlan p = plan_layer(conv(1, 1, 3, 1, 1), {1, 4, 2}, cfg);
  CHECK(p.active_pes == 12);
  CHECK(utilization(p, cfg.array) == 0.75);

  LayerReport rep = simulate_layer(conv(1, 1, 3, 1, 1), {1, 4, 2}, cfg);
  CHECK(rep.utilization == doctest::Approx(0.75));

  // pool layers do not occupy the array
  LayerReport pl = simulate_layer(pool2x2(2), {2, 4, 4}, cfg);
  CHECK(pl.utilization == 1.0);
}

TEST_CASE("access counts of a single-channel layer match a hand walk") {
  // 3x3 kernel over a 5x5 input: 25 input words stream once, 9 weights,
  // 9 outputs, 81 MACs.
  AcceleratorConfig cfg = cfg44();
  LayerReport rep = simulate_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);

  AccessCounts want;
  want.dram.ifmap_read = 25;
  want.gb.ifmap_write = 25;
  want.gb.ifmap_read = 25;
  want.dram.weight_read = 9;
  want.gb.weight_write = 9;
  want.gb.weight_read = 9;
  want.gb.psum_write = 9;
  want.gb.psum_read = 9;
  want.dram.psum_write = 9;
  want.mac_count = 81;
  want.rf.ifmap_read = 81;
  want.rf.weight_read = 81;
  want.rf.psum_read = 81;
  want.rf.psum_write = 81;
  check_counts(rep.counts, want);
  CHECK(rep.macs == 81);
  CHECK(rep.psum_spill_words == 0);
  CHECK(rep.ifmap_refetch_words == 0);
}

TEST_CASE("psum blocks that overflow the buffer round-trip through DRAM") {
  AcceleratorConfig cfg = cfg44();
  cfg.alloc.gb_psum_kb = kb_for_words(5);  // block is 9 words
  LayerReport rep = simulate_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);
  CHECK(rep.psum_spill_words == 4);
  CHECK(rep.counts.gb.psum_write == 13);
  CHECK(rep.counts.gb.psum_read == 13);
  CHECK(rep.counts.dram.psum_write == 13);
  CHECK(rep.counts.dram.psum_read == 4);
}

TEST_CASE("channel accumulation rounds revisit the psum buffer") {
  AcceleratorConfig cfg = cfg44();
  LayerReport rep = simulate_layer(conv(2, 1, 3, 1, 0), {2, 5, 5}, cfg);
  // two rounds: emit twice, read back once, final read once, one exit
  CHECK(rep.counts.gb.psum_write == 18);
  CHECK(rep.counts.gb.psum_read == 18);
  CHECK(rep.counts.dram.psum_write == 9);
  CHECK(rep.counts.dram.psum_read == 0);
  CHECK(rep.counts.dram.ifmap_read == 50);
  CHECK(rep.counts.gb.ifmap_read == 50);
  CHECK(rep.counts.dram.weight_read == 18);
  CHECK(rep.counts.gb.weight_read == 18);
  CHECK(rep.macs == 162);
  CHECK(rep.psum_spill_words == 0);
}

TEST_CASE("ifmap overflow is refetched once per extra filter iteration") {
  AcceleratorConfig cfg = cfg44();
  cfg.alloc.gb_ifmap_kb = kb_for_words(10);  // round needs 16 words
  LayerReport rep = simulate_layer(conv(1, 4, 3, 1, 0), {1, 4, 4}, cfg);
  PassPlan p = plan_layer(conv(1, 4, 3, 1, 0), {1, 4, 4}, cfg);
  CHECK(p.filter_groups == 2);
  CHECK(p.filter_iterations == 2);
  CHECK(rep.ifmap_refetch_words == 6);
  CHECK(rep.counts.dram.ifmap_read == 22);
  CHECK(rep.counts.gb.ifmap_write == 22);
  CHECK(rep.counts.gb.ifmap_read == 32);
}

TEST_CASE("depthwise channels load serially without accumulation") {
  AcceleratorConfig cfg = cfg44();
  LayerReport rep = simulate_layer(depthwise(3, 3), {3, 5, 5}, cfg);
  CHECK(rep.counts.dram.ifmap_read == 75);
  CHECK(rep.counts.gb.ifmap_write == 75);
  CHECK(rep.counts.gb.ifmap_read == 75);
  CHECK(rep.counts.dram.weight_read == 27);
  CHECK(rep.counts.gb.weight_read == 27);
  CHECK(rep.counts.gb.psum_write == 27);
  CHECK(rep.counts.gb.psum_read == 27);
  CHECK(rep.counts.dram.psum_write == 27);
  CHECK(rep.counts.dram.psum_read == 0);
  CHECK(rep.macs == 243);
  CHECK(rep.psum_spill_words == 0);
  CHECK(rep.ifmap_refetch_words == 0);
}

TEST_CASE("energy prices every buffer partition by its own capacity") {
  AcceleratorConfig cfg = cfg44();
  LayerReport rep = simulate_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);
  // all partitions at 54 KB cost 6 per access
  CHECK(rep.energy.rf == 324.0);
  CHECK(rep.energy.gb == 516.0);
  CHECK(rep.energy.dram == 8600.0);
  CHECK(rep.energy.mac == 81.0);
  CHECK(rep.energy.total == 9521.0);

  // distinct partition sizes pick distinct cost-table rows
  cfg.alloc.gb_ifmap_kb = 13.0;   // cost 5
  cfg.alloc.gb_psum_kb = 216.0;   // cost 10
  LayerReport split = simulate_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);
  CHECK(split.energy.gb == 50.0 * 5.0 + 18.0 * 6.0 + 18.0 * 10.0);
  CHECK(split.energy.rf == 324.0);
  CHECK(split.energy.dram == 8600.0);
  CHECK(split.energy.total == 324.0 + 538.0 + 8600.0 + 81.0);
}

TEST_CASE("serial latency sums transfer, delivery, compute and writeback") {
  AcceleratorConfig cfg = cfg44();
  LayerReport rep = simulate_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);
  CHECK(rep.latency.dram_xfer == 860.0);
  CHECK(rep.latency.delivery == 34.0);
  CHECK(rep.latency.compute == 9.0);
  CHECK(rep.latency.writeback == 18.0);
  CHECK(rep.latency.total == 921.0);

  // accumulation adds a read-back to the second round's delivery
  LayerReport acc = simulate_layer(conv(2, 1, 3, 1, 0), {2, 5, 5}, cfg);
  CHECK(acc.latency.dram_xfer == 1540.0);
  CHECK(acc.latency.delivery == 77.0);
  CHECK(acc.latency.compute == 18.0);
  CHECK(acc.latency.writeback == 36.0);
  CHECK(acc.latency.total == 1671.0);

  // a wider bus divides delivery time only
  cfg.bus_words_per_cycle = 2.0;
  LayerReport fast = simulate_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);
  CHECK(fast.latency.delivery == 17.0);
  CHECK(fast.latency.dram_xfer == 860.0);
  CHECK(fast.latency.compute == 9.0);
}

TEST_CASE("overlapped delivery charges the fill plus per-pass stall") {
  AcceleratorConfig cfg = cfg44();
  cfg.overlap_delivery = true;
  // one delivery-bound pass: fill (34) plus the stall beyond compute (25)
  LayerReport rep = simulate_layer(conv(1, 1, 3, 1, 0), {1, 5, 5}, cfg);
  CHECK(rep.latency.delivery == 59.0);
  CHECK(rep.latency.total == 946.0);

  // compute-bound passes hide everything behind the first fill
  cfg.mac_time = 20.0;  // compute 120 vs delivery 34 per pass
  cfg.alloc.gb_ifmap_kb = kb_for_words(10);
  LayerReport hidden = simulate_layer(conv(1, 4, 3, 1, 0), {1, 4, 4}, cfg);
  CHECK(hidden.latency.delivery == 34.0);

  AcceleratorConfig serial = cfg;
  serial.overlap_delivery = false;
  LayerReport base = simulate_layer(conv(1, 4, 3, 1, 0), {1, 4, 4}, serial);
  CHECK(base.latency.delivery == 68.0);
  // the schedules agree on every other component
  CHECK(hidden.latency.compute == base.latency.compute);
  CHECK(hidden.latency.writeback == base.latency.writeback);
  CHECK(hidden.latency.dram_xfer == base.latency.dram_xfer);

  // both modes keep the breakdown additive
  CHECK(hidden.latency.total == hidden.latency.dram_xfer +
                                    hidden.latency.delivery +
                                    hidden.latency.compute +
                                    hidden.latency.writeback);
}

TEST_CASE("pool layers move words without arithmetic") {
  AcceleratorConfig cfg = cfg44();
  LayerReport rep = simulate_layer(pool2x2(2), {2, 4, 4}, cfg);
  CHECK(rep.macs == 0);
  CHECK(rep.counts.rf.total() == 0);
  CHECK(rep.counts.dram.ifmap_read == 32);
  CHECK(rep.counts.gb.ifmap_write == 32);
  CHECK(rep.counts.gb.ifmap_read == 32);
  CHECK(rep.counts.gb.psum_write == 8);
  CHECK(rep.counts.gb.psum_read == 8);
  CHECK(rep.counts.dram.psum_write == 8);
  CHECK(rep.counts.dram.weight_read == 0);
  CHECK(rep.energy.dram == 8000.0);
  CHECK(rep.energy.gb == 480.0);
  CHECK(rep.energy.mac == 0.0);
  CHECK(rep.latency.dram_xfer == 800.0);
  CHECK(rep.latency.delivery == 32.0);
  CHECK(rep.latency.compute == 0.0);
  CHECK(rep.latency.writeback == 16.0);
  CHECK(rep.latency.total == 848.0);
}

TEST_CASE("standalone counting and latency agree with the full report") {
  AcceleratorConfig cfg = cfg44();
  cfg.alloc.gb_psum_kb = kb_for_words(5);
  cfg.alloc.gb_ifmap_kb = kb_for_words(20);
  const std::vector<std::pair<LayerSpec, TensorShape>> cases = {
      {conv(2, 3, 3, 1, 1), {2, 5, 5}},
      {depthwise(3, 3), {3, 5, 5}},
      {fully_connected(6), {12, 1, 1}},
  };
  for (const auto& [l, in] : cases) {
    CAPTURE(l.name);
    PassPlan plan = plan_layer(l, in, cfg);
    LayerReport rep = simulate_layer(l, in, cfg);
    AccessCounts counts =
        count_accesses(plan, l, in, cfg.alloc, cfg.word_bits);
    check_counts(counts, rep.counts);
    LatencyBreakdown lat = layer_latency(plan, l, in, counts, cfg);
    CHECK(lat.total == rep.latency.total);
    CHECK(lat.delivery == rep.latency.delivery);
    CHECK(lat.dram_xfer == rep.latency.dram_xfer);
    EnergyBreakdown e = layer_energy(counts, cfg);
    CHECK(e.total == rep.energy.total);
  }
}

TEST_CASE("input markers cannot be simulated and networks skip them") {
  AcceleratorConfig cfg = cfg44();
  LayerSpec marker;
  marker.kind = LayerKind::Input;
  marker.name = "data";
  CHECK_THROWS_AS(simulate_layer(marker, {1, 5, 5}, cfg), SimulationError);

  NetworkTopology net = parse_network(R"({
    "name": "mini",
    "input": {"c": 1, "h": 5, "w": 5},
    "conv_part": [
      {"kind": "input"},
      {"kind": "conv", "name": "c1", "m": 2, "k": 3},
      {"kind": "pool", "name": "p1", "pool": 3}
    ],
    "fc_part": [{"name": "out", "units": 4}]
  })");
  NetworkReport rep = simulate_network(net, cfg);
  REQUIRE(rep.layers.size() == 3);
  CHECK(rep.layers[0].name == "c1");
  CHECK(rep.layers[1].name == "p1");
  CHECK(rep.layers[2].name == "out");
  double e = 0.0, t = 0.0;
  for (const LayerReport& l : rep.layers) {
    e += l.energy.total;
    t += l.latency.total;
  }
  CHECK(rep.energy_total == e);
  CHECK(rep.latency_total == t);
  CHECK(rep.edp == e * t);
}

TEST_CASE("network simulation names the failing layer") {
  AcceleratorConfig cfg = cfg44();
  NetworkTopology net = parse_network(R"({
    "name": "mini",
    "input": {"c": 1, "h": 8, "w": 8},
    "conv_part": [
      {"kind": "input"},
      {"kind": "conv", "name": "big", "m": 2, "k": 5}
    ],
    "fc_part": []
  })");
  try {
    simulate_network(net, cfg);
    FAIL("expected a simulation error");
  } catch (const SimulationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("mini.big") != std::string::npos);
  }
}

TEST_CASE("flat-priced growth of the psum buffer never raises energy") {
  // identical costs at every capacity isolate the spill volume: a larger
  // buffer can only remove round-trips
  LayerSpec l = conv(4, 6, 3, 1, 1);
  TensorShape in{4, 10, 10};
  double prev_energy = 0.0;
  int64_t prev_spill = 0;
  bool first = true;
  for (int64_t words : {8, 16, 40, 120, 27648}) {
    AcceleratorConfig cfg = cfg44();
    double kb = kb_for_words(words);
    cfg.alloc.gb_psum_kb = kb;
    MemoryLevelCost flat{6.0, 6.0, 2.0, 2.0};
    cfg.gb_cost_table.clear();
    for (double c : {kb, cfg.alloc.gb_ifmap_kb, cfg.alloc.gb_weights_kb})
      cfg.gb_cost_table[c] = flat;
    LayerReport rep = simulate_layer(l, in, cfg);
    if (!first) {
      CHECK(rep.energy.total <= prev_energy);
      CHECK(rep.psum_spill_words <= prev_spill);
    }
    prev_energy = rep.energy.total;
    prev_spill = rep.psum_spill_words;
    first = false;
  }
  // the largest buffer absorbs the block entirely
  AcceleratorConfig big = cfg44();
  CHECK(simulate_layer(l, in, big).psum_spill_words == 0);
}

TEST_CASE("grouped counting equals brute-force pass enumeration") {
  std::mt19937 rng(20240817);
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const std::vector<ArrayDims> arrays = {{4, 4}, {8, 4}, {16, 16}};
  const std::vector<int64_t> cap_words = {10, 20, 40, 27648};

  for (int trial = 0; trial < 300; ++trial) {
    AcceleratorConfig cfg = default_config();
    cfg.array = arrays[pick(0, 2)];
    cfg.alloc.gb_ifmap_kb = kb_for_words(cap_words[pick(0, 3)]);
    cfg.alloc.gb_psum_kb = kb_for_words(cap_words[pick(0, 3)]);

    LayerSpec l;
    TensorShape in;
    switch (pick(0, 3)) {
      case 0: {  // conv
        int64_t k = pick(1, 3);
        l = conv(pick(1, 4), pick(1, 4), k, pick(1, 2), pick(0, 1));
        in = {l.in_channels, k + pick(0, 5), k + pick(0, 5)};
        break;
      }
      case 1: {  // depthwise
        int64_t k = pick(1, 3);
        l = depthwise(pick(1, 4), k);
        in = {l.in_channels, k + pick(0, 5), k + pick(0, 5)};
        break;
      }
      case 2: {  // pointwise = 1x1 conv
        l = conv(pick(1, 4), pick(1, 4), 1, 1, 0);
        l.kind = LayerKind::PointwiseConv;
        in = {l.in_channels, pick(1, 6), pick(1, 6)};
        break;
      }
      default: {  // fully connected
        l = fully_connected(pick(1, 8));
        in = {pick(1, 48), 1, 1};
        break;
      }
    }
    CAPTURE(trial);
    CAPTURE(static_cast<int>(l.kind));
    CAPTURE(in.channels);
    CAPTURE(in.height);
    CAPTURE(in.width);
    CAPTURE(cfg.array.rows);
    CAPTURE(cfg.array.cols);

    oracle::Result want = oracle::run_conv(l, in, cfg);
    LayerReport rep = simulate_layer(l, in, cfg);
    check_counts(rep.counts, want.counts);
    CHECK(rep.psum_spill_words == want.spill);
    CHECK(rep.ifmap_refetch_words == want.refetch);
  }
}
