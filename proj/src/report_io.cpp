#include "acceldse/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "json.hpp"

namespace acceldse {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// One fixed-layout comment line; '-' fills empty segments so the shape never
// varies.
std::string manifest_comment(const RunManifest& m) {
  auto or_dash = [](const std::string& s) { return s.empty() ? "-" : s; };
  return "# acceldse " + version_string() + " | " + or_dash(m.command) +
         " | inputs: " + or_dash(join(m.inputs, ",")) +
         " | config: " + or_dash(m.config_hash) +
         " | space: " + or_dash(m.space) + "\n";
}

json manifest_json(const RunManifest& m) {
  json j;
  j["tool"] = "acceldse";
  j["version"] = version_string();
  j["command"] = m.command;
  j["inputs"] = m.inputs;
  j["config_hash"] = m.config_hash;
  j["space"] = m.space;
  return j;
}

std::string array_label(const ArrayDims& a) {
  return std::to_string(a.rows) + "x" + std::to_string(a.cols);
}

json point_json(const DesignPoint& p) {
  json j;
  j["gb_psum_kb"] = p.gb_psum_kb;
  j["gb_ifmap_kb"] = p.gb_ifmap_kb;
  j["array"] = array_label(p.array);
  return j;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("sweep CSV line " + std::to_string(line_no) +
                     ": bad number '" + s + "'");
  }
}

int64_t parse_int(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("sweep CSV line " + std::to_string(line_no) +
                     ": bad integer '" + s + "'");
  }
}

}  // namespace

std::string version_string() { return "0.1.0"; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];  // shortest representation that parses back exactly
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string report_to_csv(const NetworkReport& report,
                          const RunManifest& manifest) {
  std::string out = manifest_comment(manifest);
  out +=
      "layer,macs,e_rf,e_gb,e_dram,e_mac,e_total,t_dram,t_delivery,t_compute,"
      "t_writeback,t_total,util,psum_spill,ifmap_refetch\n";
  for (const LayerReport& lr : report.layers) {
    out += lr.name;
    out += ',' + std::to_string(lr.macs);
    out += ',' + format_number(lr.energy.rf);
    out += ',' + format_number(lr.energy.gb);
    out += ',' + format_number(lr.energy.dram);
    out += ',' + format_number(lr.energy.mac);
    out += ',' + format_number(lr.energy.total);
    out += ',' + format_number(lr.latency.dram_xfer);
    out += ',' + format_number(lr.latency.delivery);
    out += ',' + format_number(lr.latency.compute);
    out += ',' + format_number(lr.latency.writeback);
    out += ',' + format_number(lr.latency.total);
    out += ',' + format_number(lr.utilization);
    out += ',' + std::to_string(lr.psum_spill_words);
    out += ',' + std::to_string(lr.ifmap_refetch_words);
    out += '\n';
  }
  return out;
}

namespace {

json counts_json(const AccessCounts& c) {
  auto level = [](const LevelCounts& l) {
    json j;
    j["ifmap_read"] = l.ifmap_read;
    j["ifmap_write"] = l.ifmap_write;
    j["weight_read"] = l.weight_read;
    j["weight_write"] = l.weight_write;
    j["psum_read"] = l.psum_read;
    j["psum_write"] = l.psum_write;
    return j;
  };
  json j;
  j["rf"] = level(c.rf);
  j["gb"] = level(c.gb);
  j["dram"] = level(c.dram);
  j["macs"] = c.mac_count;
  return j;
}

}  // namespace

std::string report_to_json(const NetworkReport& report,
                           const RunManifest& manifest) {
  json j;
  j["manifest"] = manifest_json(manifest);
  j["network"] = report.network;
  j["energy_total"] = report.energy_total;
  j["latency_total"] = report.latency_total;
  j["edp"] = report.edp;
  json layers = json::array();
  for (const LayerReport& lr : report.layers) {
    json l;
    l["layer"] = lr.name;
    l["kind"] = kind_name(lr.kind);
    l["macs"] = lr.macs;
    l["energy"] = {{"rf", lr.energy.rf},
                   {"gb", lr.energy.gb},
                   {"dram", lr.energy.dram},
                   {"mac", lr.energy.mac},
                   {"total", lr.energy.total}};
    l["latency"] = {{"dram_xfer", lr.latency.dram_xfer},
                    {"delivery", lr.latency.delivery},
                    {"compute", lr.latency.compute},
                    {"writeback", lr.latency.writeback},
                    {"total", lr.latency.total}};
    l["utilization"] = lr.utilization;
    l["psum_spill_words"] = lr.psum_spill_words;
    l["ifmap_refetch_words"] = lr.ifmap_refetch_words;
    l["counts"] = counts_json(lr.counts);
    layers.push_back(l);
  }
  j["layers"] = layers;
  return j.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepResult& result,
                         const RunManifest& manifest) {
  std::string out = manifest_comment(manifest);
  out += "network,gb_psum_kb,gb_ifmap_kb,array_rows,array_cols,energy,latency,edp\n";
  for (const SweepRecord& r : result.records) {
    out += result.network;
    out += ',' + format_number(r.point.gb_psum_kb);
    out += ',' + format_number(r.point.gb_ifmap_kb);
    out += ',' + std::to_string(r.point.array.rows);
    out += ',' + std::to_string(r.point.array.cols);
    out += ',' + format_number(r.energy);
    out += ',' + format_number(r.latency);
    out += ',' + format_number(r.edp);
    out += '\n';
  }
  return out;
}

SweepResult sweep_from_csv(const std::string& text) {
  SweepResult result;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<std::pair<int64_t, int64_t>> arrays_seen;
  auto array_index = [&](int64_t rows, int64_t cols) {
    for (size_t i = 0; i < arrays_seen.size(); ++i)
      if (arrays_seen[i] == std::make_pair(rows, cols))
        return static_cast<int64_t>(i) + 1;
    arrays_seen.emplace_back(rows, cols);
    return static_cast<int64_t>(arrays_seen.size());
  };
  auto remember = [](std::vector<double>& seen, double v) {
    for (double s : seen)
      if (s == v) return;
    seen.push_back(v);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line !=
          "network,gb_psum_kb,gb_ifmap_kb,array_rows,array_cols,energy,"
          "latency,edp")
        throw ParseError("sweep CSV line " + std::to_string(line_no) +
                         ": unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 8)
      throw ParseError("sweep CSV line " + std::to_string(line_no) + ": expected 8 fields, got " +
                       std::to_string(f.size()));
    if (result.network.empty())
      result.network = f[0];
    else if (result.network != f[0])
      throw ParseError("sweep CSV line " + std::to_string(line_no) +
                       ": mixed networks '" + result.network + "' and '" +
                       f[0] + "'");
    SweepRecord r;
    r.point.gb_psum_kb = parse_double(f[1], line_no);
    r.point.gb_ifmap_kb = parse_double(f[2], line_no);
    r.point.array.rows = parse_int(f[3], line_no);
    r.point.array.cols = parse_int(f[4], line_no);
    r.point.array_index = array_index(r.point.array.rows, r.point.array.cols);
    r.energy = parse_double(f[5], line_no);
    r.latency = parse_double(f[6], line_no);
    r.edp = parse_double(f[7], line_no);
    result.records.push_back(r);
    remember(result.space.gb_psum_kb, r.point.gb_psum_kb);
    remember(result.space.gb_ifmap_kb, r.point.gb_ifmap_kb);
  }
  if (!header_seen) throw ParseError("sweep CSV: missing header line");
  if (result.records.empty()) throw ParseError("sweep CSV: no data rows");
  for (const auto& [rows, cols] : arrays_seen)
    result.space.arrays.push_back({rows, cols});
  return result;
}

std::string metrics_to_json(const SweepResult& result, double epsilon,
                            Objective objective, const RunManifest& manifest) {
  json j;
  j["manifest"] = manifest_json(manifest);
  j["network"] = result.network;
  j["objective"] = objective_name(objective);
  j["epsilon"] = epsilon;
  auto [mean_pct, max_pct] = edp_distance_stats(result);
  j["edp_distance"] = {{"mean_pct", mean_pct}, {"max_pct", max_pct}};
  json per_array = json::array();
  for (size_t a = 0; a < result.space.arrays.size(); ++a) {
    const int64_t idx = static_cast<int64_t>(a) + 1;
    SliceMetrics ifm = slice_metrics(result, idx, /*sweep_ifmap=*/true);
    SliceMetrics psm = slice_metrics(result, idx, /*sweep_ifmap=*/false);
    json e;
    e["array"] = array_label(result.space.arrays[a]);
    e["array_index"] = idx;
    e["ifmap_sweep"] = {{"fixed_gb_psum_kb", ifm.fixed_kb},
                        {"mu_min_pct", ifm.mu_min_pct},
                        {"delta_min_max_pct", ifm.delta_min_max_pct}};
    e["psum_sweep"] = {{"fixed_gb_ifmap_kb", psm.fixed_kb},
                       {"mu_min_pct", psm.mu_min_pct},
                       {"delta_min_max_pct", psm.delta_min_max_pct}};
    per_array.push_back(e);
  }
  j["per_array"] = per_array;
  json near = json::array();
  for (const DesignPoint& p : near_optimal_set(result, epsilon, objective))
    near.push_back(point_json(p));
  j["near_optimal"] = near;
  return j.dump(2) + "\n";
}

std::string plotdata_to_csv(const SweepResult& result, double fixed_ifmap_kb,
                            const RunManifest& manifest) {
  bool have_if = false;
  for (double v : result.space.gb_ifmap_kb) have_if = have_if || v == fixed_ifmap_kb;
  if (!have_if)
    throw ValidationError("gb_ifmap size " + format_number(fixed_ifmap_kb) +
                          "KB is not part of the sweep");
  std::string out = manifest_comment(manifest);
  out += "gb_psum_kb";
  for (const ArrayDims& a : result.space.arrays) out += ',' + array_label(a);
  out += '\n';
  for (double ps : result.space.gb_psum_kb) {
    out += format_number(ps);
    for (size_t a = 0; a < result.space.arrays.size(); ++a) {
      const int64_t idx = static_cast<int64_t>(a) + 1;
      const SweepRecord* found = nullptr;
      for (const SweepRecord& r : result.records)
        if (r.point.gb_psum_kb == ps && r.point.gb_ifmap_kb == fixed_ifmap_kb &&
            r.point.array_index == idx)
          found = &r;
      if (!found) throw ValidationError("sweep is missing a point for the plot");
      out += ',' + format_number(found->energy);
    }
    out += '\n';
  }
  return out;
}

std::string recommendation_to_json(const CoreRecommendation& rec,
                                   const RunManifest& manifest) {
  json j;
  j["manifest"] = manifest_json(manifest);
  j["epsilon"] = rec.epsilon;
  j["objective"] = objective_name(rec.objective);
  json cores = json::array();
  for (const DesignPoint& p : rec.cores) cores.push_back(point_json(p));
  j["cores"] = cores;
  json cov;
  for (const auto& [net, idx] : rec.coverage) cov[net] = idx;
  j["coverage"] = cov;
  return j.dump(2) + "\n";
}

std::string plan_to_json(const NetworkPartition& partition,
                         const RunManifest& manifest) {
  json j;
  j["manifest"] = manifest_json(manifest);
  json layers = json::array();
  for (size_t i = 0; i < partition.layer_names.size(); ++i)
    layers.push_back({{"layer", partition.layer_names[i]},
                      {"latency", partition.layer_latencies[i]}});
  j["layers"] = layers;
  json cores = json::array();
  for (size_t s = 0; s < partition.plan.stages.size(); ++s)
    cores.push_back({{"l_initial", partition.plan.stages[s].l_initial},
                     {"n_c", partition.plan.stages[s].n_c},
                     {"stage_latency", partition.plan.stage_latencies[s]}});
  j["cores"] = cores;
  j["max_latency"] = partition.plan.max_latency;
  j["speedup"] = partition.plan.speedup;
  return j.dump(2) + "\n";
}

std::string plan_to_table(const NetworkPartition& partition) {
  std::string out;
  for (size_t s = 0; s < partition.plan.stages.size(); ++s) {
    const StageAssign& st = partition.plan.stages[s];
    out += "core " + std::to_string(s + 1) + ": (" +
           std::to_string(st.l_initial) + ", " + std::to_string(st.n_c) +
           ")  latency " + format_number(partition.plan.stage_latencies[s]);
    if (st.n_c == 0) out += "  [idle]";
    out += '\n';
  }
  out += "max stage latency " + format_number(partition.plan.max_latency) +
         "\n";
  out += "speedup " + format_number(partition.plan.speedup) + "x\n";
  return out;
}

}  // namespace acceldse
