#include "acceldse/hwmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace acceldse {

using nlohmann::json;

MemoryLevelCost default_cost_table(double capacity_kb) {
  if (capacity_kb <= 0.0)
    throw ValidationError("buffer capacity must be positive, got " +
                          std::to_string(capacity_kb) + " KB");
  double e = 6.0 * std::sqrt(capacity_kb / 54.0);
  e = std::clamp(e, 5.0, 10.0);
  return {e, e, 2.0, 2.0};
}

int64_t capacity_words(double capacity_kb, int64_t word_bits) {
  return static_cast<int64_t>(capacity_kb * 1024.0 * 8.0 /
                              static_cast<double>(word_bits));
}

AcceleratorConfig default_config() {
  AcceleratorConfig cfg;
  for (double kb : {13.0, 27.0, 54.0, 108.0, 216.0})
    cfg.gb_cost_table[kb] = default_cost_table(kb);
  return cfg;
}

namespace {

double get_num(const json& j, const std::string& key,
               const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ParseError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback,
                  const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get_num(j, key, where);
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ParseError(where + ": unknown key '" + item.key() + "'");
}

MemoryLevelCost parse_cost(const json& j, const MemoryLevelCost& base,
                           const std::string& where,
                           bool allow_capacity = false) {
  std::set<std::string> known = {"read_e", "write_e", "read_t", "write_t"};
  if (allow_capacity) known.insert("capacity_kb");
  reject_unknown(j, known, where);
  MemoryLevelCost c = base;
  c.read_energy = get_num_or(j, "read_e", base.read_energy, where);
  c.write_energy = get_num_or(j, "write_e", base.write_energy, where);
  c.read_time = get_num_or(j, "read_t", base.read_time, where);
  c.write_time = get_num_or(j, "write_t", base.write_time, where);
  return c;
}

}  // namespace

AcceleratorConfig load_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config document must be an object");
  reject_unknown(doc,
                 {"array", "alloc", "gb_ifmap", "gb_psum", "gb_weights",
                  "costs", "mac", "bus", "word_bits", "rf_capacity",
                  "overlap_delivery", "strict_costs"},
                 "config");

  AcceleratorConfig cfg = default_config();
  if (doc.contains("array")) {
    const json& a = doc.at("array");
    if (a.is_array() && a.size() == 2 && a[0].is_number_integer() &&
        a[1].is_number_integer()) {
      cfg.array = {a[0].get<int64_t>(), a[1].get<int64_t>()};
    } else if (a.is_object()) {
      reject_unknown(a, {"rows", "cols"}, "array");
      cfg.array = {static_cast<int64_t>(get_num(a, "rows", "array")),
                   static_cast<int64_t>(get_num(a, "cols", "array"))};
    } else {
      throw ParseError("config: 'array' must be [rows, cols]");
    }
  }

  auto take_alloc = [&](const json& j, const std::string& where) {
    reject_unknown(j, {"gb_ifmap", "gb_psum", "gb_weights"}, where);
    cfg.alloc.gb_ifmap_kb = get_num_or(j, "gb_ifmap", cfg.alloc.gb_ifmap_kb, where);
    cfg.alloc.gb_psum_kb = get_num_or(j, "gb_psum", cfg.alloc.gb_psum_kb, where);
    cfg.alloc.gb_weights_kb =
        get_num_or(j, "gb_weights", cfg.alloc.gb_weights_kb, where);
  };
  if (doc.contains("alloc")) take_alloc(doc.at("alloc"), "alloc");
  // top-level shorthand
  json shorthand = json::object();
  for (const char* key : {"gb_ifmap", "gb_psum", "gb_weights"})
    if (doc.contains(key)) shorthand[key] = doc.at(key);
  if (!shorthand.empty()) take_alloc(shorthand, "config");

  if (doc.contains("costs")) {
    const json& c = doc.at("costs");
    reject_unknown(c, {"rf", "gb", "dram"}, "costs");
    if (c.contains("rf")) cfg.rf_cost = parse_cost(c.at("rf"), cfg.rf_cost, "costs.rf");
    if (c.contains("dram"))
      cfg.dram_cost = parse_cost(c.at("dram"), cfg.dram_cost, "costs.dram");
    if (c.contains("gb")) {
      if (!c.at("gb").is_array())
        throw ParseError("costs.gb must be an array of capacity entries");
      for (const json& e : c.at("gb")) {
        if (!e.contains("capacity_kb"))
          throw ParseError("costs.gb entry missing 'capacity_kb'");
        double kb = get_num(e, "capacity_kb", "costs.gb");
        if (kb <= 0.0)
          throw ValidationError("costs.gb: capacity must be positive");
        MemoryLevelCost base =
            cfg.strict_costs ? MemoryLevelCost{} : default_cost_table(kb);
        cfg.gb_cost_table[kb] = parse_cost(e, base, "costs.gb", true);
      }
    }
  }
  if (doc.contains("mac")) {
    reject_unknown(doc.at("mac"), {"energy", "time"}, "mac");
    cfg.mac_energy = get_num_or(doc.at("mac"), "energy", cfg.mac_energy, "mac");
    cfg.mac_time = get_num_or(doc.at("mac"), "time", cfg.mac_time, "mac");
  }
  if (doc.contains("bus")) {
    reject_unknown(doc.at("bus"), {"words_per_cycle"}, "bus");
    cfg.bus_words_per_cycle =
        get_num_or(doc.at("bus"), "words_per_cycle", 1.0, "bus");
  }
  if (doc.contains("word_bits"))
    cfg.word_bits = static_cast<int64_t>(get_num(doc, "word_bits", "config"));
  if (doc.contains("rf_capacity"))
    cfg.rf_capacity_words =
        static_cast<int64_t>(get_num(doc, "rf_capacity", "config"));
  if (doc.contains("overlap_delivery")) {
    if (!doc.at("overlap_delivery").is_boolean())
      throw ParseError("config: 'overlap_delivery' must be a boolean");
    cfg.overlap_delivery = doc.at("overlap_delivery").get<bool>();
  }
  if (doc.contains("strict_costs")) {
    if (!doc.at("strict_costs").is_boolean())
      throw ParseError("config: 'strict_costs' must be a boolean");
    cfg.strict_costs = doc.at("strict_costs").get<bool>();
  }

  std::vector<std::string> problems = validate(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  return cfg;
}

std::vector<std::string> validate(const AcceleratorConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.array.rows < 1 || cfg.array.cols < 1)
    out.push_back("array dimensions must be positive");
  if (cfg.alloc.gb_ifmap_kb <= 0.0) out.push_back("gb_ifmap must be positive");
  if (cfg.alloc.gb_psum_kb <= 0.0) out.push_back("gb_psum must be positive");
  if (cfg.alloc.gb_weights_kb <= 0.0)
    out.push_back("gb_weights must be positive");
  if (cfg.rf_capacity_words < 1) out.push_back("rf_capacity must be positive");
  if (cfg.word_bits < 1) out.push_back("word_bits must be positive");
  if (cfg.bus_words_per_cycle <= 0.0)
    out.push_back("bus words_per_cycle must be positive");
  if (cfg.mac_energy < 0.0) out.push_back("mac energy must be non-negative");
  if (cfg.mac_time < 0.0) out.push_back("mac time must be non-negative");
  if (cfg.strict_costs) {
    for (double kb : {cfg.alloc.gb_ifmap_kb, cfg.alloc.gb_psum_kb,
                      cfg.alloc.gb_weights_kb}) {
      if (kb > 0.0 && !cfg.gb_cost_table.count(kb))
        out.push_back("no cost-table entry for " + std::to_string(kb) +
                      " KB and defaults are disabled");
    }
  }
  for (const auto& [kb, cost] : cfg.gb_cost_table) {
    if (cost.read_energy < 0.0 || cost.write_energy < 0.0 ||
        cost.read_time < 0.0 || cost.write_time < 0.0)
      out.push_back("cost entry for " + std::to_string(kb) +
                    " KB has negative fields");
  }
  return out;
}

MemoryLevelCost gb_cost_for(const AcceleratorConfig& cfg, double capacity_kb) {
  auto it = cfg.gb_cost_table.find(capacity_kb);
  if (it != cfg.gb_cost_table.end()) return it->second;
  if (cfg.strict_costs)
    throw ValidationError("no cost-table entry for " +
                          std::to_string(capacity_kb) +
                          " KB and defaults are disabled");
  return default_cost_table(capacity_kb);
}

std::string config_to_json(const AcceleratorConfig& cfg) {
  json doc;
  doc["array"] = {cfg.array.rows, cfg.array.cols};
  doc["alloc"] = {{"gb_ifmap", cfg.alloc.gb_ifmap_kb},
                  {"gb_psum", cfg.alloc.gb_psum_kb},
                  {"gb_weights", cfg.alloc.gb_weights_kb}};
  json gb = json::array();
  for (const auto& [kb, c] : cfg.gb_cost_table)
    gb.push_back({{"capacity_kb", kb},
                  {"read_e", c.read_energy},
                  {"write_e", c.write_energy},
                  {"read_t", c.read_time},
                  {"write_t", c.write_time}});
  doc["costs"] = {
      {"rf",
       {{"read_e", cfg.rf_cost.read_energy},
        {"write_e", cfg.rf_cost.write_energy},
        {"read_t", cfg.rf_cost.read_time},
        {"write_t", cfg.rf_cost.write_time}}},
      {"gb", gb},
      {"dram",
       {{"read_e", cfg.dram_cost.read_energy},
        {"write_e", cfg.dram_cost.write_energy},
        {"read_t", cfg.dram_cost.read_time},
        {"write_t", cfg.dram_cost.write_time}}}};
  doc["mac"] = {{"energy", cfg.mac_energy}, {"time", cfg.mac_time}};
  doc["bus"] = {{"words_per_cycle", cfg.bus_words_per_cycle}};
  doc["word_bits"] = cfg.word_bits;
  doc["rf_capacity"] = cfg.rf_capacity_words;
  doc["overlap_delivery"] = cfg.overlap_delivery;
  doc["strict_costs"] = cfg.strict_costs;
  return doc.dump();
}

std::string config_hash(const AcceleratorConfig& cfg) {
  const std::string text = config_to_json(cfg);
  uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace acceldse
