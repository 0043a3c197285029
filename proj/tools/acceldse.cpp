// Command line front end: simulate, sweep, recommend and partition.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acceldse/dse.hpp"
#include "acceldse/errors.hpp"
#include "acceldse/hwmodel.hpp"
#include "acceldse/netmodel.hpp"
#include "acceldse/partition.hpp"
#include "acceldse/report_io.hpp"
#include "acceldse/rsim.hpp"

namespace fs = std::filesystem;
using namespace acceldse;

namespace {

struct NetFlags {
  std::string network_file;
  std::string builtin_name;
};

struct ConfigFlags {
  std::string config_file;
  double gb_psum = -1.0;
  double gb_ifmap = -1.0;
  std::string array;
  bool overlap_delivery = false;
};

void add_net_flags(CLI::App* cmd, NetFlags& f, bool required = true) {
  auto* net = cmd->add_option("--network", f.network_file,
                              "network topology JSON file");
  auto* bi = cmd->add_option("--builtin", f.builtin_name,
                             "built-in network name");
  net->excludes(bi);
  if (required) {
    // one of the two must be present; checked after parse for a clear message
  }
  net->check(CLI::ExistingFile);
}

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config_file, "accelerator config JSON file")
      ->envname("ACCELDSE_CONFIG")
      ->check(CLI::ExistingFile);
  cmd->add_option("--gb-psum", f.gb_psum, "psum buffer size in KB");
  cmd->add_option("--gb-ifmap", f.gb_ifmap, "ifmap buffer size in KB");
  cmd->add_option("--array", f.array, "PE array as ROWSxCOLS, e.g. 16x16");
  cmd->add_flag("--overlap-delivery", f.overlap_delivery,
                "overlap delivery with compute");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ArrayDims parse_array(const std::string& text) {
  auto x = text.find('x');
  if (x == std::string::npos) x = text.find('X');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw ParseError("bad array '" + text + "' (expected ROWSxCOLS)");
  try {
    size_t p1 = 0, p2 = 0;
    int64_t rows = std::stoll(text.substr(0, x), &p1);
    int64_t cols = std::stoll(text.substr(x + 1), &p2);
    if (p1 != x || p2 != text.size() - x - 1 || rows < 1 || cols < 1)
      throw std::invalid_argument(text);
    return {rows, cols};
  } catch (const std::exception&) {
    throw ParseError("bad array '" + text + "' (expected ROWSxCOLS)");
  }
}

NetworkTopology load_net(const NetFlags& f) {
  if (f.network_file.empty() && f.builtin_name.empty())
    throw ValidationError("one of --network or --builtin is required");
  if (!f.network_file.empty()) return parse_network(read_file(f.network_file));
  return builtin(f.builtin_name);
}

AcceleratorConfig build_config(const ConfigFlags& f) {
  AcceleratorConfig cfg =
      f.config_file.empty() ? default_config() : load_config(read_file(f.config_file));
  if (f.gb_psum > 0) cfg.alloc.gb_psum_kb = f.gb_psum;
  if (f.gb_ifmap > 0) cfg.alloc.gb_ifmap_kb = f.gb_ifmap;
  if (!f.array.empty()) cfg.array = parse_array(f.array);
  if (f.overlap_delivery) cfg.overlap_delivery = true;
  std::vector<std::string> problems = validate(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return cfg;
}

std::string net_identity(const NetFlags& f) {
  return f.network_file.empty() ? f.builtin_name : f.network_file;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::vector<double> parse_kb_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t pos = 0;
      double v = std::stod(item, &pos);
      if (pos != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("bad size '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw ParseError("empty size list");
  return out;
}

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
  NetFlags net;
  ConfigFlags config;
  std::string format = "both";
  std::string out_dir = ".";
};

int run_simulate(const SimulateArgs& a) {
  NetworkTopology net = load_net(a.net);
  AcceleratorConfig cfg = build_config(a.config);
  NetworkReport report = simulate_network(net, cfg);

  RunManifest manifest;
  manifest.command = "simulate " + net_identity(a.net);
  manifest.inputs = {net_identity(a.net)};
  manifest.config_hash = config_hash(cfg);

  fs::path out(a.out_dir);
  if (a.format == "csv" || a.format == "both")
    write_text(out / (net.name + "_layers.csv"), report_to_csv(report, manifest));
  if (a.format == "json" || a.format == "both")
    write_text(out / (net.name + "_layers.json"), report_to_json(report, manifest));

  std::cout << net.name << ": " << report.layers.size() << " layers\n"
            << "energy  " << format_number(report.energy_total) << "\n"
            << "latency " << format_number(report.latency_total) << "\n"
            << "edp     " << format_number(report.edp) << "\n";
  return 0;
}

// ---- sweep -------------------------------------------------------------

struct SweepArgs {
  NetFlags net;
  ConfigFlags config;
  std::string gb_psum_list, gb_ifmap_list, arrays_list;
  double epsilon = 0.05;
  std::string objective = "edp";
  double plot_ifmap = 216.0;
  int jobs = 1;
  std::string format = "both";
  std::string out_dir = ".";
};

SweepSpace build_space(const SweepArgs& a) {
  SweepSpace space = default_space();
  if (!a.gb_psum_list.empty()) space.gb_psum_kb = parse_kb_list(a.gb_psum_list);
  if (!a.gb_ifmap_list.empty())
    space.gb_ifmap_kb = parse_kb_list(a.gb_ifmap_list);
  if (!a.arrays_list.empty()) {
    space.arrays.clear();
    std::istringstream in(a.arrays_list);
    std::string item;
    while (std::getline(in, item, ','))
      space.arrays.push_back(parse_array(item));
    if (space.arrays.empty()) throw ParseError("empty array list");
  }
  return space;
}

std::string space_label(const SweepSpace& s) {
  return std::to_string(s.gb_psum_kb.size()) + "x" +
         std::to_string(s.gb_ifmap_kb.size()) + "x" +
         std::to_string(s.arrays.size()) + " points";
}

int run_sweep(const SweepArgs& a) {
  NetworkTopology net = load_net(a.net);
  AcceleratorConfig cfg = build_config(a.config);
  SweepSpace space = build_space(a);
  Objective obj = parse_objective(a.objective);
  SweepResult result = sweep(net, cfg, space, a.jobs);

  RunManifest manifest;
  manifest.command = "sweep " + net_identity(a.net);
  manifest.inputs = {net_identity(a.net)};
  manifest.config_hash = config_hash(cfg);
  manifest.space = space_label(space);

  fs::path out(a.out_dir);
  if (a.format == "csv" || a.format == "both") {
    write_text(out / (net.name + "_sweep.csv"), sweep_to_csv(result, manifest));
    bool have_if = false;
    for (double v : space.gb_ifmap_kb) have_if = have_if || v == a.plot_ifmap;
    if (have_if)
      write_text(out / (net.name + "_plotdata.csv"),
                 plotdata_to_csv(result, a.plot_ifmap, manifest));
  }
  if (a.format == "json" || a.format == "both")
    write_text(out / (net.name + "_metrics.json"),
               metrics_to_json(result, a.epsilon, obj, manifest));

  double best = objective_value(result.records.front(), obj);
  const SweepRecord* best_rec = &result.records.front();
  for (const SweepRecord& r : result.records)
    if (objective_value(r, obj) < best) {
      best = objective_value(r, obj);
      best_rec = &r;
    }
  std::cout << net.name << ": swept " << result.records.size() << " points\n"
            << "best " << a.objective << " " << format_number(best) << " at "
            << point_label(best_rec->point) << "\n";
  return 0;
}

// ---- recommend ---------------------------------------------------------

struct RecommendArgs {
  std::vector<std::string> builtins;
  std::vector<std::string> network_files;
  std::vector<std::string> sweep_files;
  ConfigFlags config;
  double epsilon = 0.05;
  std::string objective = "edp";
  int64_t max_cores = 4;
  int jobs = 1;
  std::string out_dir = ".";
};

int run_recommend(const RecommendArgs& a) {
  if (a.builtins.empty() && a.network_files.empty() && a.sweep_files.empty())
    throw ValidationError(
        "recommend needs at least one --builtin, --network or --sweep-file");
  AcceleratorConfig cfg = build_config(a.config);
  Objective obj = parse_objective(a.objective);
  SweepSpace space = default_space();

  std::vector<std::string> inputs;
  std::map<std::string, SweepResult> sweeps;
  auto add_sweep = [&](SweepResult&& r, const std::string& input) {
    if (sweeps.count(r.network))
      throw ValidationError("network '" + r.network + "' appears twice");
    inputs.push_back(input);
    sweeps.emplace(r.network, std::move(r));
  };
  for (const std::string& name : a.builtins)
    add_sweep(sweep(builtin(name), cfg, space, a.jobs), name);
  for (const std::string& file : a.network_files)
    add_sweep(sweep(parse_network(read_file(file)), cfg, space, a.jobs), file);
  for (const std::string& file : a.sweep_files)
    add_sweep(sweep_from_csv(read_file(file)), file);

  std::map<std::string, std::vector<DesignPoint>> candidates;
  for (const auto& [name, result] : sweeps)
    candidates[name] = near_optimal_set(result, a.epsilon, obj);
  CoreRecommendation rec =
      recommend_cores(candidates, a.max_cores, a.epsilon, obj);

  RunManifest manifest;
  manifest.command = "recommend";
  manifest.inputs = inputs;
  manifest.config_hash = config_hash(cfg);
  manifest.space = space_label(space);

  fs::path out(a.out_dir);
  write_text(out / "recommendation.json", recommendation_to_json(rec, manifest));
  for (const auto& [name, result] : sweeps) {
    RunManifest m = manifest;
    m.command = "recommend " + name;
    write_text(out / (name + "_sweep.csv"), sweep_to_csv(result, m));
  }

  std::cout << "covered " << sweeps.size() << " networks with "
            << rec.cores.size() << " core type(s)\n";
  for (size_t i = 0; i < rec.cores.size(); ++i)
    std::cout << "core " << i + 1 << ": " << point_label(rec.cores[i]) << "\n";
  return 0;
}

// ---- partition ---------------------------------------------------------

struct PartitionArgs {
  NetFlags net;
  ConfigFlags config;
  std::string latencies_file;
  int64_t cores = 2;
  bool verify = false;
  std::string format = "both";
  std::string out_dir = ".";
};

int run_partition(const PartitionArgs& a) {
  NetworkPartition part;
  std::string identity;
  if (!a.latencies_file.empty()) {
    identity = a.latencies_file;
    std::istringstream in(read_file(a.latencies_file));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      try {
        size_t pos = 0;
        double v = std::stod(line, &pos);
        if (pos != line.size()) throw std::invalid_argument(line);
        part.layer_latencies.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(a.latencies_file + " line " + std::to_string(line_no) +
                         ": bad latency '" + line + "'");
      }
      part.layer_names.push_back("L" + std::to_string(part.layer_latencies.size()));
    }
    if (part.layer_latencies.empty())
      throw ParseError(a.latencies_file + ": no latencies");
    part.plan = bnb_partition(part.layer_latencies, a.cores);
  } else {
    identity = net_identity(a.net);
    NetworkTopology net = load_net(a.net);
    AcceleratorConfig cfg = build_config(a.config);
    part = partition_network(net, cfg, a.cores);
  }

  if (a.verify) {
    double oracle = dp_oracle_partition(part.layer_latencies, a.cores);
    double diff = std::abs(oracle - part.plan.max_latency);
    double scale = std::max(std::abs(oracle), 1.0);
    if (diff > 1e-9 * scale)
      throw SimulationError("partition verification failed: search " +
                            format_number(part.plan.max_latency) +
                            " vs oracle " + format_number(oracle));
    std::cout << "verified against the exact oracle\n";
  }

  RunManifest manifest;
  manifest.command = "partition " + identity + " cores=" + std::to_string(a.cores);
  manifest.inputs = {identity};
  if (a.latencies_file.empty()) {
    AcceleratorConfig cfg = build_config(a.config);
    manifest.config_hash = config_hash(cfg);
  }

  fs::path out(a.out_dir);
  std::string stem = fs::path(identity).stem().string();
  if (a.format == "json" || a.format == "both")
    write_text(out / (stem + "_plan.json"), plan_to_json(part, manifest));

  std::cout << plan_to_table(part);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analytical simulator and design space explorer for array-based "
               "DNN accelerators"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "per-layer energy and latency");
  add_net_flags(c_sim, sim.net);
  add_config_flags(c_sim, sim.config);
  c_sim->add_option("--format", sim.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  c_sim->add_option("--out", sim.out_dir, "output directory");

  SweepArgs swp;
  CLI::App* c_swp = app.add_subcommand("sweep", "evaluate a design space");
  add_net_flags(c_swp, swp.net);
  add_config_flags(c_swp, swp.config);
  c_swp->add_option("--gb-psum-sizes", swp.gb_psum_list,
                    "comma list of psum sizes in KB");
  c_swp->add_option("--gb-ifmap-sizes", swp.gb_ifmap_list,
                    "comma list of ifmap sizes in KB");
  c_swp->add_option("--arrays", swp.arrays_list,
                    "comma list of arrays, e.g. 16x16,32x32");
  c_swp->add_option("--epsilon", swp.epsilon, "near-optimal tolerance");
  c_swp->add_option("--objective", swp.objective, "energy, latency or edp")
      ->check(CLI::IsMember({"energy", "latency", "edp"}));
  c_swp->add_option("--plot-ifmap", swp.plot_ifmap,
                    "gb_ifmap size (KB) fixed in the plot data");
  c_swp->add_option("--jobs", swp.jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  c_swp->add_option("--format", swp.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  c_swp->add_option("--out", swp.out_dir, "output directory");

  RecommendArgs rcm;
  CLI::App* c_rcm = app.add_subcommand(
      "recommend", "smallest core set covering several networks");
  c_rcm->add_option("--builtin", rcm.builtins, "built-in network name (repeatable)");
  c_rcm->add_option("--network", rcm.network_files,
                    "network topology JSON file (repeatable)")
      ->check(CLI::ExistingFile);
  c_rcm->add_option("--sweep-file", rcm.sweep_files,
                    "previously written sweep CSV (repeatable)")
      ->check(CLI::ExistingFile);
  add_config_flags(c_rcm, rcm.config);
  c_rcm->add_option("--epsilon", rcm.epsilon, "near-optimal tolerance");
  c_rcm->add_option("--objective", rcm.objective, "energy, latency or edp")
      ->check(CLI::IsMember({"energy", "latency", "edp"}));
  c_rcm->add_option("--max-cores", rcm.max_cores, "core type budget")
      ->check(CLI::PositiveNumber);
  c_rcm->add_option("--jobs", rcm.jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  c_rcm->add_option("--out", rcm.out_dir, "output directory");

  PartitionArgs prt;
  CLI::App* c_prt = app.add_subcommand(
      "partition", "split layers over pipelined cores");
  add_net_flags(c_prt, prt.net, /*required=*/false);
  add_config_flags(c_prt, prt.config);
  c_prt->add_option("--latencies-file", prt.latencies_file,
                    "plain list of layer latencies (one per line)")
      ->check(CLI::ExistingFile);
  c_prt->add_option("--cores", prt.cores, "number of pipeline stages")
      ->check(CLI::PositiveNumber);
  c_prt->add_flag("--verify", prt.verify, "cross-check with the exact oracle");
  c_prt->add_option("--format", prt.format, "json or both")
      ->check(CLI::IsMember({"json", "both"}));
  c_prt->add_option("--out", prt.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_swp->parsed()) return run_sweep(swp);
    if (c_rcm->parsed()) return run_recommend(rcm);
    if (c_prt->parsed()) return run_partition(prt);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
