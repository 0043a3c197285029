// Python bindings: the main operations, with structured results passed as
// JSON strings the package wrapper decodes.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "acceldse/dse.hpp"
#include "acceldse/errors.hpp"
#include "acceldse/hwmodel.hpp"
#include "acceldse/netmodel.hpp"
#include "acceldse/partition.hpp"
#include "acceldse/report_io.hpp"
#include "acceldse/rsim.hpp"
#include "json.hpp"

namespace py = pybind11;
using namespace acceldse;
using nlohmann::json;

namespace {

RunManifest manifest_for(const std::string& command,
                         const std::string& input,
                         const AcceleratorConfig& config) {
  RunManifest m;
  m.command = command;
  m.inputs = {input};
  m.config_hash = config_hash(config);
  return m;
}

std::string shapes_json(const NetworkTopology& net) {
  std::vector<LayerSpec> layers = net.all_layers();
  std::vector<TensorShape> shapes = infer_shapes(net);
  json out = json::array();
  for (size_t i = 0; i < layers.size() && i < shapes.size(); ++i) {
    const TensorShape& s = shapes[i];
    out.push_back({{"layer", layers[i].name},
                   {"kind", kind_name(layers[i].kind)},
                   {"out", {s.channels, s.height, s.width}}});
  }
  return out.dump();
}

py::dict plan_dict(const PartitionPlan& plan) {
  py::list stages;
  for (size_t s = 0; s < plan.stages.size(); ++s)
    stages.append(py::make_tuple(plan.stages[s].l_initial, plan.stages[s].n_c));
  py::dict d;
  d["stages"] = stages;
  d["stage_latencies"] = plan.stage_latencies;
  d["max_latency"] = plan.max_latency;
  d["speedup"] = plan.speedup;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "analytical DNN accelerator simulator core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

  py::class_<NetworkTopology>(m, "NetworkTopology")
      .def_property_readonly("name",
                             [](const NetworkTopology& n) { return n.name; })
      .def_property_readonly("num_layers", [](const NetworkTopology& n) {
        int64_t count = 0;
        for (const LayerSpec& l : n.all_layers())
          if (l.kind != LayerKind::Input) ++count;
        return count;
      });

  py::class_<AcceleratorConfig>(m, "AcceleratorConfig")
      .def_property(
          "gb_psum_kb",
          [](const AcceleratorConfig& c) { return c.alloc.gb_psum_kb; },
          [](AcceleratorConfig& c, double v) { c.alloc.gb_psum_kb = v; })
      .def_property(
          "gb_ifmap_kb",
          [](const AcceleratorConfig& c) { return c.alloc.gb_ifmap_kb; },
          [](AcceleratorConfig& c, double v) { c.alloc.gb_ifmap_kb = v; })
      .def_property(
          "array",
          [](const AcceleratorConfig& c) {
            return py::make_tuple(c.array.rows, c.array.cols);
          },
          [](AcceleratorConfig& c, std::pair<int64_t, int64_t> a) {
            c.array = {a.first, a.second};
          })
      .def_property(
          "overlap_delivery",
          [](const AcceleratorConfig& c) { return c.overlap_delivery; },
          [](AcceleratorConfig& c, bool v) { c.overlap_delivery = v; });

  m.def("builtin_names", &builtin_names);
  m.def("builtin", &builtin, py::arg("name"));
  m.def("parse_network", &parse_network, py::arg("text"));
  m.def("default_config", &default_config);
  m.def("load_config", &load_config, py::arg("text"));
  m.def("validate_config", &validate, py::arg("config"));
  m.def("config_hash", &config_hash, py::arg("config"));
  m.def("shapes_json", &shapes_json, py::arg("net"));

  m.def(
      "simulate_json",
      [](const NetworkTopology& net, const AcceleratorConfig& config) {
        NetworkReport report = simulate_network(net, config);
        return report_to_json(report,
                              manifest_for("python simulate", net.name, config));
      },
      py::arg("net"), py::arg("config"));

  m.def(
      "sweep_csv",
      [](const NetworkTopology& net, const AcceleratorConfig& config,
         int jobs) {
        SweepResult result = sweep(net, config, default_space(), jobs);
        RunManifest manifest = manifest_for("python sweep", net.name, config);
        manifest.space = std::to_string(default_space().size()) + " points";
        return sweep_to_csv(result, manifest);
      },
      py::arg("net"), py::arg("config"), py::arg("jobs") = 1);

  m.def(
      "metrics_json",
      [](const NetworkTopology& net, const AcceleratorConfig& config,
         double epsilon, const std::string& objective, int jobs) {
        SweepResult result = sweep(net, config, default_space(), jobs);
        RunManifest manifest = manifest_for("python metrics", net.name, config);
        return metrics_to_json(result, epsilon, parse_objective(objective),
                               manifest);
      },
      py::arg("net"), py::arg("config"), py::arg("epsilon") = 0.05,
      py::arg("objective") = "edp", py::arg("jobs") = 1);

  m.def(
      "recommend_json",
      [](const std::vector<std::string>& names, const AcceleratorConfig& config,
         double epsilon, const std::string& objective, int64_t max_cores,
         int jobs) {
        Objective obj = parse_objective(objective);
        std::map<std::string, std::vector<DesignPoint>> candidates;
        for (const std::string& name : names) {
          SweepResult r = sweep(builtin(name), config, default_space(), jobs);
          candidates[r.network] = near_optimal_set(r, epsilon, obj);
        }
        CoreRecommendation rec =
            recommend_cores(candidates, max_cores, epsilon, obj);
        RunManifest manifest;
        manifest.command = "python recommend";
        manifest.inputs = names;
        manifest.config_hash = config_hash(config);
        return recommendation_to_json(rec, manifest);
      },
      py::arg("names"), py::arg("config"), py::arg("epsilon") = 0.05,
      py::arg("objective") = "edp", py::arg("max_cores") = 4,
      py::arg("jobs") = 1);

  m.def(
      "bnb_partition",
      [](const std::vector<double>& latencies, int64_t cores) {
        return plan_dict(bnb_partition(latencies, cores));
      },
      py::arg("latencies"), py::arg("cores"));

  m.def(
      "dp_partition",
      [](const std::vector<double>& latencies, int64_t cores) {
        return dp_oracle_partition(latencies, cores);
      },
      py::arg("latencies"), py::arg("cores"));

  m.def(
      "partition_json",
      [](const NetworkTopology& net, const AcceleratorConfig& config,
         int64_t cores) {
        NetworkPartition part = partition_network(net, config, cores);
        RunManifest manifest =
            manifest_for("python partition", net.name, config);
        return plan_to_json(part, manifest);
      },
      py::arg("net"), py::arg("config"), py::arg("cores"));

  m.attr("__version__") = version_string();
}
