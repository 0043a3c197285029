#include <string>
#include <vector>

#include "acceldse/netmodel.hpp"
#include "json.hpp"

// Bundled reference topologies, assembled as documents and routed through
// parse_network so builtins and user files share one code path.

namespace acceldse {

using nlohmann::json;

namespace {

json conv(int64_t m, int64_t k, int64_t stride, int64_t pad) {
  return {{"kind", "conv"}, {"m", m}, {"k", k}, {"stride", stride},
          {"pad", pad}};
}

json pointwise(int64_t m, int64_t stride = 1) {
  json j = {{"kind", "pointwise"}, {"m", m}};
  if (stride != 1) j["stride"] = stride;
  return j;
}

json pointwise_from(int64_t m, int64_t c) {
  return {{"kind", "pointwise"}, {"m", m}, {"c", c}};
}

json depthwise(int64_t stride) {
  return {{"kind", "depthwise"}, {"k", 3}, {"stride", stride}, {"pad", 1}};
}

json pool(int64_t window, int64_t stride, int64_t pad = 0) {
  json j = {{"kind", "pool"}, {"pool", window}, {"pool_stride", stride}};
  if (pad != 0) j["pad"] = pad;
  return j;
}

// Residual joins move data but do no arithmetic: a unit pool keeps the shape.
json add_node() {
  return {{"kind", "pool"}, {"pool", 1}, {"pool_stride", 1}, {"name", "add"}};
}

json input_marker() { return {{"kind", "input"}}; }

json make_alexnet() {
  json net;
  net["name"] = "alexnet";
  net["input"] = {{"c", 3}, {"h", 227}, {"w", 227}};
  net["conv_part"] = json::array({
      input_marker(),
      conv(96, 11, 4, 0),
      pool(3, 2),
      conv(256, 5, 1, 2),
      pool(3, 2),
      conv(384, 3, 1, 1),
      conv(384, 3, 1, 1),
      conv(256, 3, 1, 1),
      pool(3, 2),
  });
  net["fc_part"] = json::array(
      {{{"units", 4096}}, {{"units", 4096}}, {{"units", 1000}}});
  return net;
}

json make_vgg(const std::string& name, const std::vector<int>& block_convs) {
  json net;
  net["name"] = name;
  net["input"] = {{"c", 3}, {"h", 224}, {"w", 224}};
  json layers = json::array({input_marker()});
  const int64_t widths[] = {64, 128, 256, 512, 512};
  for (size_t b = 0; b < block_convs.size(); ++b) {
    for (int i = 0; i < block_convs[b]; ++i)
      layers.push_back(conv(widths[b], 3, 1, 1));
    layers.push_back(pool(2, 2));
  }
  net["conv_part"] = layers;
  net["fc_part"] = json::array(
      {{{"units", 4096}}, {{"units", 4096}}, {{"units", 1000}}});
  return net;
}

json make_mobilenet() {
  json net;
  net["name"] = "mobilenet";
  net["input"] = {{"c", 3}, {"h", 224}, {"w", 224}};
  json layers = json::array({input_marker(), conv(32, 3, 2, 1)});
  // (stride of the depthwise stage, pointwise output width)
  const std::vector<std::pair<int, int>> stages = {
      {1, 64},  {2, 128}, {1, 128}, {2, 256},  {1, 256},
      {2, 512}, {1, 512}, {1, 512}, {1, 512},  {1, 512},
      {1, 512}, {2, 1024}, {1, 1024}};
  for (auto [stride, width] : stages) {
    layers.push_back(depthwise(stride));
    layers.push_back(pointwise(width));
  }
  layers.push_back(pool(7, 7));
  net["conv_part"] = layers;
  net["fc_part"] = json::array({{{"units", 1000}}});
  return net;
}

json make_resnet50() {
  json net;
  net["name"] = "resnet50";
  net["input"] = {{"c", 3}, {"h", 224}, {"w", 224}};
  json layers = json::array({input_marker(), conv(64, 7, 2, 3), pool(3, 2, 1)});
  // Bottleneck stages: (mid width, output width, block count, first stride).
  struct Stage { int64_t mid, out, blocks, stride; };
  const std::vector<Stage> stages = {
      {64, 256, 3, 1}, {128, 512, 4, 2}, {256, 1024, 6, 2}, {512, 2048, 3, 2}};
  int64_t in_c = 64;
  for (const Stage& st : stages) {
    for (int64_t b = 0; b < st.blocks; ++b) {
      // The graph is linearized in topological order: the stride-carrying
      // reduction comes first, the projection shortcut follows it and names
      // its true input channel count, and the residual join is a unit pool.
      layers.push_back(pointwise(st.mid, b == 0 ? st.stride : 1));
      if (b == 0) layers.push_back(pointwise_from(st.out, in_c));
      json mid_conv = conv(st.mid, 3, 1, 1);
      mid_conv["c"] = st.mid;
      layers.push_back(mid_conv);
      layers.push_back(pointwise(st.out));
      layers.push_back(add_node());
    }
    in_c = st.out;
  }
  layers.push_back(pool(7, 7));
  net["conv_part"] = layers;
  net["fc_part"] = json::array({{{"units", 1000}}});
  return net;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"alexnet", "vgg16", "vgg19", "resnet50", "mobilenet"};
}

NetworkTopology builtin(const std::string& name) {
  json doc;
  if (name == "alexnet") {
    doc = make_alexnet();
  } else if (name == "vgg16") {
    doc = make_vgg("vgg16", {2, 2, 3, 3, 3});
  } else if (name == "vgg19") {
    doc = make_vgg("vgg19", {2, 2, 4, 4, 4});
  } else if (name == "resnet50") {
    doc = make_resnet50();
  } else if (name == "mobilenet") {
    doc = make_mobilenet();
  } else {
    std::string names;
    for (const std::string& n : builtin_names())
      names += (names.empty() ? "" : ", ") + n;
    throw ValidationError("unknown builtin network '" + name +
                          "' (available: " + names + ")");
  }
  return parse_network(doc.dump());
}

}  // namespace acceldse
