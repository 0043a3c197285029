#include "acceldse/netmodel.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace acceldse {

using nlohmann::json;

const char* kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Input: return "input";
    case LayerKind::Conv: return "conv";
    case LayerKind::DepthwiseConv: return "depthwise";
    case LayerKind::PointwiseConv: return "pointwise";
    case LayerKind::Pool: return "pool";
    case LayerKind::FullyConnected: return "fc";
  }
  return "?";
}

bool is_conv_like(LayerKind kind) {
  return kind == LayerKind::Conv || kind == LayerKind::DepthwiseConv ||
         kind == LayerKind::PointwiseConv || kind == LayerKind::FullyConnected;
}

std::vector<LayerSpec> NetworkTopology::all_layers() const {
  std::vector<LayerSpec> out = conv_part;
  out.insert(out.end(), fc_part.begin(), fc_part.end());
  return out;
}

namespace {

LayerKind kind_from_string(const std::string& s, const std::string& where) {
  if (s == "input") return LayerKind::Input;
  if (s == "conv") return LayerKind::Conv;
  if (s == "depthwise") return LayerKind::DepthwiseConv;
  if (s == "pointwise") return LayerKind::PointwiseConv;
  if (s == "pool") return LayerKind::Pool;
  if (s == "fc") return LayerKind::FullyConnected;
  throw ParseError(where + ": unknown layer kind '" + s + "'");
}

int64_t get_int(const json& j, const std::string& key,
                const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ParseError(where + ": key '" + key + "' must be an integer");
  return v.get<int64_t>();
}

int64_t get_int_or(const json& j, const std::string& key, int64_t fallback,
                   const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get_int(j, key, where);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key()))
      throw ParseError(where + ": unknown key '" + item.key() + "'");
  }
}

LayerSpec parse_layer(const json& j, bool in_fc_part, int index) {
  const std::string where =
      (in_fc_part ? "fc_part[" : "conv_part[") + std::to_string(index) + "]";
  if (!j.is_object()) throw ParseError(where + ": layer must be an object");

  LayerSpec layer;
  std::string kind_text = in_fc_part ? "fc" : "";
  if (j.contains("kind")) {
    if (!j.at("kind").is_string())
      throw ParseError(where + ": key 'kind' must be a string");
    kind_text = j.at("kind").get<std::string>();
  }
  if (kind_text.empty()) throw ParseError(where + ": missing 'kind'");
  layer.kind = kind_from_string(kind_text, where);
  if (in_fc_part && layer.kind != LayerKind::FullyConnected)
    throw ParseError(where + ": fc_part may only contain fc layers");

  if (j.contains("name")) {
    if (!j.at("name").is_string())
      throw ParseError(where + ": key 'name' must be a string");
    layer.name = j.at("name").get<std::string>();
  }

  std::set<std::string> known = {"kind", "name"};
  switch (layer.kind) {
    case LayerKind::Input:
      break;
    case LayerKind::Conv:
    case LayerKind::PointwiseConv:
    case LayerKind::DepthwiseConv: {
      known.insert({"m", "c", "k", "stride", "pad"});
      layer.in_channels = get_int_or(j, "c", 0, where);
      if (layer.kind == LayerKind::DepthwiseConv) {
        layer.num_filters = get_int_or(j, "m", 0, where);  // forced to c later
      } else {
        layer.num_filters = get_int(j, "m", where);
      }
      if (layer.kind == LayerKind::PointwiseConv) {
        layer.kernel_x = layer.kernel_y = 1;
        if (j.contains("k") && get_int(j, "k", where) != 1)
          throw ValidationError(where + ": pointwise layers use a 1x1 kernel");
      } else if (j.contains("k")) {
        const json& k = j.at("k");
        if (k.is_array()) {
          if (k.size() != 2 || !k[0].is_number_integer() ||
              !k[1].is_number_integer())
            throw ParseError(where + ": 'k' must be an int or [kx, ky]");
          layer.kernel_x = k[0].get<int64_t>();
          layer.kernel_y = k[1].get<int64_t>();
        } else if (k.is_number_integer()) {
          layer.kernel_x = layer.kernel_y = k.get<int64_t>();
        } else {
          throw ParseError(where + ": 'k' must be an int or [kx, ky]");
        }
      } else {
        throw ParseError(where + ": missing 'k'");
      }
      layer.stride = get_int_or(j, "stride", 1, where);
      layer.pad = get_int_or(j, "pad", 0, where);
      break;
    }
    case LayerKind::Pool: {
      known.insert({"pool", "pool_stride", "pad", "c"});
      layer.in_channels = get_int_or(j, "c", 0, where);
      layer.pool_window = get_int(j, "pool", where);
      layer.pool_stride =
          get_int_or(j, "pool_stride", layer.pool_window, where);
      layer.pad = get_int_or(j, "pad", 0, where);
      break;
    }
    case LayerKind::FullyConnected: {
      known.insert({"units"});
      layer.units = get_int(j, "units", where);
      layer.num_filters = layer.units;
      layer.kernel_x = layer.kernel_y = 1;
      layer.stride = 1;
      layer.pad = 0;
      break;
    }
  }
  reject_unknown_keys(j, known, where);
  if (layer.name.empty())
    layer.name = std::string(kind_name(layer.kind)) + std::to_string(index);
  return layer;
}

int64_t conv_extent(int64_t in, int64_t k, int64_t pad, int64_t stride) {
  return (in - k + 2 * pad) / stride + 1;
}

// Distinct real coordinates touched along one axis by windows of width k
// stepping by stride over `out` positions, with `pad` leading pad columns
// trimmed and `in` real columns available.
int64_t touched_axis(int64_t in, int64_t k, int64_t pad, int64_t stride,
                     int64_t out) {
  if (out <= 0) return 0;
  if (stride <= k) {
    // windows overlap or abut: one contiguous range
    int64_t lo = std::max<int64_t>(0, pad);
    int64_t hi = std::min((out - 1) * stride + k, pad + in);
    return std::max<int64_t>(0, hi - lo);
  }
  int64_t total = 0;  // disjoint windows: clip each
  for (int64_t a = 0; a < out; ++a) {
    int64_t lo = std::max(a * stride, pad);
    int64_t hi = std::min(a * stride + k, pad + in);
    total += std::max<int64_t>(0, hi - lo);
  }
  return total;
}

}  // namespace

NetworkTopology parse_network(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("network document must be an object");
  reject_unknown_keys(doc, {"name", "input", "conv_part", "fc_part"},
                      "network");

  NetworkTopology net;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string())
      throw ParseError("network: 'name' must be a string");
    net.name = doc.at("name").get<std::string>();
  }
  if (!doc.contains("input") || !doc.at("input").is_object())
    throw ParseError("network: missing 'input' object");
  const json& in = doc.at("input");
  reject_unknown_keys(in, {"c", "h", "w"}, "input");
  net.input_shape.channels = get_int(in, "c", "input");
  net.input_shape.height = get_int(in, "h", "input");
  net.input_shape.width = get_int(in, "w", "input");
  if (net.input_shape.channels < 1 || net.input_shape.height < 1 ||
      net.input_shape.width < 1)
    throw ValidationError("input: dimensions must be positive");

  if (!doc.contains("conv_part") || !doc.at("conv_part").is_array() ||
      doc.at("conv_part").empty())
    throw ParseError("network: missing non-empty 'conv_part' array");
  int idx = 0;
  for (const json& lj : doc.at("conv_part"))
    net.conv_part.push_back(parse_layer(lj, false, idx++));
  idx = 0;
  if (doc.contains("fc_part")) {
    if (!doc.at("fc_part").is_array())
      throw ParseError("network: 'fc_part' must be an array");
    for (const json& lj : doc.at("fc_part"))
      net.fc_part.push_back(parse_layer(lj, true, idx++));
  }

  if (net.conv_part.front().kind != LayerKind::Input)
    throw ValidationError("conv_part must start with an input layer");
  for (size_t i = 1; i < net.conv_part.size(); ++i) {
    if (net.conv_part[i].kind == LayerKind::Input)
      throw ValidationError("conv_part[" + std::to_string(i) +
                            "]: input marker only allowed first");
  }

  // Resolve input channel counts and validate shapes in one walk.
  TensorShape shape = net.input_shape;
  net.conv_part.front().in_channels = shape.channels;
  for (size_t i = 1; i < net.conv_part.size(); ++i) {
    LayerSpec& layer = net.conv_part[i];
    if (layer.in_channels == 0) layer.in_channels = shape.channels;
    if (layer.kind == LayerKind::DepthwiseConv) {
      if (layer.num_filters == 0) layer.num_filters = layer.in_channels;
      if (layer.num_filters != layer.in_channels)
        throw ValidationError(layer.name +
                              ": depthwise filter count must equal channels");
    }
    shape = output_shape(layer, {layer.in_channels, shape.height, shape.width});
    if (shape.channels < 1 || shape.height < 1 || shape.width < 1)
      throw ValidationError(layer.name + ": output shape degenerates to " +
                            std::to_string(shape.channels) + "x" +
                            std::to_string(shape.height) + "x" +
                            std::to_string(shape.width));
  }
  int64_t flat = shape.words();
  for (LayerSpec& layer : net.fc_part) {
    layer.in_channels = flat;
    if (layer.units < 1)
      throw ValidationError(layer.name + ": units must be positive");
    flat = layer.units;
  }
  return net;
}

TensorShape output_shape(const LayerSpec& layer, const TensorShape& in) {
  switch (layer.kind) {
    case LayerKind::Input:
      return in;
    case LayerKind::Conv:
    case LayerKind::PointwiseConv:
      return {layer.num_filters,
              conv_extent(in.height, layer.kernel_y, layer.pad, layer.stride),
              conv_extent(in.width, layer.kernel_x, layer.pad, layer.stride)};
    case LayerKind::DepthwiseConv:
      return {in.channels,
              conv_extent(in.height, layer.kernel_y, layer.pad, layer.stride),
              conv_extent(in.width, layer.kernel_x, layer.pad, layer.stride)};
    case LayerKind::Pool:
      return {in.channels,
              conv_extent(in.height, layer.pool_window, layer.pad,
                          layer.pool_stride),
              conv_extent(in.width, layer.pool_window, layer.pad,
                          layer.pool_stride)};
    case LayerKind::FullyConnected:
      return {layer.units, 1, 1};
  }
  return in;
}

std::vector<TensorShape> infer_shapes(const NetworkTopology& net) {
  std::vector<TensorShape> shapes;
  TensorShape shape = net.input_shape;
  for (const LayerSpec& layer : net.conv_part) {
    TensorShape in = {layer.kind == LayerKind::Input || layer.in_channels == 0
                          ? shape.channels
                          : layer.in_channels,
                      shape.height, shape.width};
    shape = output_shape(layer, in);
    if (shape.channels < 1 || shape.height < 1 || shape.width < 1)
      throw ValidationError(layer.name + ": output shape degenerates");
    shapes.push_back(shape);
  }
  TensorShape flat = {shape.words(), 1, 1};
  for (const LayerSpec& layer : net.fc_part) {
    flat = output_shape(layer, flat);
    shapes.push_back(flat);
  }
  return shapes;
}

int64_t layer_macs(const LayerSpec& layer, const TensorShape& in) {
  TensorShape out = output_shape(layer, in);
  switch (layer.kind) {
    case LayerKind::Input:
    case LayerKind::Pool:
      return 0;
    case LayerKind::Conv:
    case LayerKind::PointwiseConv:
      return layer.num_filters * in.channels * out.height * out.width *
             layer.kernel_x * layer.kernel_y;
    case LayerKind::DepthwiseConv:
      return in.channels * out.height * out.width * layer.kernel_x *
             layer.kernel_y;
    case LayerKind::FullyConnected:
      return layer.units * in.words();
  }
  return 0;
}

LayerVolumes layer_volumes(const LayerSpec& layer, const TensorShape& in) {
  LayerVolumes v;
  TensorShape out = output_shape(layer, in);
  switch (layer.kind) {
    case LayerKind::Input:
      v.ifmap_words = in.words();
      v.ofmap_words = in.words();
      return v;
    case LayerKind::Pool:
      v.ifmap_words = in.channels *
                      touched_axis(in.height, layer.pool_window, layer.pad,
                                   layer.pool_stride, out.height) *
                      touched_axis(in.width, layer.pool_window, layer.pad,
                                   layer.pool_stride, out.width);
      v.ofmap_words = out.words();
      return v;
    case LayerKind::Conv:
    case LayerKind::PointwiseConv:
    case LayerKind::DepthwiseConv:
      v.ifmap_words =
          in.channels *
          touched_axis(in.height, layer.kernel_y, layer.pad, layer.stride,
                       out.height) *
          touched_axis(in.width, layer.kernel_x, layer.pad, layer.stride,
                       out.width);
      v.weight_words = (layer.kind == LayerKind::DepthwiseConv
                            ? in.channels
                            : layer.num_filters * in.channels) *
                       layer.kernel_x * layer.kernel_y;
      v.ofmap_words = out.words();
      return v;
    case LayerKind::FullyConnected:
      v.ifmap_words = in.words();
      v.weight_words = layer.units * in.words();
      v.ofmap_words = layer.units;
      return v;
  }
  return v;
}

}  // namespace acceldse
