#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acceldse/errors.hpp"

namespace acceldse {

enum class LayerKind {
  Input,           // marker carrying the network input tensor
  Conv,            // dense convolution, M filters over C channels
  DepthwiseConv,   // one filter per channel, no cross-channel accumulation
  PointwiseConv,   // 1x1 dense convolution
  Pool,            // max/avg pooling or other zero-MAC data movement
  FullyConnected,  // dense layer, simulated as 1x1 conv over 1x1 space
};

const char* kind_name(LayerKind kind);

struct TensorShape {
  int64_t channels = 0;
  int64_t height = 0;
  int64_t width = 0;

  int64_t words() const { return channels * height * width; }
  bool operator==(const TensorShape&) const = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  std::string name;
  int64_t in_channels = 0;   // resolved at parse time (declared or inferred)
  int64_t num_filters = 0;   // M; for depthwise equals in_channels
  int64_t kernel_x = 1;      // kernel width
  int64_t kernel_y = 1;      // kernel height
  int64_t stride = 1;
  int64_t pad = 0;
  int64_t pool_window = 0;   // Pool only
  int64_t pool_stride = 0;   // Pool only
  int64_t units = 0;         // FullyConnected only
};

struct NetworkTopology {
  std::string name;
  TensorShape input_shape;
  std::vector<LayerSpec> conv_part;  // first entry is the Input marker
  std::vector<LayerSpec> fc_part;

  std::vector<LayerSpec> all_layers() const;
};

struct LayerVolumes {
  int64_t ifmap_words = 0;   // distinct input words touched (padding excluded)
  int64_t weight_words = 0;
  int64_t ofmap_words = 0;
};

bool is_conv_like(LayerKind kind);  // Conv / Depthwise / Pointwise / FC

// Parse a network description document. Throws ParseError (syntax, unknown
// keys, bad types) or ValidationError (semantic problems, shape failures).
NetworkTopology parse_network(const std::string& text);

// Output shape of one layer given its input shape.
TensorShape output_shape(const LayerSpec& layer, const TensorShape& in);

// One output shape per layer, conv_part then fc_part. Throws ValidationError
// naming the offending layer when any dimension degenerates.
std::vector<TensorShape> infer_shapes(const NetworkTopology& net);

// Multiply-accumulate count of one layer. Pool and Input are 0.
int64_t layer_macs(const LayerSpec& layer, const TensorShape& in);

// Exact per-layer data volumes in words: distinct real input words touched,
// weight words, output words.
LayerVolumes layer_volumes(const LayerSpec& layer, const TensorShape& in);

// Bundled reference topologies.
std::vector<std::string> builtin_names();
NetworkTopology builtin(const std::string& name);

}  // namespace acceldse
