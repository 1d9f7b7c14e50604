#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "focal/aoi.hpp"
#include "focal/conv.hpp"
#include "focal/focused_conv.hpp"
#include "focal/tensor.hpp"

namespace focal {

/// A tensor plus the file it was loaded from. The source path lets manifest
/// emission reference existing weight files instead of copying payloads.
struct TensorRef {
    Tensor value;
    std::filesystem::path source;  // empty for programmatically built tensors
};

struct ConvLayer {
    ConvParams params;
    TensorRef weights;  // (out_channels, in_channels, kh, kw)
    TensorRef bias;     // (1, out_channels, 1, 1)
};

struct FocusedConvLayer {
    ConvParams params;
    TensorRef weights;
    TensorRef bias;
    BlockConfig block;
    float fill = 0.0f;
};

/// Derives the AoI from its input's channel sum and passes the input
/// through unchanged; the mask travels on a side channel.
struct ThresholdAoiLayer {
    double tau = 0.0;
};

struct ReluLayer {};

struct MaxPoolLayer {
    std::size_t kernel = 2;
    std::size_t stride = 2;
};

struct GlobalAvgPoolLayer {};

struct FlattenLayer {};

/// Per-channel y = x * scale[c] + shift[c]; holds folded batch norm.
struct AffineLayer {
    TensorRef scale;  // (1, c, 1, 1)
    TensorRef shift;  // (1, c, 1, 1)
};

struct LinearLayer {
    std::size_t in_features = 0;
    std::size_t out_features = 0;
    TensorRef weights;  // (out_features, in_features, 1, 1)
    TensorRef bias;     // (1, out_features, 1, 1)
};

using LayerSpec = std::variant<ConvLayer, FocusedConvLayer, ThresholdAoiLayer, ReluLayer,
                               MaxPoolLayer, GlobalAvgPoolLayer, FlattenLayer, AffineLayer,
                               LinearLayer>;

/// Manifest "type" string of a layer ("conv", "relu", ...).
const char* layer_type_name(const LayerSpec& layer);

/// Ordered layer sequence with an input contract of (c, h, w), batch 1.
struct ModelGraph {
    std::string name;
    std::size_t in_c = 0;
    std::size_t in_h = 0;
    std::size_t in_w = 0;
    std::vector<LayerSpec> layers;

    Dims input_dims() const { return {1, in_c, in_h, in_w}; }
};

/// Output dims of every layer for the graph's declared input. Throws
/// ShapeCompositionError naming the first layer whose input does not fit.
std::vector<Dims> trace_shapes(const ModelGraph& g);

/// Shape composition plus fCNN structure: at most one threshold layer, no
/// focused conv before it, no plain conv after it.
void validate(const ModelGraph& g);

/// Per-layer MAC accounting (conv, focused conv and linear layers; other
/// kinds perform no multiply-accumulates).
struct MacEntry {
    std::size_t layer = 0;
    std::uint64_t dense = 0;
    std::uint64_t focused = 0;  // equals dense for layers that never skip work
};

struct MacReport {
    std::vector<MacEntry> entries;
    std::uint64_t total_dense = 0;
    std::uint64_t total_focused = 0;
};

struct ForwardOptions {
    /// Capture the activation after this many layers (0 returns the input).
    std::optional<std::size_t> capture_after;
    bool collect_layer_times = false;
    bool collect_activations = false;
};

struct ForwardResult {
    Tensor output;
    std::optional<Tensor> captured;
    std::optional<AoiMask> aoi;  // mask produced by the threshold layer, at its own resolution
    MacReport macs;              // focused entries counted from work actually done
    std::vector<double> layer_times_ms;  // when collect_layer_times
    std::vector<Tensor> activations;     // when collect_activations; output of each layer
};

/// Executes the graph on one input (batch 1). A threshold layer stores the
/// AoI; each later focused conv receives it resized to that layer's output
/// grid.
ForwardResult forward(const ModelGraph& g, const Tensor& x, const ForwardOptions& opts = {});

/// Inserts a threshold layer after the first `k` layers and replaces every
/// conv after it with a focused conv carrying the same weights and bias.
/// Requires 1 <= k < layer count and at least one conv after k.
ModelGraph convert_to_fcnn(const ModelGraph& g, std::size_t k, double tau, BlockConfig b,
                           float fill);

/// Static MAC report assuming a fully relevant AoI.
MacReport count_macs(const ModelGraph& g);

/// Static MAC report with focused layers costed at an assumed AoI fraction.
/// The assumption is realized as a row-major prefix mask of that fraction.
MacReport count_macs(const ModelGraph& g, double aoi_fraction);

/// Static MAC report with focused layers costed from a measured layer-k
/// mask (resized to each focused layer's grid, as the forward pass does).
MacReport count_macs(const ModelGraph& g, const AoiMask& layer_k_mask);

/// Indices of layers whose output spatial dims are strictly smaller than
/// their input spatial dims (strided convs, pools).
std::vector<std::size_t> downsample_points(const ModelGraph& g);

}  // namespace focal
