#include "focal/graph.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>

#include "focal/errors.hpp"

namespace focal {

namespace {

struct TypeNameVisitor {
    const char* operator()(const ConvLayer&) const { return "conv"; }
    const char* operator()(const FocusedConvLayer&) const { return "focused_conv"; }
    const char* operator()(const ThresholdAoiLayer&) const { return "threshold_aoi"; }
    const char* operator()(const ReluLayer&) const { return "relu"; }
    const char* operator()(const MaxPoolLayer&) const { return "maxpool"; }
    const char* operator()(const GlobalAvgPoolLayer&) const { return "gap"; }
    const char* operator()(const FlattenLayer&) const { return "flatten"; }
    const char* operator()(const AffineLayer&) const { return "affine"; }
    const char* operator()(const LinearLayer&) const { return "linear"; }
};

[[noreturn]] void composition_error(std::size_t idx, const std::string& msg) {
    throw ShapeCompositionError(idx, "layer " + std::to_string(idx) + ": " + msg);
}

void check_param_tensor(std::size_t idx, const TensorRef& t, const Dims& want,
                        const char* what) {
    if (t.value.dims() != want) {
        composition_error(idx, std::string(what) + " tensor has wrong dims");
    }
}

Dims conv_output(std::size_t idx, const ConvParams& p, const Dims& in) {
    if (in.c != p.in_channels) {
        composition_error(idx, "expects " + std::to_string(p.in_channels) +
                                   " input channels, got " + std::to_string(in.c));
    }
    if (in.h + 2 * p.padding < p.kernel_h || in.w + 2 * p.padding < p.kernel_w) {
        composition_error(idx, "kernel larger than padded input");
    }
    return {1, p.out_channels, (in.h + 2 * p.padding - p.kernel_h) / p.stride + 1,
            (in.w + 2 * p.padding - p.kernel_w) / p.stride + 1};
}

Dims layer_output(std::size_t idx, const LayerSpec& layer, const Dims& in) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
        Dims out = conv_output(idx, conv->params, in);
        check_param_tensor(idx, conv->weights,
                           {conv->params.out_channels, conv->params.in_channels,
                            conv->params.kernel_h, conv->params.kernel_w},
                           "weights");
        check_param_tensor(idx, conv->bias, {1, conv->params.out_channels, 1, 1}, "bias");
        return out;
    }
    if (const auto* conv = std::get_if<FocusedConvLayer>(&layer)) {
        Dims out = conv_output(idx, conv->params, in);
        check_param_tensor(idx, conv->weights,
                           {conv->params.out_channels, conv->params.in_channels,
                            conv->params.kernel_h, conv->params.kernel_w},
                           "weights");
        check_param_tensor(idx, conv->bias, {1, conv->params.out_channels, 1, 1}, "bias");
        return out;
    }
    if (std::holds_alternative<ThresholdAoiLayer>(layer) ||
        std::holds_alternative<ReluLayer>(layer)) {
        return in;
    }
    if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) {
        if (pool->kernel == 0 || pool->stride == 0) {
            composition_error(idx, "maxpool kernel and stride must be positive");
        }
        if (in.h < pool->kernel || in.w < pool->kernel) {
            composition_error(idx, "maxpool window larger than input");
        }
        return {1, in.c, (in.h - pool->kernel) / pool->stride + 1,
                (in.w - pool->kernel) / pool->stride + 1};
    }
    if (std::holds_alternative<GlobalAvgPoolLayer>(layer)) {
        return {1, in.c, 1, 1};
    }
    if (std::holds_alternative<FlattenLayer>(layer)) {
        return {1, in.c * in.h * in.w, 1, 1};
    }
    if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
        check_param_tensor(idx, affine->scale, {1, in.c, 1, 1}, "scale");
        check_param_tensor(idx, affine->shift, {1, in.c, 1, 1}, "shift");
        return in;
    }
    const auto& linear = std::get<LinearLayer>(layer);
    if (in.count() != linear.in_features) {
        composition_error(idx, "linear expects " + std::to_string(linear.in_features) +
                                   " input features, got " + std::to_string(in.count()));
    }
    check_param_tensor(idx, linear.weights, {linear.out_features, linear.in_features, 1, 1},
                       "weights");
    check_param_tensor(idx, linear.bias, {1, linear.out_features, 1, 1}, "bias");
    return {1, linear.out_features, 1, 1};
}

}  // namespace

const char* layer_type_name(const LayerSpec& layer) {
    return std::visit(TypeNameVisitor{}, layer);
}

std::vector<Dims> trace_shapes(const ModelGraph& g) {
    if (g.in_c == 0 || g.in_h == 0 || g.in_w == 0) {
        throw ShapeCompositionError(0, "graph input dims must be positive");
    }
    std::vector<Dims> shapes;
    shapes.reserve(g.layers.size());
    Dims cur = g.input_dims();
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        cur = layer_output(i, g.layers[i], cur);
        shapes.push_back(cur);
    }
    return shapes;
}

void validate(const ModelGraph& g) {
    trace_shapes(g);
    std::optional<std::size_t> threshold_at;
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        if (std::holds_alternative<ThresholdAoiLayer>(g.layers[i])) {
            if (threshold_at) {
                composition_error(i, "more than one threshold_aoi layer");
            }
            threshold_at = i;
        } else if (std::holds_alternative<FocusedConvLayer>(g.layers[i])) {
            if (!threshold_at) {
                composition_error(i, "focused_conv before any threshold_aoi layer");
            }
        } else if (std::holds_alternative<ConvLayer>(g.layers[i])) {
            if (threshold_at) {
                composition_error(i, "plain conv after the threshold_aoi layer");
            }
        }
    }
}

ForwardResult forward(const ModelGraph& g, const Tensor& x, const ForwardOptions& opts) {
    if (x.dims() != g.input_dims()) {
        throw ShapeError("input dims do not match the graph's input contract");
    }
    if (opts.capture_after && *opts.capture_after > g.layers.size()) {
        throw GraphError("capture index past the last layer");
    }

    ForwardResult res;
    if (opts.capture_after && *opts.capture_after == 0) {
        res.captured = x;
    }

    using clock = std::chrono::steady_clock;
    Tensor cur = x;
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        const auto t0 = opts.collect_layer_times ? clock::now() : clock::time_point{};
        const LayerSpec& layer = g.layers[i];

        if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
            Tensor out = dense_conv(cur, conv->weights.value,
                                    {conv->bias.value.data(), conv->params.out_channels},
                                    conv->params);
            const std::uint64_t macs =
                dense_conv_macs(conv->params, out.dims().h, out.dims().w);
            res.macs.entries.push_back({i, macs, macs});
            cur = std::move(out);
        } else if (const auto* conv = std::get_if<FocusedConvLayer>(&layer)) {
            if (!res.aoi) {
                throw GraphError("layer " + std::to_string(i) +
                                 ": focused_conv executed with no AoI available");
            }
            const std::size_t oh = conv->params.out_h(cur.dims().h);
            const std::size_t ow = conv->params.out_w(cur.dims().w);
            const AoiMask layer_mask = resize_mask(*res.aoi, oh, ow);
            FocusedConvStats stats;
            Tensor out = focused_conv(cur, conv->weights.value,
                                      {conv->bias.value.data(), conv->params.out_channels},
                                      conv->params, layer_mask, conv->block, conv->fill,
                                      &stats);
            res.macs.entries.push_back({i, dense_conv_macs(conv->params, oh, ow), stats.macs});
            cur = std::move(out);
        } else if (const auto* thr = std::get_if<ThresholdAoiLayer>(&layer)) {
            res.aoi = threshold_aoi(channel_sum(cur), thr->tau);
            // data path is untouched; the mask rides a side channel
        } else if (std::holds_alternative<ReluLayer>(layer)) {
            for (float& v : cur.values()) {
                v = v > 0.0f ? v : 0.0f;
            }
        } else if (const auto* pool = std::get_if<MaxPoolLayer>(&layer)) {
            const Dims& d = cur.dims();
            if (d.h < pool->kernel || d.w < pool->kernel) {
                throw ShapeError("layer " + std::to_string(i) +
                                 ": maxpool window larger than input");
            }
            const std::size_t oh = (d.h - pool->kernel) / pool->stride + 1;
            const std::size_t ow = (d.w - pool->kernel) / pool->stride + 1;
            Tensor out(1, d.c, oh, ow);
            for (std::size_t c = 0; c < d.c; ++c) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        float best = cur.at(0, c, oy * pool->stride, ox * pool->stride);
                        for (std::size_t ky = 0; ky < pool->kernel; ++ky) {
                            for (std::size_t kx = 0; kx < pool->kernel; ++kx) {
                                best = std::max(best, cur.at(0, c, oy * pool->stride + ky,
                                                             ox * pool->stride + kx));
                            }
                        }
                        out.at(0, c, oy, ox) = best;
                    }
                }
            }
            cur = std::move(out);
        } else if (std::holds_alternative<GlobalAvgPoolLayer>(layer)) {
            const Dims& d = cur.dims();
            Tensor out(1, d.c, 1, 1);
            for (std::size_t c = 0; c < d.c; ++c) {
                float acc = 0.0f;
                for (std::size_t y = 0; y < d.h; ++y) {
                    for (std::size_t xx = 0; xx < d.w; ++xx) {
                        acc += cur.at(0, c, y, xx);
                    }
                }
                out.at(0, c, 0, 0) = acc / static_cast<float>(d.h * d.w);
            }
            cur = std::move(out);
        } else if (std::holds_alternative<FlattenLayer>(layer)) {
            const Dims& d = cur.dims();
            cur = cur.reshaped({1, d.c * d.h * d.w, 1, 1});
        } else if (const auto* affine = std::get_if<AffineLayer>(&layer)) {
            const Dims& d = cur.dims();
            if (affine->scale.value.dims().c != d.c) {
                throw ShapeError("layer " + std::to_string(i) + ": affine channel mismatch");
            }
            for (std::size_t c = 0; c < d.c; ++c) {
                const float s = affine->scale.value.at(0, c, 0, 0);
                const float t = affine->shift.value.at(0, c, 0, 0);
                for (std::size_t y = 0; y < d.h; ++y) {
                    for (std::size_t xx = 0; xx < d.w; ++xx) {
                        cur.at(0, c, y, xx) = cur.at(0, c, y, xx) * s + t;
                    }
                }
            }
        } else {
            const auto& linear = std::get<LinearLayer>(layer);
            if (cur.size() != linear.in_features) {
                throw ShapeError("layer " + std::to_string(i) + ": linear expects " +
                                 std::to_string(linear.in_features) + " features, got " +
                                 std::to_string(cur.size()));
            }
            Tensor out(1, linear.out_features, 1, 1);
            for (std::size_t o = 0; o < linear.out_features; ++o) {
                const float* wrow = linear.weights.value.data() + o * linear.in_features;
                out.at(0, o, 0, 0) = linear.bias.value.at(0, o, 0, 0) +
                                     detail::dot_f32(cur.data(), wrow, linear.in_features);
            }
            const std::uint64_t macs =
                static_cast<std::uint64_t>(linear.in_features) * linear.out_features;
            res.macs.entries.push_back({i, macs, macs});
            cur = std::move(out);
        }

        if (opts.collect_layer_times) {
            res.layer_times_ms.push_back(
                std::chrono::duration<double, std::milli>(clock::now() - t0).count());
        }
        if (opts.collect_activations) {
            res.activations.push_back(cur);
        }
        if (opts.capture_after && *opts.capture_after == i + 1) {
            res.captured = cur;
        }
    }

    for (const MacEntry& e : res.macs.entries) {
        res.macs.total_dense += e.dense;
        res.macs.total_focused += e.focused;
    }
    res.output = std::move(cur);
    return res;
}

ModelGraph convert_to_fcnn(const ModelGraph& g, std::size_t k, double tau, BlockConfig b,
                           float fill) {
    for (const LayerSpec& layer : g.layers) {
        if (std::holds_alternative<ThresholdAoiLayer>(layer)) {
            throw GraphError("graph already contains a threshold_aoi layer");
        }
    }
    if (k < 1 || k >= g.layers.size()) {
        throw GraphError("split index out of range: k=" + std::to_string(k) +
                         ", layer count=" + std::to_string(g.layers.size()));
    }
    bool conv_after = false;
    for (std::size_t i = k; i < g.layers.size(); ++i) {
        if (std::holds_alternative<ConvLayer>(g.layers[i])) {
            conv_after = true;
            break;
        }
    }
    if (!conv_after) {
        throw GraphError("no conv layer after k=" + std::to_string(k) + " to focus");
    }

    ModelGraph out = g;
    out.layers.insert(out.layers.begin() + static_cast<std::ptrdiff_t>(k),
                      ThresholdAoiLayer{tau});
    for (std::size_t i = k + 1; i < out.layers.size(); ++i) {
        if (auto* conv = std::get_if<ConvLayer>(&out.layers[i])) {
            out.layers[i] = FocusedConvLayer{conv->params, std::move(conv->weights),
                                             std::move(conv->bias), b, fill};
        }
    }
    validate(out);
    return out;
}

namespace {

MacReport count_macs_impl(const ModelGraph& g,
                          const std::function<AoiMask(std::size_t oh, std::size_t ow,
                                                      const FocusedConvLayer&)>& mask_for) {
    const std::vector<Dims> shapes = trace_shapes(g);
    MacReport report;
    Dims in = g.input_dims();
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        const Dims& out = shapes[i];
        if (const auto* conv = std::get_if<ConvLayer>(&g.layers[i])) {
            const std::uint64_t macs = dense_conv_macs(conv->params, out.h, out.w);
            report.entries.push_back({i, macs, macs});
        } else if (const auto* conv = std::get_if<FocusedConvLayer>(&g.layers[i])) {
            const std::uint64_t dense = dense_conv_macs(conv->params, out.h, out.w);
            const AoiMask mask = mask_for(out.h, out.w, *conv);
            const FocusedConvStats stats = count_focused_macs(conv->params, mask, conv->block);
            report.entries.push_back({i, dense, stats.macs});
        } else if (const auto* linear = std::get_if<LinearLayer>(&g.layers[i])) {
            const std::uint64_t macs =
                static_cast<std::uint64_t>(linear->in_features) * linear->out_features;
            report.entries.push_back({i, macs, macs});
        }
        in = out;
    }
    for (const MacEntry& e : report.entries) {
        report.total_dense += e.dense;
        report.total_focused += e.focused;
    }
    return report;
}

}  // namespace

MacReport count_macs(const ModelGraph& g) {
    return count_macs_impl(g, [](std::size_t oh, std::size_t ow, const FocusedConvLayer&) {
        return AoiMask(oh, ow, true);
    });
}

MacReport count_macs(const ModelGraph& g, double aoi_fraction) {
    if (aoi_fraction < 0.0 || aoi_fraction > 1.0) {
        throw std::invalid_argument("aoi_fraction must be in [0, 1]");
    }
    return count_macs_impl(
        g, [aoi_fraction](std::size_t oh, std::size_t ow, const FocusedConvLayer&) {
            AoiMask m(oh, ow);
            const std::size_t total = oh * ow;
            const auto keep = static_cast<std::size_t>(
                std::llround(aoi_fraction * static_cast<double>(total)));
            for (std::size_t i = 0; i < std::min(keep, total); ++i) {
                m.set_flat(i, true);
            }
            return m;
        });
}

MacReport count_macs(const ModelGraph& g, const AoiMask& layer_k_mask) {
    return count_macs_impl(
        g, [&layer_k_mask](std::size_t oh, std::size_t ow, const FocusedConvLayer&) {
            return resize_mask(layer_k_mask, oh, ow);
        });
}

std::vector<std::size_t> downsample_points(const ModelGraph& g) {
    const std::vector<Dims> shapes = trace_shapes(g);
    std::vector<std::size_t> points;
    Dims in = g.input_dims();
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        const Dims& out = shapes[i];
        if (out.h < in.h || out.w < in.w) {
            points.push_back(i);
        }
        in = out;
    }
    return points;
}

}  // namespace focal
