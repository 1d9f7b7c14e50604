#include "focal/energy.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <stdexcept>
#include <string>

#include "focal/errors.hpp"
#include "focal/numeric.hpp"

namespace focal {

namespace {

struct ConvInfo {
    std::size_t layer = 0;
    ConvParams params;
    std::size_t out_h = 0;
    std::size_t out_w = 0;
};

// Conv and focused-conv layers both count as "conv layers" of the energy
// model; energies always refer to the dense cost.
std::vector<ConvInfo> conv_layers(const ModelGraph& g) {
    const std::vector<Dims> shapes = trace_shapes(g);
    std::vector<ConvInfo> convs;
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        if (const auto* conv = std::get_if<ConvLayer>(&g.layers[i])) {
            convs.push_back({i, conv->params, shapes[i].h, shapes[i].w});
        } else if (const auto* fconv = std::get_if<FocusedConvLayer>(&g.layers[i])) {
            convs.push_back({i, fconv->params, shapes[i].h, shapes[i].w});
        }
    }
    return convs;
}

double time_call_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

double overhead_from_medians(double focused_full_aoi, double dense) {
    return std::max(0.0, focused_full_aoi - dense);
}

EnergyProfile profile_energy(const ModelGraph& g, EnergyMode mode,
                             std::span<const Tensor> calibration, int repetitions) {
    const std::vector<ConvInfo> convs = conv_layers(g);

    EnergyProfile p;
    p.mode = mode;
    for (const ConvInfo& c : convs) {
        p.conv_layers.push_back(c.layer);
    }

    if (mode == EnergyMode::Mac) {
        double overhead_sum = 0.0;
        for (const ConvInfo& c : convs) {
            p.conv_energy.push_back(
                static_cast<double>(dense_conv_macs(c.params, c.out_h, c.out_w)));
            // Bookkeeping elements touched at a 100% AoI: gathered patch
            // values plus scattered outputs.
            overhead_sum += static_cast<double>(c.out_h * c.out_w) *
                            static_cast<double>(c.params.patch_size() + c.params.out_channels);
        }
        p.overhead = convs.empty() ? 0.0 : overhead_sum / static_cast<double>(convs.size());
        return p;
    }

    if (calibration.empty()) {
        throw DatasetError("time-mode profiling needs a non-empty calibration set");
    }
    // Median per-layer wall time across calibration inputs and repetitions.
    std::vector<std::vector<double>> layer_times(g.layers.size());
    for (const Tensor& x : calibration) {
        for (int rep = 0; rep < repetitions; ++rep) {
            ForwardOptions opts;
            opts.collect_layer_times = true;
            const ForwardResult res = forward(g, x, opts);
            for (std::size_t i = 0; i < res.layer_times_ms.size(); ++i) {
                layer_times[i].push_back(res.layer_times_ms[i]);
            }
        }
    }
    for (const ConvInfo& c : convs) {
        p.conv_energy.push_back(median(layer_times[c.layer]));
    }

    double overhead_sum = 0.0;
    for (const ConvInfo& c : convs) {
        overhead_sum += measure_overhead_c(g, c.layer, calibration, repetitions);
    }
    p.overhead = convs.empty() ? 0.0 : overhead_sum / static_cast<double>(convs.size());
    return p;
}

double measure_overhead_c(const ModelGraph& g, std::size_t layer_index,
                          std::span<const Tensor> calibration, int repetitions) {
    if (layer_index >= g.layers.size()) {
        throw GraphError("layer index out of range");
    }
    const auto* conv = std::get_if<ConvLayer>(&g.layers[layer_index]);
    if (conv == nullptr) {
        throw GraphError("layer " + std::to_string(layer_index) + " is not a conv layer");
    }
    if (calibration.empty()) {
        throw DatasetError("overhead measurement needs a non-empty calibration set");
    }

    std::vector<double> dense_times;
    std::vector<double> focused_times;
    for (const Tensor& x : calibration) {
        ForwardOptions opts;
        opts.capture_after = layer_index;  // activation entering the layer
        const Tensor input = *forward(g, x, opts).captured;
        const std::span<const float> bias{conv->bias.value.data(),
                                          conv->params.out_channels};
        const AoiMask full(conv->params.out_h(input.dims().h),
                           conv->params.out_w(input.dims().w), true);
        for (int rep = 0; rep < repetitions; ++rep) {
            dense_times.push_back(time_call_ms(
                [&] { dense_conv(input, conv->weights.value, bias, conv->params); }));
            focused_times.push_back(time_call_ms([&] {
                focused_conv(input, conv->weights.value, bias, conv->params, full,
                             BlockConfig{}, 0.0f);
            }));
        }
    }
    return overhead_from_medians(median(focused_times), median(dense_times));
}

double project_energy(const EnergyProfile& p, std::size_t k, double aoi_fraction) {
    const std::size_t n = p.conv_count();
    if (k > n) {
        throw std::invalid_argument("k must be in [0, conv count]");
    }
    if (aoi_fraction < 0.0 || aoi_fraction > 1.0) {
        throw std::invalid_argument("aoi_fraction must be in [0, 1]");
    }
    // Element-wise accumulation in layer order keeps the k = N and
    // a = 1, c = 0 cases bit-identical to a plain sum of the energies.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += i < k ? p.conv_energy[i] : aoi_fraction * p.conv_energy[i];
    }
    total += static_cast<double>(n - k) * p.overhead;
    return total;
}

std::optional<std::size_t> select_k(const EnergyProfile& p, double budget,
                                    double aoi_fraction) {
    if (budget <= 0.0) {
        throw std::invalid_argument("budget must be positive");
    }
    if (aoi_fraction < 0.0 || aoi_fraction > 1.0) {
        throw std::invalid_argument("aoi_fraction must be in [0, 1]");
    }
    const std::size_t n = p.conv_count();
    if (n < 2) {
        return std::nullopt;  // no split leaves a conv on both sides
    }
    for (std::size_t k = n - 1; k >= 1; --k) {
        if (project_energy(p, k, aoi_fraction) <= budget) {
            return k;
        }
    }
    return std::nullopt;
}

}  // namespace focal
