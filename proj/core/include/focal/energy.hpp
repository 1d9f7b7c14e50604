#pragma once

#include <optional>
#include <span>
#include <vector>

#include "focal/graph.hpp"

namespace focal {

enum class EnergyMode { Mac, Time };

/// Per-conv-layer energy proxies in abstract units: dense MAC counts in Mac
/// mode, median per-layer wall times (ms) in Time mode. `overhead` is the
/// focused-conv bookkeeping cost charged once per focused layer.
struct EnergyProfile {
    EnergyMode mode = EnergyMode::Mac;
    std::vector<double> conv_energy;       // E per conv layer, in model order
    std::vector<std::size_t> conv_layers;  // graph layer index per entry
    double overhead = 0.0;

    std::size_t conv_count() const { return conv_energy.size(); }
};

/// Builds the profile. Time mode runs `repetitions` instrumented forward
/// passes per calibration input and takes medians; it requires a non-empty
/// calibration set. Mac mode ignores the calibration inputs and derives the
/// overhead from gather/scatter element counts at a full AoI.
EnergyProfile profile_energy(const ModelGraph& g, EnergyMode mode,
                             std::span<const Tensor> calibration = {}, int repetitions = 3);

/// max(0, focused_full_aoi - dense): the per-layer overhead definition.
double overhead_from_medians(double focused_full_aoi, double dense);

/// Measures one conv layer's focused-conv overhead: median cost of the layer
/// run focused at a 100% AoI minus its median dense cost, clamped at 0.
/// Throws GraphError when the layer is not a conv.
double measure_overhead_c(const ModelGraph& g, std::size_t layer_index,
                          std::span<const Tensor> calibration, int repetitions = 3);

/// Projected total conv energy when the first k conv layers stay dense and
/// the remaining N-k run focused at AoI fraction `a`:
///   E_total = (N-k)*overhead + sum(i<=k) E_i + a * sum(i>k) E_i
/// Monotone non-decreasing in `a`; equals sum(E_i) at k = N.
double project_energy(const EnergyProfile& p, std::size_t k, double aoi_fraction);

/// Largest k in [1, N-1] whose projection fits the budget; nullopt when no
/// split does (the budget is below the overhead floor).
std::optional<std::size_t> select_k(const EnergyProfile& p, double budget,
                                    double aoi_fraction);

}  // namespace focal
