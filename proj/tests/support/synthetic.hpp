#pragma once

#include <algorithm>
#include <vector>

#include "focal/search.hpp"

namespace focal::testing {

// Closed-form accuracy-latency curve over a fixed activation distribution:
//   kept(tau)  = fraction of values >= tau
//   accuracy   = 1 - (1 - kept) * 0.1
//   latency    = 100 * (0.3 + 0.7 * kept)
// The curve only reads tau off the candidate model, so every quantity has an
// independent brute-force counterpart.
struct SyntheticCurve {
    std::vector<double> values;

    static SyntheticCurve uniform_grid() {
        SyntheticCurve c;
        for (int i = 0; i < 1000; ++i) {
            c.values.push_back(static_cast<double>(i) / 1000.0);
        }
        return c;
    }

    double kept(double tau) const {
        std::size_t n = 0;
        for (const double v : values) {
            if (v >= tau) {
                ++n;
            }
        }
        return static_cast<double>(n) / static_cast<double>(values.size());
    }
    double accuracy(double tau) const { return 1.0 - (1.0 - kept(tau)) * 0.1; }
    double latency(double tau) const { return 100.0 * (0.3 + 0.7 * kept(tau)); }
};

class SyntheticOracle : public EvalOracle {
public:
    explicit SyntheticOracle(SyntheticCurve curve) : curve_(std::move(curve)) {}

    Result evaluate(const ModelGraph& g) override {
        for (const LayerSpec& layer : g.layers) {
            if (const auto* thr = std::get_if<ThresholdAoiLayer>(&layer)) {
                const double tau = thr->tau;
                return {curve_.accuracy(tau), curve_.latency(tau), curve_.kept(tau)};
            }
        }
        return {1.0, 100.0, 1.0};  // dense model: full curve start
    }

private:
    SyntheticCurve curve_;
};

// Host model whose layer-1 activation is its input, so the calibration
// channel sums reproduce the synthetic value distribution exactly.
inline ModelGraph identity_host() {
    ModelGraph g;
    g.name = "host";
    g.in_c = 1;
    g.in_h = 25;
    g.in_w = 40;  // 1000 positions
    g.layers.push_back(ConvLayer{ConvParams(1, 1, 1, 1, 1, 0),
                                 {Tensor({1, 1, 1, 1}, {1.0f}), {}},
                                 {Tensor({1, 1, 1, 1}, {0.0f}), {}}});
    g.layers.push_back(ConvLayer{ConvParams(1, 1, 1, 1, 1, 0),
                                 {Tensor({1, 1, 1, 1}, {1.0f}), {}},
                                 {Tensor({1, 1, 1, 1}, {0.0f}), {}}});
    return g;
}

inline std::vector<Tensor> grid_calibration() {
    Tensor t(1, 1, 25, 40);
    for (std::size_t i = 0; i < 1000; ++i) {
        t.values()[i] = static_cast<float>(i) / 1000.0f;
    }
    std::vector<Tensor> calib;
    calib.push_back(std::move(t));
    return calib;
}

// Brute-force feasibility: scan tau from min to past max in eps_min steps.
inline bool grid_feasible(const SyntheticCurve& c, double T, double A, double eps_min) {
    const double lo = *std::min_element(c.values.begin(), c.values.end());
    const double hi = *std::max_element(c.values.begin(), c.values.end()) + 2 * eps_min;
    for (double tau = lo; tau <= hi; tau += eps_min) {
        if (c.latency(tau) <= T && c.accuracy(tau) >= A) {
            return true;
        }
    }
    return false;
}

}  // namespace focal::testing
