#include "focal/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "focal/errors.hpp"
#include "focal/numeric.hpp"

namespace focal {

EvalOracle::Result DatasetOracle::evaluate(const ModelGraph& g) {
    const EvalReport r = evaluate_model(g, ds_, timing_);
    return {r.accuracy, r.latency_ms_median, r.has_aoi ? r.aoi_mean : 1.0};
}

const char* to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Success:
            return "success";
        case SearchStatus::Infeasible:
            return "infeasible";
        case SearchStatus::TimedOut:
            return "timed_out";
    }
    return "unknown";
}

SearchTrace search_tau(const ModelGraph& g, std::size_t k, EvalOracle& oracle,
                       const SearchConfig& cfg, std::span<const Tensor> calibration,
                       BlockConfig block, float fill) {
    if (cfg.latency_target_ms <= 0.0) {
        throw std::invalid_argument("latency target must be positive");
    }
    if (cfg.accuracy_target < 0.0 || cfg.accuracy_target > 1.0) {
        throw std::invalid_argument("accuracy target must be in [0, 1]");
    }
    if (cfg.max_passes < 1) {
        throw std::invalid_argument("max_passes must be at least 1");
    }
    if (calibration.empty()) {
        throw DatasetError("tau search needs a non-empty calibration set");
    }

    // tau0 = min over the calibration inputs of the layer-k channel sums,
    // which keeps every feature of every calibration input inside the AoI.
    std::vector<double> observed;
    for (const Tensor& x : calibration) {
        ForwardOptions opts;
        opts.capture_after = k;
        const Tensor sums = channel_sum(*forward(g, x, opts).captured);
        for (const float v : sums.values()) {
            observed.push_back(static_cast<double>(v));
        }
    }
    const double tau0 = *std::min_element(observed.begin(), observed.end());

    double eps0 = cfg.eps0.value_or((percentile(observed, 95.0) - tau0) / 16.0);
    if (eps0 <= 0.0) {
        eps0 = std::max(1e-6, std::abs(tau0) * 1e-3);  // constant feature maps
    }
    const double eps_min = cfg.eps_min.value_or(eps0 / 64.0);
    if (!(eps0 > eps_min) || !(eps_min > 0.0)) {
        throw std::invalid_argument("need eps0 > eps_min > 0");
    }

    const double T = cfg.latency_target_ms;
    const double A = cfg.accuracy_target;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(cfg.wall_timeout_s);

    SearchTrace trace;
    const auto evaluate = [&](double tau) {
        const ModelGraph converted = convert_to_fcnn(g, k, tau, block, fill);
        const EvalOracle::Result r = oracle.evaluate(converted);
        trace.passes.push_back({static_cast<int>(trace.passes.size()) + 1, tau, r.accuracy,
                                r.latency_ms, r.aoi_fraction});
        return r;
    };
    const auto out_of_budget = [&] {
        return static_cast<int>(trace.passes.size()) >= cfg.max_passes ||
               std::chrono::steady_clock::now() >= deadline;
    };
    const auto succeed = [&](double tau) {
        trace.status = SearchStatus::Success;
        trace.final_tau = tau;
        return trace;
    };

    double tau = tau0;
    EvalOracle::Result r = evaluate(tau);
    if (r.latency_ms <= T && r.accuracy >= A) {
        return succeed(tau);
    }
    if (r.accuracy < A) {
        // The full AoI reproduces the dense model, so no tau can do better.
        trace.status = SearchStatus::Infeasible;
        trace.note = "accuracy target exceeds the full-AoI accuracy";
        return trace;
    }

    // Ascend: shrink the AoI until the latency target holds.
    double lo = tau;  // highest tau seen that met the accuracy target
    while (r.latency_ms > T) {
        if (out_of_budget()) {
            trace.status = SearchStatus::TimedOut;
            trace.note = "latency target not reached within the pass budget";
            return trace;
        }
        if (r.aoi_fraction <= 0.0) {
            trace.status = SearchStatus::Infeasible;
            trace.note = "latency target below the empty-AoI floor";
            return trace;
        }
        tau += eps0;
        r = evaluate(tau);
        if (r.accuracy >= A && r.latency_ms > T) {
            lo = tau;
        }
    }
    if (r.accuracy >= A) {
        return succeed(tau);
    }

    // Descend: tau meets the latency target but lost too much accuracy.
    // Walk back with steps scaled by the relative accuracy gap, bracketed
    // against the last accuracy-feasible tau.
    double hi = tau;
    EvalOracle::Result r_hi = r;
    while (true) {
        if (hi - lo <= eps_min) {
            trace.status = SearchStatus::Infeasible;
            trace.note = "no tau meets both targets within eps_min";
            return trace;
        }
        if (out_of_budget()) {
            trace.status = SearchStatus::TimedOut;
            trace.note = "bracket refinement exceeded the pass budget";
            return trace;
        }
        const double gap = std::abs(A - r_hi.accuracy) / std::max(A, 1e-12);
        const double eps = std::clamp(eps0 * gap, eps_min, eps0);
        // Never step less than half the bracket, or a shallow accuracy curve
        // would creep and exhaust the pass budget before converging.
        double cand = hi - std::max(eps, (hi - lo) / 2.0);
        if (cand <= lo) {
            cand = lo + (hi - lo) / 2.0;
        }
        r = evaluate(cand);
        if (r.latency_ms <= T && r.accuracy >= A) {
            return succeed(cand);
        }
        if (r.accuracy >= A) {
            lo = cand;  // accurate but still too slow
        } else {
            hi = cand;
            r_hi = r;
        }
    }
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void trace_write_csv(const SearchTrace& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "pass,tau,accuracy,latency_ms,aoi_fraction\n";
    for (const SearchPass& p : t.passes) {
        out << p.pass << "," << fmt_double(p.tau) << "," << fmt_double(p.accuracy) << ","
            << fmt_double(p.latency_ms) << "," << fmt_double(p.aoi_fraction) << "\n";
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void trace_write_json(const SearchTrace& t, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["status"] = to_string(t.status);
    j["final_tau"] = t.status == SearchStatus::Success ? nlohmann::ordered_json(t.final_tau)
                                                       : nlohmann::ordered_json(nullptr);
    j["note"] = t.note;
    j["passes"] = nlohmann::ordered_json::array();
    for (const SearchPass& p : t.passes) {
        j["passes"].push_back({{"pass", p.pass},
                               {"tau", p.tau},
                               {"accuracy", p.accuracy},
                               {"latency_ms", p.latency_ms},
                               {"aoi_fraction", p.aoi_fraction}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace focal
