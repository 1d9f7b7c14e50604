#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "focal/eval.hpp"
#include "focal/graph.hpp"

namespace focal {

/// Targets and step schedule of the threshold search.
struct SearchConfig {
    double latency_target_ms = 0.0;  // T
    double accuracy_target = 0.0;    // A, fraction in [0, 1]
    /// Initial tau increment. Default: (p95 - min) / 16 of the channel-sum
    /// values observed over the calibration inputs.
    std::optional<double> eps0;
    /// Smallest increment; the search gives up once the feasible bracket is
    /// narrower than this. Default: eps0 / 64.
    std::optional<double> eps_min;
    int max_passes = 16;
    double wall_timeout_s = 600.0;
};

/// Evaluates a candidate model. Implementations must be deterministic for a
/// fixed model (timing noise aside): dataset-backed for real runs, synthetic
/// closed-form curves in tests.
class EvalOracle {
public:
    struct Result {
        double accuracy = 0.0;
        double latency_ms = 0.0;
        double aoi_fraction = 1.0;  // mean over inputs
    };

    virtual ~EvalOracle() = default;
    virtual Result evaluate(const ModelGraph& g) = 0;
};

/// Oracle backed by evaluate_model over a dataset.
class DatasetOracle : public EvalOracle {
public:
    DatasetOracle(const Dataset& ds, TimingConfig timing) : ds_(ds), timing_(timing) {}
    Result evaluate(const ModelGraph& g) override;

private:
    const Dataset& ds_;
    TimingConfig timing_;
};

enum class SearchStatus { Success, Infeasible, TimedOut };
const char* to_string(SearchStatus s);

struct SearchPass {
    int pass = 0;
    double tau = 0.0;
    double accuracy = 0.0;
    double latency_ms = 0.0;
    double aoi_fraction = 0.0;
};

struct SearchTrace {
    std::vector<SearchPass> passes;
    SearchStatus status = SearchStatus::Infeasible;
    double final_tau = 0.0;  // meaningful on Success
    std::string note;
};

/// Walks the accuracy-latency curve of g converted at split k.
///
/// tau starts at the minimum channel-sum over the calibration inputs at
/// layer k (a 100% AoI), climbs by eps0 until the latency target holds, then
/// if accuracy fell short walks back down with steps rescaled by the
/// relative accuracy gap, keeping a bracket so the walk terminates: either
/// some pass meets both targets (Success) or the bracket collapses below
/// eps_min (Infeasible). Pass or wall-clock budget exhaustion is TimedOut.
SearchTrace search_tau(const ModelGraph& g, std::size_t k, EvalOracle& oracle,
                       const SearchConfig& cfg, std::span<const Tensor> calibration,
                       BlockConfig block = {}, float fill = 0.0f);

void trace_write_csv(const SearchTrace& t, const std::filesystem::path& path);
void trace_write_json(const SearchTrace& t, const std::filesystem::path& path);

}  // namespace focal
