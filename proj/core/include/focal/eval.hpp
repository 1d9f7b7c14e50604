#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "focal/dataset.hpp"
#include "focal/graph.hpp"

namespace focal {

/// Latency measurement protocol: warmup inferences are discarded, then the
/// reported latency is the median per-inference wall time over `repetitions`
/// timed passes. Timing runs on a single thread.
struct TimingConfig {
    int warmup = 2;
    int repetitions = 5;
};

struct EvalReport {
    std::string model;
    std::size_t samples = 0;
    double accuracy = 0.0;           // top-1
    double latency_ms_median = 0.0;  // per inference
    std::uint64_t total_macs = 0;    // one pass over the dataset, work actually done
    double macs_per_inference = 0.0;
    bool has_aoi = false;
    double aoi_mean = 0.0;
    double aoi_min = 0.0;
    double aoi_max = 0.0;
    int warmup = 0;
    int repetitions = 0;
};

/// Runs the model over the dataset: top-1 accuracy, median latency, MAC
/// totals, and AoI fraction stats when the model produces a mask. Throws
/// DatasetError on an empty dataset or a label out of range.
EvalReport evaluate_model(const ModelGraph& g, const Dataset& ds,
                          const TimingConfig& timing = {});

/// Index of the largest logit (lowest index wins ties).
std::size_t argmax_label(const Tensor& logits);

/// Relative delta |unmodified - focused| / unmodified; 0 when the baseline
/// value is 0.
double improvement(double unmodified, double focused);

/// Writers emit deterministic field ordering. When a baseline report is
/// given, an improvement block computed by the relative-delta formula is
/// appended (JSON object / trailing CSV columns).
void eval_report_write_json(const EvalReport& r, const std::filesystem::path& path,
                            const EvalReport* baseline = nullptr);
void eval_report_write_csv(const EvalReport& r, const std::filesystem::path& path,
                           const EvalReport* baseline = nullptr);
EvalReport eval_report_read_json(const std::filesystem::path& path);

}  // namespace focal
