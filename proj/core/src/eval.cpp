#include "focal/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "focal/errors.hpp"
#include "focal/numeric.hpp"

namespace focal {

std::size_t argmax_label(const Tensor& logits) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits.values()[i] > logits.values()[best]) {
            best = i;
        }
    }
    return best;
}

double improvement(double unmodified, double focused) {
    if (unmodified == 0.0) {
        return 0.0;
    }
    return std::abs(unmodified - focused) / unmodified;
}

EvalReport evaluate_model(const ModelGraph& g, const Dataset& ds, const TimingConfig& timing) {
    if (ds.empty()) {
        throw DatasetError("dataset is empty");
    }
    using clock = std::chrono::steady_clock;

    EvalReport report;
    report.model = g.name;
    report.samples = ds.size();
    report.warmup = timing.warmup;
    report.repetitions = timing.repetitions;

    for (int i = 0; i < timing.warmup; ++i) {
        forward(g, ds.samples[static_cast<std::size_t>(i) % ds.size()].tensor);
    }

    std::vector<double> times;
    times.reserve(ds.size() * static_cast<std::size_t>(std::max(timing.repetitions, 1)));

    // First pass collects accuracy, MACs and AoI stats alongside the timing.
    std::size_t correct = 0;
    bool first_mask = true;
    for (const Sample& sample : ds.samples) {
        const auto t0 = clock::now();
        const ForwardResult res = forward(g, sample.tensor);
        times.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());

        if (static_cast<std::size_t>(sample.label) >= res.output.size()) {
            throw DatasetError("label " + std::to_string(sample.label) + " out of range for " +
                               std::to_string(res.output.size()) + " model outputs (" +
                               sample.path.string() + ")");
        }
        if (argmax_label(res.output) == static_cast<std::size_t>(sample.label)) {
            ++correct;
        }
        report.total_macs += res.macs.total_focused;
        if (res.aoi) {
            const double f = res.aoi->fraction();
            if (first_mask) {
                report.has_aoi = true;
                report.aoi_mean = 0.0;
                report.aoi_min = f;
                report.aoi_max = f;
                first_mask = false;
            }
            report.aoi_mean += f;
            report.aoi_min = std::min(report.aoi_min, f);
            report.aoi_max = std::max(report.aoi_max, f);
        }
    }
    if (report.has_aoi) {
        report.aoi_mean /= static_cast<double>(ds.size());
    }

    for (int rep = 1; rep < timing.repetitions; ++rep) {
        for (const Sample& sample : ds.samples) {
            const auto t0 = clock::now();
            forward(g, sample.tensor);
            times.push_back(
                std::chrono::duration<double, std::milli>(clock::now() - t0).count());
        }
    }

    report.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
    report.latency_ms_median = median(times);
    report.macs_per_inference =
        static_cast<double>(report.total_macs) / static_cast<double>(ds.size());
    return report;
}

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const EvalReport& r) {
    Json j;
    j["model"] = r.model;
    j["samples"] = r.samples;
    j["accuracy"] = r.accuracy;
    j["latency_ms_median"] = r.latency_ms_median;
    j["total_macs"] = r.total_macs;
    j["macs_per_inference"] = r.macs_per_inference;
    if (r.has_aoi) {
        j["aoi_fraction"] = Json{{"mean", r.aoi_mean}, {"min", r.aoi_min}, {"max", r.aoi_max}};
    } else {
        j["aoi_fraction"] = nullptr;
    }
    j["timing"] = Json{{"warmup", r.warmup}, {"repetitions", r.repetitions}};
    return j;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void eval_report_write_json(const EvalReport& r, const std::filesystem::path& path,
                            const EvalReport* baseline) {
    Json j = to_json(r);
    if (baseline != nullptr) {
        j["improvement_vs_baseline"] =
            Json{{"baseline_model", baseline->model},
                 {"accuracy", improvement(baseline->accuracy, r.accuracy)},
                 {"latency", improvement(baseline->latency_ms_median, r.latency_ms_median)},
                 {"macs", improvement(static_cast<double>(baseline->total_macs),
                                      static_cast<double>(r.total_macs))}};
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

void eval_report_write_csv(const EvalReport& r, const std::filesystem::path& path,
                           const EvalReport* baseline) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "model,samples,accuracy,latency_ms_median,total_macs,macs_per_inference,"
           "aoi_mean,aoi_min,aoi_max,improvement_accuracy,improvement_latency,"
           "improvement_macs\n";
    out << r.model << "," << r.samples << "," << fmt_double(r.accuracy) << ","
        << fmt_double(r.latency_ms_median) << "," << r.total_macs << ","
        << fmt_double(r.macs_per_inference) << ",";
    if (r.has_aoi) {
        out << fmt_double(r.aoi_mean) << "," << fmt_double(r.aoi_min) << ","
            << fmt_double(r.aoi_max);
    } else {
        out << ",,";
    }
    if (baseline != nullptr) {
        out << "," << fmt_double(improvement(baseline->accuracy, r.accuracy)) << ","
            << fmt_double(improvement(baseline->latency_ms_median, r.latency_ms_median))
            << ","
            << fmt_double(improvement(static_cast<double>(baseline->total_macs),
                                      static_cast<double>(r.total_macs)));
    } else {
        out << ",,,";
    }
    out << "\n";
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

EvalReport eval_report_read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open report: " + path.string());
    }
    Json j = Json::parse(in, nullptr, true);
    EvalReport r;
    r.model = j.value("model", std::string{});
    r.samples = j.value("samples", std::size_t{0});
    r.accuracy = j.value("accuracy", 0.0);
    r.latency_ms_median = j.value("latency_ms_median", 0.0);
    r.total_macs = j.value("total_macs", std::uint64_t{0});
    r.macs_per_inference = j.value("macs_per_inference", 0.0);
    if (j.contains("aoi_fraction") && j["aoi_fraction"].is_object()) {
        r.has_aoi = true;
        r.aoi_mean = j["aoi_fraction"].value("mean", 0.0);
        r.aoi_min = j["aoi_fraction"].value("min", 0.0);
        r.aoi_max = j["aoi_fraction"].value("max", 0.0);
    }
    if (j.contains("timing")) {
        r.warmup = j["timing"].value("warmup", 0);
        r.repetitions = j["timing"].value("repetitions", 0);
    }
    return r;
}

}  // namespace focal
