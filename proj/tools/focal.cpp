// focal: convert pretrained CNN manifests into focused-convolution models,
// pick the split layer and brightness threshold, and benchmark the result.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "focal/energy.hpp"
#include "focal/errors.hpp"
#include "focal/eval.hpp"
#include "focal/manifest.hpp"
#include "focal/search.hpp"
#include "focal/tensor_io.hpp"

#include <json.hpp>

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kInfeasibleBudget = 3;
constexpr int kTimedOut = 4;
constexpr int kInfeasibleTargets = 5;

std::size_t env_block_size() {
    if (const char* env = std::getenv("FOCAL_BLOCK_SIZE")) {
        const long v = std::atol(env);
        if (v >= 1) {
            return static_cast<std::size_t>(v);
        }
        std::cerr << "warning: ignoring invalid FOCAL_BLOCK_SIZE=" << env << "\n";
    }
    return 8;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string dims_str(const focal::Dims& d) {
    return std::to_string(d.c) + "x" + std::to_string(d.h) + "x" + std::to_string(d.w);
}

int cmd_inspect(const std::string& manifest) {
    const focal::ModelGraph g = focal::model_load(manifest);
    const auto shapes = focal::trace_shapes(g);
    const focal::MacReport macs = focal::count_macs(g);
    const auto points = focal::downsample_points(g);

    std::vector<std::uint64_t> dense_by_layer(g.layers.size(), 0);
    for (const focal::MacEntry& e : macs.entries) {
        dense_by_layer[e.layer] = e.dense;
    }

    std::printf("model: %s   input: %zux%zux%zu\n", g.name.c_str(), g.in_c, g.in_h, g.in_w);
    std::printf("%4s  %-14s %-12s %14s  %s\n", "idx", "type", "output", "dense MACs", "");
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        const bool down = std::find(points.begin(), points.end(), i) != points.end();
        std::printf("%4zu  %-14s %-12s %14llu  %s\n", i, focal::layer_type_name(g.layers[i]),
                    dims_str(shapes[i]).c_str(),
                    static_cast<unsigned long long>(dense_by_layer[i]),
                    down ? "downsample" : "");
    }
    std::printf("total dense MACs: %llu\n",
                static_cast<unsigned long long>(macs.total_dense));
    if (!points.empty()) {
        std::printf("candidate splits (--k counts leading layers):");
        for (const std::size_t idx : points) {
            std::printf(" %zu", idx + 1);
        }
        std::printf("\n");
    }
    return kOk;
}

int cmd_plan_k(const std::string& manifest, double budget, double aoi_fraction,
               const std::string& proxy, const std::string& dataset_dir,
               const std::string& json_out) {
    const focal::ModelGraph g = focal::model_load(manifest);

    focal::EnergyProfile profile;
    if (proxy == "mac") {
        profile = focal::profile_energy(g, focal::EnergyMode::Mac);
    } else {
        if (dataset_dir.empty()) {
            std::cerr << "error: --proxy time needs --dataset for calibration\n";
            return kInputError;
        }
        const focal::Dataset ds = focal::dataset_load(dataset_dir);
        std::vector<focal::Tensor> calib;
        for (std::size_t i = 0; i < std::min<std::size_t>(ds.size(), 8); ++i) {
            calib.push_back(ds.samples[i].tensor);
        }
        profile = focal::profile_energy(g, focal::EnergyMode::Time, calib);
    }

    const std::size_t n = profile.conv_count();
    if (n < 2) {
        std::cerr << "error: the model needs at least two conv layers to split\n";
        return kInputError;
    }

    std::printf("energy proxy: %s   overhead c: %s   aoi fraction: %s\n", proxy.c_str(),
                fmt(profile.overhead).c_str(), fmt(aoi_fraction).c_str());
    std::printf("%4s  %14s  %s\n", "k", "E_total", "within budget");
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (std::size_t k = 1; k + 1 <= n; ++k) {
        const double e = focal::project_energy(profile, k, aoi_fraction);
        std::printf("%4zu  %14s  %s\n", k, fmt(e).c_str(), e <= budget ? "yes" : "no");
        table.push_back({{"k", k}, {"e_total", e}, {"feasible", e <= budget}});
    }

    const auto selected = focal::select_k(profile, budget, aoi_fraction);
    std::optional<std::size_t> graph_split;
    if (selected) {
        graph_split = profile.conv_layers[*selected - 1] + 1;
        std::printf("selected k: %zu conv layers stay dense\n", *selected);
        std::printf("graph split for convert/search-tau: --k %zu\n", *graph_split);
    } else {
        std::printf("no split meets the budget %s (overhead floor too high)\n",
                    fmt(budget).c_str());
    }

    if (!json_out.empty()) {
        nlohmann::ordered_json j;
        j["proxy"] = proxy;
        j["budget"] = budget;
        j["aoi_fraction"] = aoi_fraction;
        j["overhead"] = profile.overhead;
        j["table"] = table;
        j["selected_k"] =
            selected ? nlohmann::ordered_json(*selected) : nlohmann::ordered_json(nullptr);
        j["graph_split"] = graph_split ? nlohmann::ordered_json(*graph_split)
                                       : nlohmann::ordered_json(nullptr);
        std::ofstream out(json_out, std::ios::trunc);
        if (!out) {
            throw focal::IoError("cannot open for writing: " + json_out);
        }
        out << j.dump(2) << "\n";
    }
    return selected ? kOk : kInfeasibleBudget;
}

int cmd_search_tau(const std::string& manifest, const std::string& dataset_dir,
                   std::size_t k, focal::SearchConfig cfg, std::size_t block_size,
                   double fill, std::size_t calib_count, int warmup, int reps,
                   const std::string& out_dir) {
    const focal::ModelGraph g = focal::model_load(manifest);
    const focal::Dataset ds = focal::dataset_load(dataset_dir);
    if (ds.empty()) {
        throw focal::DatasetError("dataset is empty: " + dataset_dir);
    }

    std::vector<focal::Tensor> calib;
    for (std::size_t i = 0; i < std::min(ds.size(), calib_count); ++i) {
        calib.push_back(ds.samples[i].tensor);
    }
    focal::DatasetOracle oracle(ds, {warmup, reps});

    const focal::SearchTrace trace =
        focal::search_tau(g, k, oracle, cfg, calib, focal::BlockConfig(block_size),
                          static_cast<float>(fill));

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out(out_dir);
    focal::trace_write_csv(trace, out / "trace.csv");
    focal::trace_write_json(trace, out / "trace.json");

    std::printf("%4s  %12s  %10s  %12s  %12s\n", "pass", "tau", "accuracy", "latency_ms",
                "aoi_frac");
    for (const focal::SearchPass& p : trace.passes) {
        std::printf("%4d  %12s  %10s  %12s  %12s\n", p.pass, fmt(p.tau).c_str(),
                    fmt(p.accuracy).c_str(), fmt(p.latency_ms).c_str(),
                    fmt(p.aoi_fraction).c_str());
    }
    std::printf("status: %s\n", focal::to_string(trace.status));

    if (trace.status != focal::SearchStatus::Success) {
        if (!trace.note.empty()) {
            std::printf("note: %s\n", trace.note.c_str());
        }
        return trace.status == focal::SearchStatus::TimedOut ? kTimedOut
                                                             : kInfeasibleTargets;
    }

    focal::ModelGraph fcnn = focal::convert_to_fcnn(
        g, k, trace.final_tau, focal::BlockConfig(block_size), static_cast<float>(fill));
    fcnn.name = g.name + "_fcnn";
    const std::filesystem::path fcnn_path = out / (g.name + "_fcnn.json");
    focal::model_save(fcnn, fcnn_path);
    std::printf("tau: %s\n", fmt(trace.final_tau, "%.9g").c_str());
    std::printf("wrote %s\n", fcnn_path.string().c_str());
    return kOk;
}

int cmd_eval(const std::string& manifest, const std::string& dataset_dir, int warmup,
             int reps, const std::string& baseline_path, const std::string& out_dir) {
    const focal::ModelGraph g = focal::model_load(manifest);
    const focal::Dataset ds = focal::dataset_load(dataset_dir);
    const focal::EvalReport report = focal::evaluate_model(g, ds, {warmup, reps});

    std::optional<focal::EvalReport> baseline;
    if (!baseline_path.empty()) {
        baseline = focal::eval_report_read_json(baseline_path);
    }

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out(out_dir);
    focal::eval_report_write_json(report, out / "eval.json",
                                  baseline ? &*baseline : nullptr);
    focal::eval_report_write_csv(report, out / "eval.csv", baseline ? &*baseline : nullptr);

    std::printf("model:             %s\n", report.model.c_str());
    std::printf("samples:           %zu\n", report.samples);
    std::printf("accuracy (top-1):  %s\n", fmt(report.accuracy).c_str());
    std::printf("latency median:    %s ms\n", fmt(report.latency_ms_median).c_str());
    std::printf("MACs/inference:    %s\n", fmt(report.macs_per_inference).c_str());
    if (report.has_aoi) {
        std::printf("AoI fraction:      mean %s  min %s  max %s\n",
                    fmt(report.aoi_mean).c_str(), fmt(report.aoi_min).c_str(),
                    fmt(report.aoi_max).c_str());
    }
    if (baseline) {
        std::printf("vs %s:  accuracy %s%%  latency %s%%  MACs %s%%\n",
                    baseline->model.c_str(),
                    fmt(100.0 * focal::improvement(baseline->accuracy, report.accuracy))
                        .c_str(),
                    fmt(100.0 * focal::improvement(baseline->latency_ms_median,
                                                   report.latency_ms_median))
                        .c_str(),
                    fmt(100.0 * focal::improvement(
                                    static_cast<double>(baseline->total_macs),
                                    static_cast<double>(report.total_macs)))
                        .c_str());
    }
    std::printf("wrote %s and %s\n", (out / "eval.json").string().c_str(),
                (out / "eval.csv").string().c_str());
    return kOk;
}

int cmd_infer(const std::string& manifest, const std::string& tensor_path,
              const std::string& mask_path) {
    const focal::ModelGraph g = focal::model_load(manifest);
    const focal::Tensor x = focal::tensor_read(tensor_path);
    const focal::ForwardResult res = focal::forward(g, x);
    std::printf("label: %zu\n", focal::argmax_label(res.output));
    if (!mask_path.empty()) {
        if (res.aoi) {
            focal::mask_export_pgm(*res.aoi, mask_path);
            std::printf("wrote %s (aoi fraction %s)\n", mask_path.c_str(),
                        fmt(res.aoi->fraction()).c_str());
        } else {
            std::cerr << "note: model has no threshold layer; no mask written\n";
        }
    }
    return kOk;
}

int cmd_convert(const std::string& manifest, std::size_t k, double tau,
                std::size_t block_size, double fill, const std::string& out_path) {
    const focal::ModelGraph g = focal::model_load(manifest);
    focal::ModelGraph fcnn = focal::convert_to_fcnn(g, k, tau, focal::BlockConfig(block_size),
                                                    static_cast<float>(fill));
    fcnn.name = g.name + "_fcnn";
    focal::model_save(fcnn, out_path);
    std::printf("wrote %s (threshold after %zu layers, tau %s)\n", out_path.c_str(), k,
                fmt(tau, "%.9g").c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"focused-convolution CNN inference and planning toolkit", "focal"};
    app.require_subcommand(1);

    std::function<int()> run;

    // inspect
    {
        auto* cmd = app.add_subcommand("inspect", "print layers, shapes, MACs, split points");
        auto manifest = std::make_shared<std::string>();
        cmd->add_option("manifest", *manifest, "model manifest (JSON)")->required();
        cmd->callback([=, &run] { run = [=] { return cmd_inspect(*manifest); }; });
    }

    // plan-k
    {
        auto* cmd = app.add_subcommand("plan-k", "select the split layer from the energy model");
        auto manifest = std::make_shared<std::string>();
        auto budget = std::make_shared<double>(0.0);
        auto aoi = std::make_shared<double>(0.5);
        auto proxy = std::make_shared<std::string>("mac");
        auto dataset = std::make_shared<std::string>();
        auto json_out = std::make_shared<std::string>();
        cmd->add_option("manifest", *manifest, "model manifest (JSON)")->required();
        cmd->add_option("--budget", *budget, "energy budget in proxy units")->required();
        cmd->add_option("--aoi-fraction", *aoi, "expected AoI fraction in [0,1]")
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--proxy", *proxy, "energy proxy: mac or time")
            ->check(CLI::IsMember({"mac", "time"}));
        cmd->add_option("--dataset", *dataset, "dataset dir for time-proxy calibration");
        cmd->add_option("--json", *json_out, "also write the k table as JSON");
        cmd->callback([=, &run] {
            run = [=] { return cmd_plan_k(*manifest, *budget, *aoi, *proxy, *dataset,
                                          *json_out); };
        });
    }

    // search-tau
    {
        auto* cmd = app.add_subcommand("search-tau",
                                       "walk the accuracy-latency curve for a threshold");
        auto manifest = std::make_shared<std::string>();
        auto dataset = std::make_shared<std::string>();
        auto k = std::make_shared<std::size_t>(0);
        auto cfg = std::make_shared<focal::SearchConfig>();
        auto eps0 = std::make_shared<double>(0.0);
        auto eps_min = std::make_shared<double>(0.0);
        auto block = std::make_shared<std::size_t>(env_block_size());
        auto fill = std::make_shared<double>(0.0);
        auto calib = std::make_shared<std::size_t>(32);
        auto warmup = std::make_shared<int>(1);
        auto reps = std::make_shared<int>(3);
        auto out_dir = std::make_shared<std::string>(".");
        cmd->add_option("manifest", *manifest, "dense model manifest")->required();
        cmd->add_option("dataset", *dataset, "dataset directory")->required();
        cmd->add_option("-k,--k", *k, "leading layers kept dense")->required();
        cmd->add_option("-T,--latency-target", cfg->latency_target_ms,
                        "latency target, milliseconds")
            ->required();
        cmd->add_option("-A,--accuracy-target", cfg->accuracy_target,
                        "accuracy target in [0,1]")
            ->required();
        auto* eps0_opt = cmd->add_option("--eps0", *eps0, "initial tau increment");
        auto* eps_min_opt = cmd->add_option("--eps-min", *eps_min, "smallest tau increment");
        cmd->add_option("--max-passes", cfg->max_passes, "evaluation budget (default 16)");
        cmd->add_option("--timeout", cfg->wall_timeout_s, "wall-clock budget, seconds");
        cmd->add_option("--block-size", *block, "focused conv block size");
        cmd->add_option("--fill", *fill, "value for positions outside the AoI");
        cmd->add_option("--calib", *calib, "calibration sample count for tau0");
        cmd->add_option("--warmup", *warmup, "oracle warmup runs per pass");
        cmd->add_option("--reps", *reps, "oracle timing repetitions per pass");
        cmd->add_option("--out-dir", *out_dir, "where to write trace and manifest");
        cmd->callback([=, &run] {
            run = [=] {
                focal::SearchConfig c = *cfg;
                if (eps0_opt->count() > 0) {
                    c.eps0 = *eps0;
                }
                if (eps_min_opt->count() > 0) {
                    c.eps_min = *eps_min;
                }
                return cmd_search_tau(*manifest, *dataset, *k, c, *block, *fill, *calib,
                                      *warmup, *reps, *out_dir);
            };
        });
    }

    // eval
    {
        auto* cmd = app.add_subcommand("eval", "accuracy, latency, MAC and AoI report");
        auto manifest = std::make_shared<std::string>();
        auto dataset = std::make_shared<std::string>();
        auto warmup = std::make_shared<int>(2);
        auto reps = std::make_shared<int>(5);
        auto baseline = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>(".");
        cmd->add_option("manifest", *manifest, "model manifest")->required();
        cmd->add_option("dataset", *dataset, "dataset directory")->required();
        cmd->add_option("--warmup", *warmup, "discarded warmup inferences");
        cmd->add_option("--reps", *reps, "timed passes over the dataset");
        cmd->add_option("--baseline", *baseline, "baseline eval.json for % improvement");
        cmd->add_option("--out-dir", *out_dir, "where to write eval.json / eval.csv");
        cmd->callback([=, &run] {
            run = [=] {
                return cmd_eval(*manifest, *dataset, *warmup, *reps, *baseline, *out_dir);
            };
        });
    }

    // infer
    {
        auto* cmd = app.add_subcommand("infer", "classify one tensor, optionally export the AoI");
        auto manifest = std::make_shared<std::string>();
        auto tensor = std::make_shared<std::string>();
        auto mask = std::make_shared<std::string>();
        cmd->add_option("manifest", *manifest, "model manifest")->required();
        cmd->add_option("tensor", *tensor, "input tensor file")->required();
        cmd->add_option("--export-mask", *mask, "write the AoI as a PGM file");
        cmd->callback(
            [=, &run] { run = [=] { return cmd_infer(*manifest, *tensor, *mask); }; });
    }

    // convert
    {
        auto* cmd = app.add_subcommand("convert", "emit the fCNN manifest for a chosen k, tau");
        auto manifest = std::make_shared<std::string>();
        auto k = std::make_shared<std::size_t>(0);
        auto tau = std::make_shared<double>(0.0);
        auto block = std::make_shared<std::size_t>(env_block_size());
        auto fill = std::make_shared<double>(0.0);
        auto out = std::make_shared<std::string>();
        cmd->add_option("manifest", *manifest, "dense model manifest")->required();
        cmd->add_option("-k,--k", *k, "leading layers kept dense")->required();
        cmd->add_option("--tau", *tau, "activation brightness threshold")->required();
        cmd->add_option("--block-size", *block, "focused conv block size");
        cmd->add_option("--fill", *fill, "value for positions outside the AoI");
        cmd->add_option("--out", *out, "output manifest path")->required();
        cmd->callback([=, &run] {
            run = [=] { return cmd_convert(*manifest, *k, *tau, *block, *fill, *out); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        return run();
    } catch (const focal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
