#include <cstring>
#include <fstream>

#include <doctest.h>

#include "focal/errors.hpp"
#include "focal/eval.hpp"
#include "focal/search.hpp"
#include "support/builders.hpp"

using namespace focal;
using namespace focal::testing;

namespace {

// Ignores its input: logits come straight from the linear bias.
ModelGraph constant_model(const std::vector<float>& logits) {
    ModelGraph g;
    g.name = "const";
    g.in_c = 1;
    g.in_h = 2;
    g.in_w = 2;
    g.layers.push_back(FlattenLayer{});
    g.layers.push_back(LinearLayer{4, logits.size(),
                                   tensor_ref(Tensor(logits.size(), 4, 1, 1)),
                                   bias_ref(logits)});
    return g;
}

Dataset tiny_dataset(std::size_t n, int label, Rng& rng) {
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        ds.samples.push_back({random_tensor({1, 1, 2, 2}, rng), label, {}});
    }
    return ds;
}

}  // namespace

TEST_CASE("argmax breaks ties toward the lowest index") {
    CHECK(argmax_label(Tensor({1, 3, 1, 1}, {1.0f, 1.0f, 0.5f})) == 0);
    CHECK(argmax_label(Tensor({1, 3, 1, 1}, {0.0f, 2.0f, 2.0f})) == 1);
}

TEST_CASE("improvement uses the relative-delta formula") {
    CHECK(improvement(10.0, 7.5) == 0.25);
    CHECK(improvement(10.0, 12.0) == doctest::Approx(0.2));
    CHECK(improvement(0.0, 5.0) == 0.0);
}

TEST_CASE("constant class-0 model scores 1.0 on class-0 data") {
    Rng rng(80);
    const ModelGraph g = constant_model({1.0f, 0.0f, 0.0f});
    const EvalReport r = evaluate_model(g, tiny_dataset(5, 0, rng), {1, 1});
    CHECK(r.accuracy == 1.0);
    CHECK(r.samples == 5);
    CHECK_FALSE(r.has_aoi);

    const EvalReport miss = evaluate_model(g, tiny_dataset(4, 2, rng), {1, 1});
    CHECK(miss.accuracy == 0.0);
}

TEST_CASE("empty datasets and out-of-range labels are rejected") {
    Rng rng(81);
    const ModelGraph g = constant_model({1.0f, 0.0f});
    CHECK_THROWS_AS(evaluate_model(g, Dataset{}, {1, 1}), DatasetError);
    CHECK_THROWS_AS(evaluate_model(g, tiny_dataset(2, 7, rng), {1, 1}), DatasetError);
}

TEST_CASE("the tau0 conversion changes nothing measurable") {
    Rng rng(82);
    const ModelGraph dense = random_conv_stack(2, 2, 8, 8, 3, rng);

    Dataset ds;
    std::uniform_int_distribution<int> label(0, 2);
    for (int i = 0; i < 6; ++i) {
        ds.samples.push_back({random_tensor({1, 2, 8, 8}, rng), label(rng), {}});
    }

    // global minimum channel sum at the split point across the dataset
    double tau0 = std::numeric_limits<double>::infinity();
    for (const Sample& s : ds.samples) {
        ForwardOptions opts;
        opts.capture_after = 2;
        const Tensor sums = channel_sum(*forward(dense, s.tensor, opts).captured);
        for (const float v : sums.values()) {
            tau0 = std::min(tau0, static_cast<double>(v));
        }
    }
    const ModelGraph fcnn = convert_to_fcnn(dense, 2, tau0, BlockConfig(4), 0.0f);

    for (const Sample& s : ds.samples) {
        const Tensor a = forward(dense, s.tensor).output;
        const Tensor b = forward(fcnn, s.tensor).output;
        REQUIRE(a.dims() == b.dims());
        REQUIRE(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
    }
    const EvalReport dense_report = evaluate_model(dense, ds, {1, 1});
    const EvalReport fcnn_report = evaluate_model(fcnn, ds, {1, 1});
    CHECK(dense_report.accuracy == fcnn_report.accuracy);
    CHECK(fcnn_report.has_aoi);
    CHECK(fcnn_report.aoi_min == 1.0);
}

TEST_CASE("evaluation MAC totals reconcile with per-sample reports") {
    Rng rng(83);
    const ModelGraph dense = random_conv_stack(3, 2, 8, 8, 3, rng);
    const ModelGraph fcnn = convert_to_fcnn(dense, 2, 0.2, BlockConfig(4), 0.0f);

    Dataset ds;
    for (int i = 0; i < 4; ++i) {
        ds.samples.push_back({random_tensor({1, 2, 8, 8}, rng), 0, {}});
    }
    std::uint64_t expected = 0;
    for (const Sample& s : ds.samples) {
        const ForwardResult res = forward(fcnn, s.tensor);
        REQUIRE(res.aoi.has_value());
        expected += count_macs(fcnn, *res.aoi).total_focused;
    }
    const EvalReport r = evaluate_model(fcnn, ds, {1, 1});
    CHECK(r.total_macs == expected);
    CHECK(r.macs_per_inference == doctest::Approx(static_cast<double>(expected) / 4.0));
}

TEST_CASE("reports round-trip through JSON") {
    TempDir dir("eval");
    EvalReport r;
    r.model = "m";
    r.samples = 12;
    r.accuracy = 0.75;
    r.latency_ms_median = 3.5;
    r.total_macs = 123456;
    r.macs_per_inference = 10288.0;
    r.has_aoi = true;
    r.aoi_mean = 0.4;
    r.aoi_min = 0.1;
    r.aoi_max = 0.9;
    r.warmup = 2;
    r.repetitions = 5;
    eval_report_write_json(r, dir / "r.json");
    eval_report_write_csv(r, dir / "r.csv");

    const EvalReport back = eval_report_read_json(dir / "r.json");
    CHECK(back.model == r.model);
    CHECK(back.samples == r.samples);
    CHECK(back.accuracy == r.accuracy);
    CHECK(back.latency_ms_median == r.latency_ms_median);
    CHECK(back.total_macs == r.total_macs);
    CHECK(back.has_aoi);
    CHECK(back.aoi_mean == r.aoi_mean);
    CHECK(back.warmup == 2);

    std::ifstream csv(dir / "r.csv");
    std::string header;
    std::string row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header.find("accuracy") != std::string::npos);
    CHECK(row.find("m,12,0.75") == 0);
}

TEST_CASE("dataset save and load round trip") {
    TempDir dir("dataset");
    Rng rng(84);
    Dataset ds;
    for (int i = 0; i < 3; ++i) {
        ds.samples.push_back({random_tensor({1, 1, 2, 2}, rng), i, {}});
    }
    dataset_save(ds, dir / "data");
    const Dataset back = dataset_load(dir / "data");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.samples[i].label == static_cast<int>(i));
        CHECK(back.samples[i].tensor == ds.samples[i].tensor);
    }
}

TEST_CASE("malformed dataset indexes are rejected with line numbers") {
    TempDir dir("dataset");
    std::filesystem::create_directories(dir / "data");
    std::ofstream(dir / "data" / "index.csv") << "a.ftnsr\n";
    try {
        dataset_load(dir / "data");
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(std::string(e.what()).find(":1:") != std::string::npos);
    }

    std::ofstream(dir / "data" / "index.csv", std::ios::trunc) << "a.ftnsr,-3\n";
    CHECK_THROWS_AS(dataset_load(dir / "data"), DatasetError);

    std::ofstream(dir / "data" / "index.csv", std::ios::trunc) << "missing.ftnsr,1\n";
    CHECK_THROWS_AS(dataset_load(dir / "data"), IoError);
}

TEST_CASE("dataset oracle reports evaluation metrics") {
    Rng rng(85);
    const ModelGraph dense = random_conv_stack(2, 2, 8, 8, 3, rng);
    Dataset ds;
    for (int i = 0; i < 3; ++i) {
        ds.samples.push_back({random_tensor({1, 2, 8, 8}, rng), 0, {}});
    }
    DatasetOracle oracle(ds, {1, 1});
    const EvalOracle::Result dense_r = oracle.evaluate(dense);
    CHECK(dense_r.aoi_fraction == 1.0);
    const ModelGraph fcnn =
        convert_to_fcnn(dense, 2, std::numeric_limits<double>::infinity(), BlockConfig(4),
                        0.0f);
    const EvalOracle::Result fcnn_r = oracle.evaluate(fcnn);
    CHECK(fcnn_r.aoi_fraction == 0.0);
}
