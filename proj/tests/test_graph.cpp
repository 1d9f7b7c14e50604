#include <cstring>
#include <limits>

#include <doctest.h>

#include "focal/errors.hpp"
#include "focal/graph.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace focal;
using namespace focal::testing;

namespace {

bool same_bits(const Tensor& a, const Tensor& b) {
    return a.dims() == b.dims() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("shape trace composes through the classifier head") {
    Rng rng(40);
    ModelGraph g;
    g.name = "tiny";
    g.in_c = 3;
    g.in_h = 32;
    g.in_w = 32;
    g.layers.push_back(make_conv_layer(ConvParams(3, 8, 3, 3, 1, 1), rng));
    g.layers.push_back(ReluLayer{});
    g.layers.push_back(GlobalAvgPoolLayer{});
    g.layers.push_back(LinearLayer{8, 10, tensor_ref(random_tensor({10, 8, 1, 1}, rng)),
                                   bias_ref(random_bias(10, rng))});
    const std::vector<Dims> shapes = trace_shapes(g);
    CHECK(shapes[0] == Dims{1, 8, 32, 32});
    CHECK(shapes[1] == Dims{1, 8, 32, 32});
    CHECK(shapes[2] == Dims{1, 8, 1, 1});
    CHECK(shapes[3] == Dims{1, 10, 1, 1});
    CHECK_NOTHROW(validate(g));
}

TEST_CASE("linear feature mismatch names the offending layer") {
    Rng rng(41);
    ModelGraph g;
    g.in_c = 3;
    g.in_h = 8;
    g.in_w = 8;
    g.layers.push_back(make_conv_layer(ConvParams(3, 4, 3, 3, 1, 1), rng));
    g.layers.push_back(FlattenLayer{});
    g.layers.push_back(LinearLayer{99, 10, tensor_ref(random_tensor({10, 99, 1, 1}, rng)),
                                   bias_ref(random_bias(10, rng))});
    try {
        validate(g);
        FAIL("expected ShapeCompositionError");
    } catch (const ShapeCompositionError& e) {
        CHECK(e.layer_index() == 2);
    }
}

TEST_CASE("fcnn structural rules are enforced") {
    Rng rng(42);
    ModelGraph g;
    g.in_c = 2;
    g.in_h = 8;
    g.in_w = 8;
    g.layers.push_back(make_conv_layer(ConvParams(2, 2, 3, 3, 1, 1), rng));
    g.layers.push_back(ThresholdAoiLayer{0.0});
    g.layers.push_back(make_conv_layer(ConvParams(2, 2, 3, 3, 1, 1), rng));
    CHECK_THROWS_AS(validate(g), ShapeCompositionError);  // plain conv after threshold

    const ConvLayer conv = make_conv_layer(ConvParams(2, 2, 3, 3, 1, 1), rng);
    g.layers[2] = FocusedConvLayer{conv.params, conv.weights, conv.bias, BlockConfig(4), 0.0f};
    CHECK_NOTHROW(validate(g));

    g.layers.push_back(ThresholdAoiLayer{1.0});
    CHECK_THROWS_AS(validate(g), ShapeCompositionError);  // two thresholds
    g.layers.pop_back();

    std::swap(g.layers[1], g.layers[2]);  // focused conv before the threshold
    CHECK_THROWS_AS(validate(g), ShapeCompositionError);
}

TEST_CASE("plain forward has no AoI and rejects bad input dims") {
    Rng rng(43);
    const ModelGraph g = random_conv_stack(2, 3, 10, 10, 5, rng);
    const Tensor x = random_tensor({1, 3, 10, 10}, rng);
    const ForwardResult res = forward(g, x);
    CHECK_FALSE(res.aoi.has_value());
    CHECK(res.output.dims() == Dims{1, 5, 1, 1});

    CHECK_THROWS_AS(forward(g, random_tensor({1, 3, 9, 10}, rng)), ShapeError);
}

TEST_CASE("forward captures intermediate activations") {
    Rng rng(44);
    const ModelGraph g = random_conv_stack(2, 2, 6, 6, 3, rng);
    const Tensor x = random_tensor({1, 2, 6, 6}, rng);

    ForwardOptions opts;
    opts.capture_after = 0;
    CHECK(same_bits(*forward(g, x, opts).captured, x));

    opts.capture_after = 1;
    opts.collect_activations = true;
    const ForwardResult res = forward(g, x, opts);
    CHECK(same_bits(*res.captured, res.activations[0]));
    CHECK(res.activations.size() == g.layers.size());

    opts.capture_after = g.layers.size() + 1;
    CHECK_THROWS_AS(forward(g, x, opts), GraphError);
}

TEST_CASE("threshold layer passes data through and stores the mask") {
    Rng rng(45);
    ModelGraph dense = random_conv_stack(2, 2, 8, 8, 3, rng);
    const ModelGraph fcnn =
        convert_to_fcnn(dense, 2, -std::numeric_limits<double>::infinity(), BlockConfig(4),
                        0.0f);
    const Tensor x = random_tensor({1, 2, 8, 8}, rng);

    ForwardOptions before;
    before.capture_after = 2;
    ForwardOptions after;
    after.capture_after = 3;  // threshold sits at index 2, capture its output
    const Tensor in_thr = *forward(fcnn, x, before).captured;
    const Tensor out_thr = *forward(fcnn, x, after).captured;
    CHECK(same_bits(in_thr, out_thr));

    const ForwardResult res = forward(fcnn, x);
    REQUIRE(res.aoi.has_value());
    CHECK(res.aoi->fraction() == 1.0);
}

TEST_CASE("tau below every activation reproduces the dense model bitwise") {
    Rng rng(46);
    const ModelGraph dense = random_conv_stack(3, 3, 12, 12, 4, rng);
    const ModelGraph fcnn = convert_to_fcnn(
        dense, 2, -std::numeric_limits<double>::infinity(), BlockConfig(8), 0.0f);
    for (int iter = 0; iter < 50; ++iter) {
        const Tensor x = random_tensor({1, 3, 12, 12}, rng);
        const Tensor a = forward(dense, x).output;
        const Tensor b = forward(fcnn, x).output;
        REQUIRE(same_bits(a, b));
    }
}

TEST_CASE("tau above every activation matches the silenced-conv oracle") {
    Rng rng(47);
    const ModelGraph dense = random_conv_stack(3, 2, 10, 10, 4, rng);
    const std::size_t k = 2;
    const ModelGraph fcnn = convert_to_fcnn(
        dense, k, std::numeric_limits<double>::infinity(), BlockConfig(4), 0.0f);
    const ModelGraph silenced = silence_convs_after(dense, k);
    for (int iter = 0; iter < 10; ++iter) {
        const Tensor x = random_tensor({1, 2, 10, 10}, rng);
        const ForwardResult focused = forward(fcnn, x);
        REQUIRE(focused.aoi.has_value());
        CHECK(focused.aoi->fraction() == 0.0);
        CHECK(same_bits(focused.output, forward(silenced, x).output));
    }
}

TEST_CASE("conversion structure: threshold inserted, later convs focused") {
    Rng rng(48);
    ModelGraph g;
    g.in_c = 2;
    g.in_h = 16;
    g.in_w = 16;
    for (int i = 0; i < 4; ++i) {
        g.layers.push_back(make_conv_layer(ConvParams(2, 2, 3, 3, 1, 1), rng));
    }
    const ModelGraph fcnn = convert_to_fcnn(g, 1, 0.5, BlockConfig(4), 0.0f);
    CHECK(fcnn.layers.size() == g.layers.size() + 1);
    CHECK(std::holds_alternative<ConvLayer>(fcnn.layers[0]));
    REQUIRE(std::holds_alternative<ThresholdAoiLayer>(fcnn.layers[1]));
    CHECK(std::get<ThresholdAoiLayer>(fcnn.layers[1]).tau == 0.5);
    int focused = 0;
    for (std::size_t i = 2; i < fcnn.layers.size(); ++i) {
        if (std::holds_alternative<FocusedConvLayer>(fcnn.layers[i])) {
            ++focused;
        }
    }
    CHECK(focused == 3);

    // original graph untouched
    CHECK(g.layers.size() == 4);
    for (const LayerSpec& layer : g.layers) {
        CHECK(std::holds_alternative<ConvLayer>(layer));
    }
}

TEST_CASE("conversion preserves weights bitwise") {
    Rng rng(49);
    const ModelGraph g = random_conv_stack(3, 2, 8, 8, 3, rng);
    const ModelGraph fcnn = convert_to_fcnn(g, 1, 0.0, BlockConfig(8), 0.0f);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        if (const auto* conv = std::get_if<ConvLayer>(&g.layers[i])) {
            // layers after the insertion shift by one
            const LayerSpec& counterpart = fcnn.layers[i >= 1 ? i + 1 : i];
            if (const auto* fconv = std::get_if<FocusedConvLayer>(&counterpart)) {
                CHECK(same_bits(conv->weights.value, fconv->weights.value));
                CHECK(same_bits(conv->bias.value, fconv->bias.value));
                ++checked;
            }
        }
    }
    CHECK(checked == 2);
}

TEST_CASE("conversion rejects invalid split points") {
    Rng rng(50);
    const ModelGraph g = random_conv_stack(2, 2, 8, 8, 3, rng);
    // conv layers sit at indices 0 and 2; after k=3 only head layers remain
    CHECK_THROWS_AS(convert_to_fcnn(g, 3, 0.0, BlockConfig(4), 0.0f), GraphError);
    CHECK_THROWS_AS(convert_to_fcnn(g, 0, 0.0, BlockConfig(4), 0.0f), GraphError);
    CHECK_THROWS_AS(convert_to_fcnn(g, g.layers.size(), 0.0, BlockConfig(4), 0.0f),
                    GraphError);

    const ModelGraph fcnn = convert_to_fcnn(g, 1, 0.0, BlockConfig(4), 0.0f);
    CHECK_THROWS_AS(convert_to_fcnn(fcnn, 1, 0.0, BlockConfig(4), 0.0f), GraphError);
}

TEST_CASE("dense conv MAC formula") {
    Rng rng(51);
    ModelGraph g;
    g.in_c = 3;
    g.in_h = 32;
    g.in_w = 32;
    g.layers.push_back(make_conv_layer(ConvParams(3, 8, 3, 3, 1, 1), rng));
    const MacReport report = count_macs(g);
    REQUIRE(report.entries.size() == 1);
    CHECK(report.entries[0].dense == 221184);  // 8*32*32*3*3*3
    CHECK(report.total_dense == 221184);
    CHECK(report.total_focused == 221184);
}

TEST_CASE("full-AoI report equals dense totals") {
    Rng rng(52);
    const ModelGraph g = random_conv_stack(3, 3, 16, 16, 4, rng);
    const ModelGraph fcnn = convert_to_fcnn(g, 1, 0.0, BlockConfig(8), 0.0f);
    const MacReport report = count_macs(fcnn);
    CHECK(report.total_focused == report.total_dense);
}

TEST_CASE("half-fraction run-aligned masks halve focused MACs exactly") {
    Rng rng(53);
    const ModelGraph g = random_conv_stack(3, 3, 8, 8, 4, rng);  // 8x8 grids, 64 slots
    const ModelGraph fcnn = convert_to_fcnn(g, 1, 0.0, BlockConfig(8), 0.0f);
    const MacReport report = count_macs(fcnn, 0.5);
    for (const MacEntry& e : report.entries) {
        if (std::holds_alternative<FocusedConvLayer>(fcnn.layers[e.layer])) {
            CHECK(e.focused * 2 == e.dense);
        }
    }
}

TEST_CASE("forward MAC accounting matches the static report") {
    Rng rng(54);
    const ModelGraph g = random_conv_stack(3, 3, 12, 12, 4, rng);
    const Tensor x = random_tensor({1, 3, 12, 12}, rng);

    const ForwardResult dense_run = forward(g, x);
    const MacReport static_dense = count_macs(g);
    CHECK(dense_run.macs.total_dense == static_dense.total_dense);
    CHECK(dense_run.macs.total_focused == static_dense.total_focused);

    const ModelGraph fcnn = convert_to_fcnn(g, 2, 0.1, BlockConfig(4), 0.0f);
    const ForwardResult run = forward(fcnn, x);
    REQUIRE(run.aoi.has_value());
    const MacReport predicted = count_macs(fcnn, *run.aoi);
    CHECK(run.macs.total_focused == predicted.total_focused);
    CHECK(run.macs.total_dense == predicted.total_dense);

    std::uint64_t sum_dense = 0;
    std::uint64_t sum_focused = 0;
    for (const MacEntry& e : run.macs.entries) {
        sum_dense += e.dense;
        sum_focused += e.focused;
    }
    CHECK(sum_dense == run.macs.total_dense);
    CHECK(sum_focused == run.macs.total_focused);
}

TEST_CASE("downsample points flag shrinking layers") {
    Rng rng(55);
    CHECK(downsample_points(random_conv_stack(3, 2, 8, 8, 3, rng)).empty() == false);
    // conv stack ends with gap, which shrinks; strip the head to test convs only
    ModelGraph stack;
    stack.in_c = 2;
    stack.in_h = 8;
    stack.in_w = 8;
    for (int i = 0; i < 3; ++i) {
        stack.layers.push_back(make_conv_layer(ConvParams(2, 2, 3, 3, 1, 1), rng));
    }
    CHECK(downsample_points(stack).empty());

    stack.layers.push_back(make_conv_layer(ConvParams(2, 2, 3, 3, 2, 1), rng));
    const auto points = downsample_points(stack);
    REQUIRE(points.size() == 1);
    CHECK(points[0] == 3);
}

TEST_CASE("vgg-like block reports its pools") {
    Rng rng(56);
    ModelGraph g;
    g.in_c = 2;
    g.in_h = 16;
    g.in_w = 16;
    g.layers.push_back(make_conv_layer(ConvParams(2, 4, 3, 3, 1, 1), rng));
    g.layers.push_back(make_conv_layer(ConvParams(4, 4, 3, 3, 1, 1), rng));
    g.layers.push_back(MaxPoolLayer{2, 2});
    g.layers.push_back(make_conv_layer(ConvParams(4, 8, 3, 3, 1, 1), rng));
    g.layers.push_back(MaxPoolLayer{2, 2});
    CHECK(downsample_points(g) == std::vector<std::size_t>{2, 4});
}

TEST_CASE("affine and maxpool layers compute as specified") {
    ModelGraph g;
    g.in_c = 2;
    g.in_h = 2;
    g.in_w = 2;
    g.layers.push_back(AffineLayer{tensor_ref(Tensor({1, 2, 1, 1}, {2.0f, 0.5f})),
                                   tensor_ref(Tensor({1, 2, 1, 1}, {1.0f, -1.0f}))});
    const Tensor x({1, 2, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f, 4.0f, 6.0f, 8.0f, 10.0f});
    const Tensor out = forward(g, x).output;
    CHECK(out.at(0, 0, 0, 0) == 3.0f);
    CHECK(out.at(0, 0, 1, 1) == 9.0f);
    CHECK(out.at(0, 1, 0, 0) == 1.0f);
    CHECK(out.at(0, 1, 1, 1) == 4.0f);

    ModelGraph pool;
    pool.in_c = 1;
    pool.in_h = 4;
    pool.in_w = 4;
    pool.layers.push_back(MaxPoolLayer{2, 2});
    std::vector<float> vals(16);
    for (std::size_t i = 0; i < 16; ++i) {
        vals[i] = static_cast<float>(i);
    }
    const Tensor pooled = forward(pool, Tensor({1, 1, 4, 4}, vals)).output;
    CHECK(pooled.dims() == Dims{1, 1, 2, 2});
    CHECK(pooled.at(0, 0, 0, 0) == 5.0f);
    CHECK(pooled.at(0, 0, 1, 1) == 15.0f);
}
