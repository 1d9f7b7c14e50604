#include "focal/zoo.hpp"

#include <array>
#include <cmath>
#include <random>

namespace focal {

namespace {

struct Group {
    std::size_t begin;
    std::size_t end;  // half-open
    std::size_t size() const { return end - begin; }
};

// R/G/B/mix channel groups for a given width (5+5+5+1 at 16 channels).
std::array<Group, 4> groups_for(std::size_t channels) {
    const std::size_t third = channels * 5 / 16;
    return {Group{0, third}, Group{third, 2 * third}, Group{2 * third, 3 * third},
            Group{3 * third, channels}};
}

TensorRef zero_bias(std::size_t n) {
    return {Tensor(1, n, 1, 1), {}};
}

// Uniform averaging conv mapping each input group onto the matching output
// group, preserving per-group mean brightness.
ConvLayer group_avg_conv(std::size_t in_channels, std::size_t out_channels,
                         std::size_t stride) {
    const ConvParams p(in_channels, out_channels, 3, 3, stride, 1);
    Tensor weights(out_channels, in_channels, 3, 3);
    const auto in_groups = groups_for(in_channels);
    const auto out_groups = groups_for(out_channels);
    for (std::size_t gi = 0; gi < 4; ++gi) {
        const float scale = 1.0f / (static_cast<float>(in_groups[gi].size()) * 9.0f);
        for (std::size_t o = out_groups[gi].begin; o < out_groups[gi].end; ++o) {
            for (std::size_t c = in_groups[gi].begin; c < in_groups[gi].end; ++c) {
                for (std::size_t ky = 0; ky < 3; ++ky) {
                    for (std::size_t kx = 0; kx < 3; ++kx) {
                        weights.at(o, c, ky, kx) = scale;
                    }
                }
            }
        }
    }
    return ConvLayer{p, {std::move(weights), {}}, zero_bias(out_channels)};
}

// Input channel i feeds output group i; the mix group averages all three.
ConvLayer entry_conv() {
    const ConvParams p(3, 16, 3, 3, 1, 1);
    Tensor weights(16, 3, 3, 3);
    const auto out_groups = groups_for(16);
    for (std::size_t gi = 0; gi < 3; ++gi) {
        for (std::size_t o = out_groups[gi].begin; o < out_groups[gi].end; ++o) {
            for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    weights.at(o, gi, ky, kx) = 1.0f / 9.0f;
                }
            }
        }
    }
    for (std::size_t o = out_groups[3].begin; o < out_groups[3].end; ++o) {
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    weights.at(o, c, ky, kx) = 1.0f / 27.0f;
                }
            }
        }
    }
    return ConvLayer{p, {std::move(weights), {}}, zero_bias(16)};
}

// Zero-bias nearest-direction head: classes 0..2 match one color group,
// class 3 matches all three equally. Zero bias keeps the argmax invariant
// under the uniform attenuation the averaging stack applies.
LinearLayer head_linear() {
    const std::size_t in = 64;
    Tensor weights(4, in, 1, 1);
    const auto groups = groups_for(in);
    for (std::size_t cls = 0; cls < 3; ++cls) {
        for (std::size_t gi = 0; gi < 3; ++gi) {
            const float v = gi == cls ? 1.0f : -0.5f;
            for (std::size_t c = groups[gi].begin; c < groups[gi].end; ++c) {
                weights.at(cls, c, 0, 0) = v;
            }
        }
    }
    const float inv_sqrt3 = 1.0f / std::sqrt(3.0f);
    for (std::size_t gi = 0; gi < 3; ++gi) {
        for (std::size_t c = groups[gi].begin; c < groups[gi].end; ++c) {
            weights.at(3, c, 0, 0) = inv_sqrt3;
        }
    }
    return LinearLayer{in, 4, {std::move(weights), {}}, zero_bias(4)};
}

}  // namespace

ModelGraph desk_cnn() {
    ModelGraph g;
    g.name = "desk6";
    g.in_c = 3;
    g.in_h = 64;
    g.in_w = 64;
    g.layers.push_back(entry_conv());
    g.layers.push_back(ReluLayer{});
    g.layers.push_back(group_avg_conv(16, 16, 2));  // first downsample, 64 -> 32
    g.layers.push_back(ReluLayer{});
    g.layers.push_back(group_avg_conv(16, 32, 1));
    g.layers.push_back(ReluLayer{});
    g.layers.push_back(group_avg_conv(32, 32, 1));
    g.layers.push_back(ReluLayer{});
    g.layers.push_back(group_avg_conv(32, 64, 1));
    g.layers.push_back(ReluLayer{});
    g.layers.push_back(group_avg_conv(64, 64, 1));
    g.layers.push_back(ReluLayer{});
    g.layers.push_back(GlobalAvgPoolLayer{});
    g.layers.push_back(FlattenLayer{});
    g.layers.push_back(head_linear());
    return g;
}

Dataset blob_dataset(std::size_t per_class, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::size_t> center(14, 49);
    std::uniform_real_distribution<float> noise(0.0f, 0.001f);
    constexpr std::size_t kRadius = 10;
    constexpr float kIntensity = 2.0f;

    Dataset ds;
    for (std::size_t cls = 0; cls < 4; ++cls) {
        for (std::size_t i = 0; i < per_class; ++i) {
            Tensor t(1, 3, 64, 64);
            for (float& v : t.values()) {
                v = noise(rng);
            }
            const std::size_t cy = center(rng);
            const std::size_t cx = center(rng);
            for (std::size_t y = 0; y < 64; ++y) {
                for (std::size_t x = 0; x < 64; ++x) {
                    const double dy = static_cast<double>(y) - static_cast<double>(cy);
                    const double dx = static_cast<double>(x) - static_cast<double>(cx);
                    if (dy * dy + dx * dx > kRadius * kRadius) {
                        continue;
                    }
                    if (cls < 3) {
                        t.at(0, cls, y, x) += kIntensity;
                    } else {
                        for (std::size_t c = 0; c < 3; ++c) {
                            t.at(0, c, y, x) += kIntensity;
                        }
                    }
                }
            }
            ds.samples.push_back({std::move(t), static_cast<int>(cls), {}});
        }
    }
    return ds;
}

}  // namespace focal
