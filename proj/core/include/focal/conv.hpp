#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "focal/tensor.hpp"

namespace focal {

/// Geometry of a 2-D convolution.
struct ConvParams {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;

    ConvParams() = default;
    ConvParams(std::size_t in_c, std::size_t out_c, std::size_t kh, std::size_t kw,
               std::size_t stride = 1, std::size_t padding = 0);

    /// Output height for an input of height h. Throws ShapeError when the
    /// padded input is smaller than the kernel.
    std::size_t out_h(std::size_t h) const;
    std::size_t out_w(std::size_t w) const;

    /// Patch length: in_channels * kernel_h * kernel_w.
    std::size_t patch_size() const { return in_channels * kernel_h * kernel_w; }

    bool operator==(const ConvParams&) const = default;
};

/// im2col output: one row per output spatial position, in output raster
/// order. Each row is the vectorized input window, channel-major, then
/// kernel row, then kernel column.
struct PatchMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    std::span<const float> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
    float* row_ptr(std::size_t r) { return data.data() + r * cols; }
};

/// Writes the vectorized input window for output position (oy, ox) into
/// `row`, which must hold p.patch_size() floats. Out-of-bounds taps are 0.
void fill_patch_row(const Tensor& x, const ConvParams& p, std::size_t oy, std::size_t ox,
                    float* row);

/// Segments x (batch 1) into kernel-sized patches.
PatchMatrix im2col(const Tensor& x, const ConvParams& p);

/// Reference GEMM convolution. out[0,o,i,j] = bias[o] + <patch(i,j), weight(o)>
/// with the dot product accumulated in ascending index order, so results are
/// bit-reproducible. Weights are (out_channels, in_channels, kh, kw).
Tensor dense_conv(const Tensor& x, const Tensor& weights, std::span<const float> bias,
                  const ConvParams& p);

/// Dense multiply-accumulate count for one conv layer.
std::uint64_t dense_conv_macs(const ConvParams& p, std::size_t out_h, std::size_t out_w);

namespace detail {

// Fixed ascending-order dot product. Every conv path funnels through this so
// per-element results stay bit-identical between dense and focused kernels.
inline float dot_f32(const float* a, const float* b, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

}  // namespace detail

}  // namespace focal
