#include "focal/focused_conv.hpp"

#include <string>
#include <vector>

#include "focal/errors.hpp"

namespace focal {

Tensor focused_conv(const Tensor& x, const Tensor& weights, std::span<const float> bias,
                    const ConvParams& p, const AoiMask& m, BlockConfig b, float fill,
                    FocusedConvStats* stats) {
    const Dims& wd = weights.dims();
    if (wd.n != p.out_channels || wd.c != p.in_channels || wd.h != p.kernel_h ||
        wd.w != p.kernel_w) {
        throw ShapeError("weight dims do not match conv params");
    }
    if (bias.size() != p.out_channels) {
        throw ShapeError("bias length must equal out_channels");
    }
    if (x.dims().n != 1) {
        throw ShapeError("focused_conv expects batch 1");
    }
    if (x.dims().c != p.in_channels) {
        throw ShapeError("channel mismatch: input has " + std::to_string(x.dims().c) +
                         " channels, conv expects " + std::to_string(p.in_channels));
    }
    const std::size_t oh = p.out_h(x.dims().h);
    const std::size_t ow = p.out_w(x.dims().w);
    if (m.h() != oh || m.w() != ow) {
        throw ShapeError("mask shape mismatch: mask is " + std::to_string(m.h()) + "x" +
                         std::to_string(m.w()) + ", output is " + std::to_string(oh) + "x" +
                         std::to_string(ow));
    }

    Tensor out(1, p.out_channels, oh, ow);
    std::fill(out.values().begin(), out.values().end(), fill);

    FocusedConvStats local;
    const std::size_t cols = p.patch_size();
    // Reduced patch matrix for one run at a time: gather the whole run, then
    // multiply. Runs write disjoint output slices.
    std::vector<float> block(b.block_size * cols);
    for (const Run& run : selected_runs(m, b)) {
        for (std::size_t s = 0; s < run.length; ++s) {
            const std::size_t pos = run.start + s;
            fill_patch_row(x, p, pos / ow, pos % ow, block.data() + s * cols);
        }
        local.selected_slots += run.length;
        for (std::size_t s = 0; s < run.length; ++s) {
            const std::size_t pos = run.start + s;
            const float* row = block.data() + s * cols;
            for (std::size_t o = 0; o < p.out_channels; ++o) {
                const float* wrow = weights.data() + o * cols;
                out.at(0, o, pos / ow, pos % ow) = bias[o] + detail::dot_f32(row, wrow, cols);
                local.macs += cols;
            }
        }
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return out;
}

FocusedConvStats count_focused_macs(const ConvParams& p, const AoiMask& m, BlockConfig b) {
    FocusedConvStats stats;
    for (const Run& run : selected_runs(m, b)) {
        stats.selected_slots += run.length;
    }
    stats.macs = stats.selected_slots * p.out_channels * p.in_channels * p.kernel_h *
                 p.kernel_w;
    return stats;
}

}  // namespace focal
