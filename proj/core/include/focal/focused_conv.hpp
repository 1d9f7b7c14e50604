#pragma once

#include <cstdint>
#include <span>

#include "focal/aoi.hpp"
#include "focal/conv.hpp"
#include "focal/tensor.hpp"

namespace focal {

/// Work actually performed by a focused convolution call.
struct FocusedConvStats {
    std::uint64_t selected_slots = 0;  // output positions gathered, incl. block padding
    std::uint64_t macs = 0;            // multiply-accumulates executed (bias adds excluded)
};

/// GEMM convolution restricted to the Area of Interest. The mask is rounded
/// up to whole blocks (align_mask); every output position of a selected run
/// is computed exactly as dense_conv would, other positions are set to
/// `fill` for all channels. Only the selected runs' patch rows are gathered.
///
/// The mask must be sized to this layer's output grid.
Tensor focused_conv(const Tensor& x, const Tensor& weights, std::span<const float> bias,
                    const ConvParams& p, const AoiMask& m, BlockConfig b, float fill,
                    FocusedConvStats* stats = nullptr);

/// Predicted gather size and MAC count for a focused convolution, from run
/// enumeration alone: slots = total length of runs touching the AoI,
/// macs = slots * out_channels * in_channels * kernel_h * kernel_w.
FocusedConvStats count_focused_macs(const ConvParams& p, const AoiMask& m, BlockConfig b);

}  // namespace focal
