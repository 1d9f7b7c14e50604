#include "focal/conv.hpp"

#include <cstdint>
#include <string>

#include "focal/errors.hpp"

namespace focal {

ConvParams::ConvParams(std::size_t in_c, std::size_t out_c, std::size_t kh, std::size_t kw,
                       std::size_t stride, std::size_t padding)
    : in_channels(in_c),
      out_channels(out_c),
      kernel_h(kh),
      kernel_w(kw),
      stride(stride),
      padding(padding) {
    if (in_c == 0 || out_c == 0 || kh == 0 || kw == 0 || stride == 0) {
        throw ShapeError("conv params must have positive channels, kernel, stride");
    }
}

std::size_t ConvParams::out_h(std::size_t h) const {
    if (h + 2 * padding < kernel_h) {
        throw ShapeError("conv output height would be empty: input h=" + std::to_string(h));
    }
    return (h + 2 * padding - kernel_h) / stride + 1;
}

std::size_t ConvParams::out_w(std::size_t w) const {
    if (w + 2 * padding < kernel_w) {
        throw ShapeError("conv output width would be empty: input w=" + std::to_string(w));
    }
    return (w + 2 * padding - kernel_w) / stride + 1;
}

void fill_patch_row(const Tensor& x, const ConvParams& p, std::size_t oy, std::size_t ox,
                    float* row) {
    const Dims& d = x.dims();
    // Top-left tap of the window in unpadded coordinates; may be negative.
    const std::ptrdiff_t base_y =
        static_cast<std::ptrdiff_t>(oy * p.stride) - static_cast<std::ptrdiff_t>(p.padding);
    const std::ptrdiff_t base_x =
        static_cast<std::ptrdiff_t>(ox * p.stride) - static_cast<std::ptrdiff_t>(p.padding);
    std::size_t idx = 0;
    for (std::size_t c = 0; c < p.in_channels; ++c) {
        for (std::size_t ky = 0; ky < p.kernel_h; ++ky) {
            const std::ptrdiff_t y = base_y + static_cast<std::ptrdiff_t>(ky);
            for (std::size_t kx = 0; kx < p.kernel_w; ++kx, ++idx) {
                const std::ptrdiff_t xx = base_x + static_cast<std::ptrdiff_t>(kx);
                if (y >= 0 && xx >= 0 && y < static_cast<std::ptrdiff_t>(d.h) &&
                    xx < static_cast<std::ptrdiff_t>(d.w)) {
                    row[idx] = x.at(0, c, static_cast<std::size_t>(y),
                                    static_cast<std::size_t>(xx));
                } else {
                    row[idx] = 0.0f;
                }
            }
        }
    }
}

PatchMatrix im2col(const Tensor& x, const ConvParams& p) {
    const Dims& d = x.dims();
    if (d.n != 1) {
        throw ShapeError("im2col expects batch 1, got n=" + std::to_string(d.n));
    }
    if (d.c != p.in_channels) {
        throw ShapeError("channel mismatch: input has " + std::to_string(d.c) +
                         " channels, conv expects " + std::to_string(p.in_channels));
    }
    const std::size_t oh = p.out_h(d.h);
    const std::size_t ow = p.out_w(d.w);

    PatchMatrix m;
    m.rows = oh * ow;
    m.cols = p.patch_size();
    m.data.resize(m.rows * m.cols);
    for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
            fill_patch_row(x, p, oy, ox, m.row_ptr(oy * ow + ox));
        }
    }
    return m;
}

Tensor dense_conv(const Tensor& x, const Tensor& weights, std::span<const float> bias,
                  const ConvParams& p) {
    const Dims& wd = weights.dims();
    if (wd.n != p.out_channels || wd.c != p.in_channels || wd.h != p.kernel_h ||
        wd.w != p.kernel_w) {
        throw ShapeError("weight dims do not match conv params");
    }
    if (bias.size() != p.out_channels) {
        throw ShapeError("bias length must equal out_channels");
    }
    const PatchMatrix patches = im2col(x, p);
    const std::size_t oh = p.out_h(x.dims().h);
    const std::size_t ow = p.out_w(x.dims().w);

    Tensor out(1, p.out_channels, oh, ow);
    const std::size_t cols = patches.cols;
    for (std::size_t r = 0; r < patches.rows; ++r) {
        const float* row = patches.data.data() + r * cols;
        const std::size_t oy = r / ow;
        const std::size_t ox = r % ow;
        for (std::size_t o = 0; o < p.out_channels; ++o) {
            const float* wrow = weights.data() + o * cols;
            out.at(0, o, oy, ox) = bias[o] + detail::dot_f32(row, wrow, cols);
        }
    }
    return out;
}

std::uint64_t dense_conv_macs(const ConvParams& p, std::size_t out_h, std::size_t out_w) {
    return static_cast<std::uint64_t>(out_h) * out_w * p.out_channels * p.in_channels *
           p.kernel_h * p.kernel_w;
}

}  // namespace focal
