#include "focal/tensor.hpp"

#include <stdexcept>

#include "focal/errors.hpp"

namespace focal {

Tensor::Tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w)
    : dims_{n, c, h, w} {
    if (n == 0 || c == 0 || h == 0 || w == 0) {
        throw ShapeError("tensor dims must be positive");
    }
    data_.assign(dims_.count(), 0.0f);
}

Tensor::Tensor(const Dims& dims, std::vector<float> values)
    : dims_(dims), data_(std::move(values)) {
    if (dims_.n == 0 || dims_.c == 0 || dims_.h == 0 || dims_.w == 0) {
        throw ShapeError("tensor dims must be positive");
    }
    if (data_.size() != dims_.count()) {
        throw ShapeError("tensor value count does not match dims");
    }
}

Tensor Tensor::reshaped(const Dims& dims) const {
    if (dims.count() != dims_.count()) {
        throw ShapeError("reshape must preserve element count");
    }
    return Tensor(dims, data_);
}

Tensor channel_sum(const Tensor& x) {
    const Dims& d = x.dims();
    Tensor out(d.n, 1, d.h, d.w);
    for (std::size_t n = 0; n < d.n; ++n) {
        for (std::size_t i = 0; i < d.h; ++i) {
            for (std::size_t j = 0; j < d.w; ++j) {
                float acc = 0.0f;
                for (std::size_t c = 0; c < d.c; ++c) {
                    acc += x.at(n, c, i, j);
                }
                out.at(n, 0, i, j) = acc;
            }
        }
    }
    return out;
}

Tensor pad2d(const Tensor& x, std::size_t pad) {
    if (pad == 0) {
        return x;
    }
    const Dims& d = x.dims();
    Tensor out(d.n, d.c, d.h + 2 * pad, d.w + 2 * pad);
    for (std::size_t n = 0; n < d.n; ++n) {
        for (std::size_t c = 0; c < d.c; ++c) {
            for (std::size_t i = 0; i < d.h; ++i) {
                for (std::size_t j = 0; j < d.w; ++j) {
                    out.at(n, c, i + pad, j + pad) = x.at(n, c, i, j);
                }
            }
        }
    }
    return out;
}

}  // namespace focal
