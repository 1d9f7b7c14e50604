#pragma once

#include <cstddef>
#include <vector>

namespace focal {

/// Dimensions of a rank-4 tensor, (n, c, h, w).
struct Dims {
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    std::size_t count() const { return n * c * h * w; }
    bool operator==(const Dims&) const = default;
};

/// Rank-4 float32 tensor, row-major with w fastest.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given dims. All dims must be positive.
    Tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w);
    explicit Tensor(const Dims& dims) : Tensor(dims.n, dims.c, dims.h, dims.w) {}

    /// Tensor adopting an existing value buffer; size must equal dims.count().
    Tensor(const Dims& dims, std::vector<float> values);

    const Dims& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    float& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
        return data_[((n * dims_.c + c) * dims_.h + h) * dims_.w + w];
    }
    float at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return data_[((n * dims_.c + c) * dims_.h + h) * dims_.w + w];
    }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    /// Same buffer under new dims; element count must be unchanged.
    Tensor reshaped(const Dims& dims) const;

    bool operator==(const Tensor&) const = default;

private:
    Dims dims_;
    std::vector<float> data_;
};

/// Sums x over the channel axis: (n,c,h,w) -> (n,1,h,w). Accumulation runs
/// in ascending channel order so results are bit-reproducible.
Tensor channel_sum(const Tensor& x);

/// Zero-pads the spatial border by `pad` on every side.
Tensor pad2d(const Tensor& x, std::size_t pad);

}  // namespace focal
