#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "focal/tensor.hpp"

namespace focal {

/// Number of consecutive output positions (row-major) processed as one
/// parallel unit. Matches the machine's vector block; 8 covers two 128-bit
/// registers of f32.
struct BlockConfig {
    std::size_t block_size = 8;

    BlockConfig() = default;
    explicit BlockConfig(std::size_t size);
};

/// Binary spatial grid marking relevant output positions.
class AoiMask {
public:
    AoiMask() = default;
    AoiMask(std::size_t h, std::size_t w, bool value = false);

    std::size_t h() const { return h_; }
    std::size_t w() const { return w_; }
    std::size_t size() const { return bits_.size(); }

    bool at(std::size_t i, std::size_t j) const { return bits_[i * w_ + j] != 0; }
    bool at_flat(std::size_t idx) const { return bits_[idx] != 0; }
    void set(std::size_t i, std::size_t j, bool v) { bits_[i * w_ + j] = v ? 1 : 0; }
    void set_flat(std::size_t idx, bool v) { bits_[idx] = v ? 1 : 0; }

    std::size_t count_true() const;
    double fraction() const;

    bool operator==(const AoiMask&) const = default;

private:
    std::size_t h_ = 0;
    std::size_t w_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// One contiguous stretch of block_size output positions (the final run of a
/// grid may be shorter).
struct Run {
    std::size_t start = 0;
    std::size_t length = 0;
};

/// mask[i,j] = x_sum[0,0,i,j] >= tau. The comparison is inclusive so that
/// tau equal to the minimum activation keeps the full grid relevant.
AoiMask threshold_aoi(const Tensor& x_sum, double tau);

/// Nearest-neighbor resample to (out_h, out_w).
AoiMask resize_mask(const AoiMask& m, std::size_t out_h, std::size_t out_w);

/// Runs of b.block_size positions over the row-major flattening of a
/// (h x w) grid; the final run may be short.
std::vector<Run> block_runs(std::size_t h, std::size_t w, BlockConfig b);

/// Runs that contain at least one relevant position of m.
std::vector<Run> selected_runs(const AoiMask& m, BlockConfig b);

/// Rounds the mask up to whole blocks: every position of a run that touches
/// the AoI becomes relevant. Never removes relevant positions.
AoiMask align_mask(const AoiMask& m, BlockConfig b);

/// Writes the mask as binary PGM (P5, maxval 255): relevant = 255,
/// irrelevant = 0.
void mask_export_pgm(const AoiMask& m, const std::filesystem::path& path);

}  // namespace focal
