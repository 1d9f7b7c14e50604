#include "focal/aoi.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "focal/errors.hpp"

namespace focal {

BlockConfig::BlockConfig(std::size_t size) : block_size(size) {
    if (size == 0) {
        throw ShapeError("block_size must be at least 1");
    }
}

AoiMask::AoiMask(std::size_t h, std::size_t w, bool value)
    : h_(h), w_(w), bits_(h * w, value ? 1 : 0) {
    if (h == 0 || w == 0) {
        throw ShapeError("mask dims must be positive");
    }
}

std::size_t AoiMask::count_true() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double AoiMask::fraction() const {
    return bits_.empty() ? 0.0 : static_cast<double>(count_true()) / bits_.size();
}

AoiMask threshold_aoi(const Tensor& x_sum, double tau) {
    const Dims& d = x_sum.dims();
    if (d.n != 1 || d.c != 1) {
        throw ShapeError("threshold_aoi expects a (1,1,h,w) channel sum");
    }
    AoiMask m(d.h, d.w);
    for (std::size_t i = 0; i < d.h; ++i) {
        for (std::size_t j = 0; j < d.w; ++j) {
            m.set(i, j, static_cast<double>(x_sum.at(0, 0, i, j)) >= tau);
        }
    }
    return m;
}

AoiMask resize_mask(const AoiMask& m, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) {
        throw ShapeError("resize_mask target dims must be positive");
    }
    AoiMask out(out_h, out_w);
    for (std::size_t i = 0; i < out_h; ++i) {
        const std::size_t src_i = i * m.h() / out_h;
        for (std::size_t j = 0; j < out_w; ++j) {
            out.set(i, j, m.at(src_i, j * m.w() / out_w));
        }
    }
    return out;
}

std::vector<Run> block_runs(std::size_t h, std::size_t w, BlockConfig b) {
    const std::size_t total = h * w;
    std::vector<Run> runs;
    runs.reserve((total + b.block_size - 1) / b.block_size);
    for (std::size_t start = 0; start < total; start += b.block_size) {
        runs.push_back({start, std::min(b.block_size, total - start)});
    }
    return runs;
}

std::vector<Run> selected_runs(const AoiMask& m, BlockConfig b) {
    std::vector<Run> selected;
    for (const Run& run : block_runs(m.h(), m.w(), b)) {
        for (std::size_t i = run.start; i < run.start + run.length; ++i) {
            if (m.at_flat(i)) {
                selected.push_back(run);
                break;
            }
        }
    }
    return selected;
}

AoiMask align_mask(const AoiMask& m, BlockConfig b) {
    AoiMask out(m.h(), m.w());
    for (const Run& run : selected_runs(m, b)) {
        for (std::size_t i = run.start; i < run.start + run.length; ++i) {
            out.set_flat(i, true);
        }
    }
    return out;
}

void mask_export_pgm(const AoiMask& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "P5\n" << m.w() << " " << m.h() << "\n255\n";
    for (std::size_t i = 0; i < m.h(); ++i) {
        for (std::size_t j = 0; j < m.w(); ++j) {
            out.put(m.at(i, j) ? static_cast<char>(0xff) : static_cast<char>(0x00));
        }
    }
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace focal
