#pragma once

#include <filesystem>
#include <vector>

#include "focal/tensor.hpp"

namespace focal {

struct Sample {
    Tensor tensor;
    int label = 0;
    std::filesystem::path path;
};

/// Labeled tensors loaded from a directory holding an `index.csv` of
/// `relative_tensor_path,integer_label` lines.
struct Dataset {
    std::vector<Sample> samples;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
};

/// Loads `root/index.csv` and every referenced tensor. Throws DatasetError
/// on malformed lines or negative labels, IoError/TensorFileError on bad
/// tensor files.
Dataset dataset_load(const std::filesystem::path& root);

/// Writes `index.csv` and the sample tensors under `root` (created if
/// needed). Samples are named sample_0000.ftnsr, sample_0001.ftnsr, ...
void dataset_save(const Dataset& ds, const std::filesystem::path& root);

}  // namespace focal
