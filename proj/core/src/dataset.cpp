#include "focal/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "focal/errors.hpp"
#include "focal/tensor_io.hpp"

namespace focal {

Dataset dataset_load(const std::filesystem::path& root) {
    const std::filesystem::path index = root / "index.csv";
    std::ifstream in(index);
    if (!in) {
        throw IoError("cannot open dataset index: " + index.string());
    }

    Dataset ds;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t comma = line.rfind(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size()) {
            throw DatasetError(index.string() + ":" + std::to_string(lineno) +
                               ": expected \"relative_tensor_path,integer_label\"");
        }
        const std::string rel = line.substr(0, comma);
        long label = 0;
        try {
            std::size_t used = 0;
            label = std::stol(line.substr(comma + 1), &used);
            if (used != line.size() - comma - 1) {
                throw std::invalid_argument("trailing junk");
            }
        } catch (const std::exception&) {
            throw DatasetError(index.string() + ":" + std::to_string(lineno) +
                               ": label is not an integer");
        }
        if (label < 0) {
            throw DatasetError(index.string() + ":" + std::to_string(lineno) +
                               ": labels must be non-negative");
        }
        const std::filesystem::path full = root / rel;
        ds.samples.push_back({tensor_read(full), static_cast<int>(label), full});
    }
    return ds;
}

void dataset_save(const Dataset& ds, const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    std::ofstream index(root / "index.csv", std::ios::trunc);
    if (!index) {
        throw IoError("cannot write dataset index under " + root.string());
    }
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%04zu.ftnsr", i);
        tensor_write(ds.samples[i].tensor, root / name);
        index << name << "," << ds.samples[i].label << "\n";
    }
    index.flush();
    if (!index) {
        throw IoError("write failed: " + (root / "index.csv").string());
    }
}

}  // namespace focal
