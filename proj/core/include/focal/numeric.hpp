#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace focal {

/// Median by full sort; the midpoint average of the two central elements for
/// even counts. Empty input returns 0.
inline double median(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) {
        return v[mid];
    }
    return (v[mid - 1] + v[mid]) / 2.0;
}

/// Nearest-rank percentile, p in [0, 100]. Empty input returns 0.
inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const double rank = std::ceil(p / 100.0 * static_cast<double>(v.size()));
    const std::size_t idx =
        rank <= 1.0 ? 0 : std::min(v.size() - 1, static_cast<std::size_t>(rank) - 1);
    return v[idx];
}

}  // namespace focal
