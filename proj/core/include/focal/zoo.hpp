#pragma once

#include "focal/dataset.hpp"
#include "focal/graph.hpp"

namespace focal {

/// Desk-scale 6-conv reference classifier on (3, 64, 64) input.
///
/// Weights are hand-set, no training involved: each conv averages within
/// fixed R/G/B/mixed channel groups, and a zero-bias linear head matches the
/// pooled group means against the four class directions (R, G, B, white).
/// Layer 2 strides by 2, the model's first downsample point; every later
/// conv runs at 32x32.
ModelGraph desk_cnn();

/// Synthetic four-class companion dataset for desk_cnn: a radius-10 bright
/// disc at a random position lights one input channel (classes 0..2) or all
/// three (class 3) over a near-zero noise background.
Dataset blob_dataset(std::size_t per_class, unsigned seed);

}  // namespace focal
