#pragma once

#include <filesystem>

#include "focal/graph.hpp"

namespace focal {

// Manifest: a UTF-8 JSON document
//   { "name": ..., "input_dims": [c, h, w], "layers": [ {"type": ...}, ... ] }
// Tensor-valued fields hold tensor file paths relative to the manifest.

/// Loads and validates a model. Throws ParseError (with line/column),
/// MissingTensorFileError, or ShapeCompositionError.
ModelGraph model_load(const std::filesystem::path& manifest_path);

/// Writes the manifest for `g` at `path`. Tensors that were loaded from
/// files are referenced (not copied); tensors built in memory are written
/// beside the manifest as "<stem>_l<idx>_<role>.ftnsr".
void model_save(const ModelGraph& g, const std::filesystem::path& path);

}  // namespace focal
