#pragma once

#include <filesystem>

#include "focal/tensor.hpp"

namespace focal {

// Tensor file layout, all integers little-endian:
//   offset 0   magic   "FTNSR"
//   offset 5   version u16, currently 1
//   offset 7   dtype   u8, 0 = float32
//   offset 8   rank    u8, always 4
//   offset 9   dims    4 x u32 (n, c, h, w)
//   offset 25  payload n*c*h*w x f32
//
// Round trips are bit-exact, including negative zero and denormals.

/// Decodes a tensor file. Throws TensorFileError naming the byte offset of
/// the first violation, or IoError if the file cannot be opened.
Tensor tensor_read(const std::filesystem::path& path);

/// Encodes `t` at `path`, overwriting. Throws IoError on write failure.
void tensor_write(const Tensor& t, const std::filesystem::path& path);

}  // namespace focal
