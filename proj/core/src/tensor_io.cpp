#include "focal/tensor_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "focal/errors.hpp"

namespace focal {

namespace {

constexpr char kMagic[5] = {'F', 'T', 'N', 'S', 'R'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::uint8_t kRank = 4;

constexpr std::size_t kMagicOffset = 0;
constexpr std::size_t kVersionOffset = 5;
constexpr std::size_t kDtypeOffset = 7;
constexpr std::size_t kRankOffset = 8;
constexpr std::size_t kDimsOffset = 9;
constexpr std::size_t kPayloadOffset = 25;

std::uint32_t load_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32le(std::uint32_t v, unsigned char* p) {
    p[0] = static_cast<unsigned char>(v & 0xff);
    p[1] = static_cast<unsigned char>(v >> 8 & 0xff);
    p[2] = static_cast<unsigned char>(v >> 16 & 0xff);
    p[3] = static_cast<unsigned char>(v >> 24 & 0xff);
}

}  // namespace

Tensor tensor_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open tensor file: " + path.string());
    }
    std::vector<unsigned char> bytes(std::istreambuf_iterator<char>(in), {});

    if (bytes.size() < kVersionOffset ||
        std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw TensorFileError(TensorFileError::Kind::BadMagic, kMagicOffset,
                              "bad magic at byte 0 in " + path.string());
    }
    if (bytes.size() < kPayloadOffset) {
        throw TensorFileError(TensorFileError::Kind::TruncatedPayload, bytes.size(),
                              "header truncated at byte " + std::to_string(bytes.size()) +
                                  " in " + path.string());
    }
    const std::uint16_t version =
        static_cast<std::uint16_t>(bytes[kVersionOffset] | bytes[kVersionOffset + 1] << 8);
    if (version != kVersion) {
        throw TensorFileError(TensorFileError::Kind::UnsupportedVersion, kVersionOffset,
                              "unsupported version " + std::to_string(version) +
                                  " at byte 5 in " + path.string());
    }
    if (bytes[kDtypeOffset] != kDtypeF32) {
        throw TensorFileError(TensorFileError::Kind::UnsupportedDtype, kDtypeOffset,
                              "unsupported dtype " + std::to_string(bytes[kDtypeOffset]) +
                                  " at byte 7 in " + path.string());
    }
    if (bytes[kRankOffset] != kRank) {
        throw TensorFileError(TensorFileError::Kind::UnsupportedRank, kRankOffset,
                              "unsupported rank " + std::to_string(bytes[kRankOffset]) +
                                  " at byte 8 in " + path.string());
    }

    Dims dims;
    dims.n = load_u32le(&bytes[kDimsOffset]);
    dims.c = load_u32le(&bytes[kDimsOffset + 4]);
    dims.h = load_u32le(&bytes[kDimsOffset + 8]);
    dims.w = load_u32le(&bytes[kDimsOffset + 12]);

    const std::size_t expected = kPayloadOffset + dims.count() * sizeof(float);
    if (bytes.size() < expected) {
        throw TensorFileError(TensorFileError::Kind::TruncatedPayload, bytes.size(),
                              "payload truncated at byte " + std::to_string(bytes.size()) +
                                  ", expected " + std::to_string(expected) + " bytes in " +
                                  path.string());
    }

    std::vector<float> values(dims.count());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t u = load_u32le(&bytes[kPayloadOffset + i * 4]);
        std::memcpy(&values[i], &u, sizeof(float));
    }
    return Tensor(dims, std::move(values));
}

void tensor_write(const Tensor& t, const std::filesystem::path& path) {
    const Dims& d = t.dims();
    std::vector<unsigned char> bytes(kPayloadOffset + t.size() * sizeof(float));
    std::memcpy(bytes.data(), kMagic, sizeof(kMagic));
    bytes[kVersionOffset] = kVersion & 0xff;
    bytes[kVersionOffset + 1] = kVersion >> 8;
    bytes[kDtypeOffset] = kDtypeF32;
    bytes[kRankOffset] = kRank;
    store_u32le(static_cast<std::uint32_t>(d.n), &bytes[kDimsOffset]);
    store_u32le(static_cast<std::uint32_t>(d.c), &bytes[kDimsOffset + 4]);
    store_u32le(static_cast<std::uint32_t>(d.h), &bytes[kDimsOffset + 8]);
    store_u32le(static_cast<std::uint32_t>(d.w), &bytes[kDimsOffset + 12]);
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint32_t u;
        std::memcpy(&u, &t.values()[i], sizeof(float));
        store_u32le(u, &bytes[kPayloadOffset + i * 4]);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace focal
