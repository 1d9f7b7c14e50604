#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace focal {

/// Base of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (open, write, unreadable path).
class IoError : public Error {
public:
    using Error::Error;
};

/// Structural violation of the tensor file layout. Carries the byte
/// offset at which decoding failed.
class TensorFileError : public IoError {
public:
    enum class Kind {
        BadMagic,
        UnsupportedVersion,
        UnsupportedDtype,
        UnsupportedRank,
        TruncatedPayload,
    };

    TensorFileError(Kind kind, std::size_t offset, const std::string& what)
        : IoError(what), kind_(kind), offset_(offset) {}

    Kind kind() const { return kind_; }
    std::size_t offset() const { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

/// Dimension mismatch between operands (channel counts, mask sizes, ...).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Problems while loading or validating a model manifest.
class ManifestError : public Error {
public:
    using Error::Error;
};

class ParseError : public ManifestError {
public:
    ParseError(int line, int column, const std::string& what)
        : ManifestError(what), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Consecutive layer shapes do not compose; names the offending layer.
class ShapeCompositionError : public ManifestError {
public:
    ShapeCompositionError(std::size_t layer_index, const std::string& what)
        : ManifestError(what), layer_index_(layer_index) {}

    std::size_t layer_index() const { return layer_index_; }

private:
    std::size_t layer_index_;
};

class MissingTensorFileError : public ManifestError {
public:
    MissingTensorFileError(std::filesystem::path path, const std::string& what)
        : ManifestError(what), path_(std::move(path)) {}

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Invalid graph surgery (conversion index out of range, no conv left to
/// focus, wrong layer kind).
class GraphError : public Error {
public:
    using Error::Error;
};

/// Dataset and evaluation input problems (empty set, label out of range).
class DatasetError : public Error {
public:
    using Error::Error;
};

}  // namespace focal
