#include "focal/manifest.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "focal/errors.hpp"
#include "focal/tensor_io.hpp"

namespace focal {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void layer_error(std::size_t idx, const std::string& msg) {
    throw ManifestError("layer " + std::to_string(idx) + ": " + msg);
}

std::size_t get_count(const Json& j, const char* key, std::size_t idx) {
    if (!j.contains(key) || !j[key].is_number_unsigned()) {
        layer_error(idx, std::string("missing or invalid \"") + key + "\"");
    }
    return j[key].get<std::size_t>();
}

double get_number(const Json& j, const char* key, std::size_t idx) {
    if (!j.contains(key) || !j[key].is_number()) {
        layer_error(idx, std::string("missing or invalid \"") + key + "\"");
    }
    return j[key].get<double>();
}

TensorRef load_tensor_field(const Json& j, const char* key, std::size_t idx,
                            const std::filesystem::path& base) {
    if (!j.contains(key) || !j[key].is_string()) {
        layer_error(idx, std::string("missing or invalid \"") + key + "\"");
    }
    const std::filesystem::path rel = j[key].get<std::string>();
    const std::filesystem::path full = base / rel;
    if (!std::filesystem::exists(full)) {
        throw MissingTensorFileError(full, "layer " + std::to_string(idx) +
                                               ": tensor file not found: " + full.string());
    }
    return {tensor_read(full), full};
}

ConvParams parse_conv_params(const Json& j, std::size_t idx) {
    if (!j.contains("kernel") || !j["kernel"].is_array() || j["kernel"].size() != 2) {
        layer_error(idx, "\"kernel\" must be [kh, kw]");
    }
    return ConvParams(get_count(j, "in_channels", idx), get_count(j, "out_channels", idx),
                      j["kernel"][0].get<std::size_t>(), j["kernel"][1].get<std::size_t>(),
                      get_count(j, "stride", idx), get_count(j, "padding", idx));
}

LayerSpec parse_layer(const Json& j, std::size_t idx, const std::filesystem::path& base) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        layer_error(idx, "layer entries must be objects with a \"type\" string");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "conv") {
        return ConvLayer{parse_conv_params(j, idx), load_tensor_field(j, "weights", idx, base),
                         load_tensor_field(j, "bias", idx, base)};
    }
    if (type == "focused_conv") {
        FocusedConvLayer layer{parse_conv_params(j, idx),
                               load_tensor_field(j, "weights", idx, base),
                               load_tensor_field(j, "bias", idx, base),
                               BlockConfig(get_count(j, "block_size", idx)),
                               static_cast<float>(get_number(j, "fill", idx))};
        return layer;
    }
    if (type == "threshold_aoi") {
        return ThresholdAoiLayer{get_number(j, "tau", idx)};
    }
    if (type == "relu") {
        return ReluLayer{};
    }
    if (type == "maxpool") {
        return MaxPoolLayer{get_count(j, "kernel", idx), get_count(j, "stride", idx)};
    }
    if (type == "gap") {
        return GlobalAvgPoolLayer{};
    }
    if (type == "flatten") {
        return FlattenLayer{};
    }
    if (type == "affine") {
        return AffineLayer{load_tensor_field(j, "scale", idx, base),
                           load_tensor_field(j, "shift", idx, base)};
    }
    if (type == "linear") {
        return LinearLayer{get_count(j, "in_features", idx), get_count(j, "out_features", idx),
                           load_tensor_field(j, "weights", idx, base),
                           load_tensor_field(j, "bias", idx, base)};
    }
    layer_error(idx, "unknown layer type \"" + type + "\"");
}

// nlohmann reports parse failures by byte offset; map that back to a
// line/column pair for the error contract.
std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

std::string relative_to(const std::filesystem::path& target,
                        const std::filesystem::path& base) {
    std::error_code ec;
    std::filesystem::path rel = std::filesystem::relative(target, base, ec);
    if (ec || rel.empty()) {
        rel = target;
    }
    return rel.generic_string();
}

// Reference the original file when there is one, otherwise persist the
// tensor next to the manifest so references never dangle.
std::string tensor_field(const TensorRef& t, const std::filesystem::path& dir,
                         const std::filesystem::path& stem, std::size_t idx,
                         const char* role) {
    if (!t.source.empty()) {
        return relative_to(std::filesystem::absolute(t.source), dir);
    }
    const std::string name =
        stem.string() + "_l" + std::to_string(idx) + "_" + role + ".ftnsr";
    tensor_write(t.value, dir / name);
    return name;
}

struct SaveVisitor {
    const std::filesystem::path& dir;
    const std::filesystem::path& stem;
    std::size_t idx;

    Json operator()(const ConvLayer& l) const {
        Json j;
        j["type"] = "conv";
        emit_conv_common(j, l.params);
        j["weights"] = tensor_field(l.weights, dir, stem, idx, "weights");
        j["bias"] = tensor_field(l.bias, dir, stem, idx, "bias");
        return j;
    }
    Json operator()(const FocusedConvLayer& l) const {
        Json j;
        j["type"] = "focused_conv";
        emit_conv_common(j, l.params);
        j["block_size"] = l.block.block_size;
        j["fill"] = static_cast<double>(l.fill);
        j["weights"] = tensor_field(l.weights, dir, stem, idx, "weights");
        j["bias"] = tensor_field(l.bias, dir, stem, idx, "bias");
        return j;
    }
    Json operator()(const ThresholdAoiLayer& l) const {
        Json j;
        j["type"] = "threshold_aoi";
        j["tau"] = l.tau;
        return j;
    }
    Json operator()(const ReluLayer&) const { return Json{{"type", "relu"}}; }
    Json operator()(const MaxPoolLayer& l) const {
        Json j;
        j["type"] = "maxpool";
        j["kernel"] = l.kernel;
        j["stride"] = l.stride;
        return j;
    }
    Json operator()(const GlobalAvgPoolLayer&) const { return Json{{"type", "gap"}}; }
    Json operator()(const FlattenLayer&) const { return Json{{"type", "flatten"}}; }
    Json operator()(const AffineLayer& l) const {
        Json j;
        j["type"] = "affine";
        j["scale"] = tensor_field(l.scale, dir, stem, idx, "scale");
        j["shift"] = tensor_field(l.shift, dir, stem, idx, "shift");
        return j;
    }
    Json operator()(const LinearLayer& l) const {
        Json j;
        j["type"] = "linear";
        j["in_features"] = l.in_features;
        j["out_features"] = l.out_features;
        j["weights"] = tensor_field(l.weights, dir, stem, idx, "weights");
        j["bias"] = tensor_field(l.bias, dir, stem, idx, "bias");
        return j;
    }

    static void emit_conv_common(Json& j, const ConvParams& p) {
        j["in_channels"] = p.in_channels;
        j["out_channels"] = p.out_channels;
        j["kernel"] = Json::array({p.kernel_h, p.kernel_w});
        j["stride"] = p.stride;
        j["padding"] = p.padding;
    }
};

}  // namespace

ModelGraph model_load(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw IoError("cannot open manifest: " + manifest_path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(line, column,
                         manifest_path.string() + ":" + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + e.what());
    }

    if (!doc.is_object() || !doc.contains("input_dims") || !doc["input_dims"].is_array() ||
        doc["input_dims"].size() != 3 || !doc.contains("layers") ||
        !doc["layers"].is_array()) {
        throw ManifestError("manifest must carry \"input_dims\" [c,h,w] and \"layers\"");
    }

    ModelGraph g;
    g.name = doc.value("name", manifest_path.stem().string());
    g.in_c = doc["input_dims"][0].get<std::size_t>();
    g.in_h = doc["input_dims"][1].get<std::size_t>();
    g.in_w = doc["input_dims"][2].get<std::size_t>();

    const std::filesystem::path base = std::filesystem::absolute(manifest_path).parent_path();
    for (std::size_t i = 0; i < doc["layers"].size(); ++i) {
        g.layers.push_back(parse_layer(doc["layers"][i], i, base));
    }
    validate(g);
    return g;
}

void model_save(const ModelGraph& g, const std::filesystem::path& path) {
    const std::filesystem::path abs = std::filesystem::absolute(path);
    const std::filesystem::path dir = abs.parent_path();
    const std::filesystem::path stem = abs.stem();

    Json doc;
    doc["name"] = g.name;
    doc["input_dims"] = Json::array({g.in_c, g.in_h, g.in_w});
    doc["layers"] = Json::array();
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        doc["layers"].push_back(std::visit(SaveVisitor{dir, stem, i}, g.layers[i]));
    }

    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << doc.dump(2) << "\n";
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace focal
