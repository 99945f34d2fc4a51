#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "inrfit/errors.hpp"
#include "inrfit/network.hpp"

namespace inrfit {

// Checkpoint container: "INRF" magic, uint32 version, uint64 header length,
// JSON architecture header, then every parameter tensor as little-endian
// float64 (weights row-major, then bias, layer by layer). Doubles in the
// JSON header round-trip exactly (shortest-representation printing).
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json activation_to_json(const ActivationSpec& spec) {
    nlohmann::json j;
    j["kind"] = to_string(spec.kind);
    j["omega0"] = spec.omega0;
    j["gauss_scale"] = spec.gauss_scale;
    if (!spec.multipliers.empty()) j["multipliers"] = spec.multipliers;
    return j;
}

inline ActivationKind kind_from_string(const std::string& s) {
    if (s == "linear") return ActivationKind::Linear;
    if (s == "sine") return ActivationKind::Sine;
    if (s == "finer") return ActivationKind::Finer;
    if (s == "fm-sine") return ActivationKind::FmSine;
    if (s == "fm-finer") return ActivationKind::FmFiner;
    if (s == "gauss") return ActivationKind::Gauss;
    throw FormatError("checkpoint: unknown activation kind '" + s + "'");
}

inline ActivationSpec activation_from_json(const nlohmann::json& j) {
    ActivationSpec spec;
    spec.kind = kind_from_string(j.at("kind").get<std::string>());
    spec.omega0 = j.at("omega0").get<double>();
    spec.gauss_scale = j.at("gauss_scale").get<double>();
    if (j.contains("multipliers")) spec.multipliers = j["multipliers"].get<std::vector<double>>();
    return spec;
}

} // namespace detail

inline void save_checkpoint(const std::string& path, const Model& model) {
    nlohmann::json header;
    header["format"] = "inrfit-checkpoint";
    header["input_dim"] = model.input_dim;
    header["outermost_linear"] = model.outermost_linear;
    if (model.encoder) {
        header["encoder"] = {{"levels_per_dim", model.encoder->levels_per_dim},
                             {"scale", model.encoder->scale},
                             {"input_dim", model.encoder->input_dim}};
    }
    header["layers"] = nlohmann::json::array();
    for (const auto& layer : model.layers) {
        nlohmann::json jl;
        jl["fan_out"] = layer.weights.rows;
        jl["fan_in"] = layer.weights.cols;
        jl["has_bias"] = layer.bias.has_value();
        jl["activation"] = detail::activation_to_json(layer.activation);
        header["layers"].push_back(jl);
    }
    const std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_checkpoint: cannot open " + path);
    out.write("INRF", 4);
    const uint32_t version = kCheckpointVersion;
    uint8_t v4[4];
    for (int b = 0; b < 4; ++b) v4[b] = static_cast<uint8_t>(version >> (8 * b));
    out.write(reinterpret_cast<const char*>(v4), 4);
    const uint64_t hlen = head.size();
    uint8_t h8[8];
    for (int b = 0; b < 8; ++b) h8[b] = static_cast<uint8_t>(hlen >> (8 * b));
    out.write(reinterpret_cast<const char*>(h8), 8);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    auto write_doubles = [&out](const double* p, size_t n) {
        out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    };
    for (const auto& layer : model.layers) {
        write_doubles(layer.weights.data.data(), layer.weights.size());
        if (layer.bias) write_doubles(layer.bias->data(), layer.bias->size());
    }
    if (!out) throw DataError("save_checkpoint: write failed for " + path);
}

inline Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_checkpoint: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "INRF", 4) != 0)
        throw FormatError("load_checkpoint: bad magic in " + path);
    uint8_t v4[4];
    if (!in.read(reinterpret_cast<char*>(v4), 4))
        throw FormatError("load_checkpoint: truncated version field in " + path);
    uint32_t version = 0;
    for (int b = 3; b >= 0; --b) version = (version << 8) | v4[b];
    if (version != kCheckpointVersion)
        throw FormatError("load_checkpoint: unsupported version " + std::to_string(version) + " in " + path);
    uint8_t h8[8];
    if (!in.read(reinterpret_cast<char*>(h8), 8))
        throw FormatError("load_checkpoint: truncated header length in " + path);
    uint64_t hlen = 0;
    for (int b = 7; b >= 0; --b) hlen = (hlen << 8) | h8[b];
    if (hlen > (1u << 26)) throw FormatError("load_checkpoint: implausible header size in " + path);
    std::string head(hlen, '\0');
    if (!in.read(head.data(), static_cast<std::streamsize>(hlen)))
        throw FormatError("load_checkpoint: truncated JSON header in " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(head);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_checkpoint: invalid JSON header in " + path + ": " + e.what());
    }

    Model model;
    try {
        model.input_dim = header.at("input_dim").get<int>();
        model.outermost_linear = header.at("outermost_linear").get<bool>();
        if (header.contains("encoder")) {
            PositionalEncodingSpec enc;
            enc.levels_per_dim = header["encoder"].at("levels_per_dim").get<int>();
            enc.scale = header["encoder"].at("scale").get<int>();
            enc.input_dim = header["encoder"].at("input_dim").get<int>();
            model.encoder = enc;
        }
        for (const auto& jl : header.at("layers")) {
            Layer layer;
            const int fan_out = jl.at("fan_out").get<int>();
            const int fan_in = jl.at("fan_in").get<int>();
            if (fan_out < 1 || fan_in < 1)
                throw FormatError("load_checkpoint: degenerate layer dims in " + path);
            layer.weights = Matrix(fan_out, fan_in);
            if (jl.at("has_bias").get<bool>()) layer.bias = std::vector<double>(static_cast<size_t>(fan_out));
            layer.activation = detail::activation_from_json(jl.at("activation"));
            model.layers.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_checkpoint: malformed header field in " + path + ": " + e.what());
    }
    if (model.layers.empty()) throw FormatError("load_checkpoint: no layers in " + path);

    auto read_doubles = [&in, &path](double* p, size_t n) {
        if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double))))
            throw FormatError("load_checkpoint: truncated parameter blob in " + path);
    };
    for (auto& layer : model.layers) {
        read_doubles(layer.weights.data.data(), layer.weights.size());
        if (layer.bias) read_doubles(layer.bias->data(), layer.bias->size());
    }
    return model;
}

} // namespace inrfit
