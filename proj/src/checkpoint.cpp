// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "dvdnet/error.hpp"
#include "dvdnet/rearrange.hpp"

namespace dvdnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'D', 'V', 'D', 'N', 'C', 'K', 'P', 'T'};

template <typename Int>
void put_int(std::string& out, Int value)
{
    char buf[sizeof(Int)];
    std::memcpy(buf, &value, sizeof(Int));
    out.append(buf, sizeof(Int));
}

template <typename Int>
Int get_int(const std::string& in, std::size_t offset)
{
    if (offset + sizeof(Int) > in.size()) {
        throw DataError("checkpoint truncated");
    }
    Int value;
    std::memcpy(&value, in.data() + offset, sizeof(Int));
    return value;
}

struct TensorWriter {
    nlohmann::json index = nlohmann::json::array();
    std::string payload;

    void add(const std::string& name, const std::vector<float>& values)
    {
        index.push_back({{"name", name}, {"offset", payload.size()}, {"count", values.size()}});
        payload.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(float));
    }
};

std::vector<float> read_tensor(const nlohmann::json& entry, const std::string& bytes, std::size_t base,
                               std::size_t expected)
{
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto count = entry.at("count").get<std::size_t>();
    if (count != expected) {
        throw DataError("tensor '" + entry.at("name").get<std::string>() + "' has " +
                        std::to_string(count) + " values, expected " + std::to_string(expected));
    }
    if (base + offset + count * sizeof(float) > bytes.size()) {
        throw DataError("checkpoint truncated inside tensor payload");
    }
    std::vector<float> values(count);
    std::memcpy(values.data(), bytes.data() + base + offset, count * sizeof(float));
    return values;
}

} // namespace

std::string serialize_checkpoint(const DenoiserParams& params, const nlohmann::json& metadata)
{
    params.validate();
    const auto& g = params.geometry();
    nlohmann::json header;
    header["block"] = to_string(g.kind);
    header["temporal_radius"] = g.temporal_radius;
    header["window_length"] = g.window_length();
    header["width"] = g.width;
    header["depth"] = g.depth;
    header["mode"] = to_string(params.mode());
    header["channel_order"] = kChannelOrderTag;
    header["kernel"] = ConvLayerSpec::kernel;
    header["weight_layout"] = "out,in,ky,kx";
    header["layers"] = nlohmann::json::array();
    TensorWriter writer;
    for (std::size_t i = 0; i < params.layers().size(); ++i) {
        const auto& layer = params.layers()[i];
        header["layers"].push_back({{"in_channels", layer.spec.in_channels},
                                    {"out_channels", layer.spec.out_channels},
                                    {"norm", layer.spec.has_norm},
                                    {"relu", layer.spec.has_activation}});
        const std::string prefix = "layer" + std::to_string(i) + ".";
        writer.add(prefix + "weight", layer.weight);
        writer.add(prefix + "bias", layer.bias);
        if (layer.norm) {
            writer.add(prefix + "bn.gamma", layer.norm->gamma);
            writer.add(prefix + "bn.beta", layer.norm->beta);
            writer.add(prefix + "bn.running_mean", layer.norm->running_mean);
            writer.add(prefix + "bn.running_var", layer.norm->running_var);
        }
        if (layer.affine) {
            writer.add(prefix + "affine.scale", layer.affine->scale);
            writer.add(prefix + "affine.shift", layer.affine->shift);
        }
    }
    header["tensors"] = writer.index;
    header["metadata"] = metadata.is_null() ? nlohmann::json::object() : metadata;

    const std::string text = header.dump();
    std::string out(kMagic, sizeof(kMagic));
    put_int<std::uint32_t>(out, kCheckpointVersion);
    put_int<std::uint64_t>(out, text.size());
    out += text;
    out += writer.payload;
    return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes)
{
    if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a dvdnet checkpoint (bad magic)");
    }
    const auto version = get_int<std::uint32_t>(bytes, 8);
    if (version != kCheckpointVersion) {
        throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto header_len = get_int<std::uint64_t>(bytes, 12);
    if (20 + header_len > bytes.size()) {
        throw DataError("checkpoint truncated inside header");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(20, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    const std::size_t base = 20 + header_len;

    try {
        if (header.at("channel_order").get<std::string>() != kChannelOrderTag) {
            throw ConfigError("checkpoint uses an unknown channel order convention");
        }
        BlockGeometry geometry;
        geometry.kind = parse_block_kind(header.at("block").get<std::string>());
        geometry.depth = header.at("depth").get<int>();
        geometry.width = header.at("width").get<int>();
        geometry.temporal_radius = header.at("temporal_radius").get<int>();
        const NormMode mode = parse_norm_mode(header.at("mode").get<std::string>());
        const auto layout = block_layout(geometry);

        std::map<std::string, nlohmann::json> tensors;
        for (const auto& entry : header.at("tensors")) {
            tensors[entry.at("name").get<std::string>()] = entry;
        }
        auto fetch = [&](const std::string& name, std::size_t expected) {
            auto it = tensors.find(name);
            if (it == tensors.end()) {
                throw DataError("checkpoint lacks tensor '" + name + "'");
            }
            return read_tensor(it->second, bytes, base, expected);
        };

        std::vector<ConvLayer<float>> layers;
        for (std::size_t i = 0; i < layout.size(); ++i) {
            ConvLayer<float> layer;
            layer.spec = layout[i];
            const std::string prefix = "layer" + std::to_string(i) + ".";
            const auto n = static_cast<std::size_t>(layer.spec.out_channels);
            layer.weight = fetch(prefix + "weight", layer.spec.weight_count());
            layer.bias = fetch(prefix + "bias", n);
            if (layer.spec.has_norm && mode == NormMode::train) {
                layer.norm = BatchNormState<float>{fetch(prefix + "bn.gamma", n), fetch(prefix + "bn.beta", n),
                                                   fetch(prefix + "bn.running_mean", n),
                                                   fetch(prefix + "bn.running_var", n)};
            }
            if (layer.spec.has_norm && mode == NormMode::eval) {
                layer.affine = AffineState<float>{fetch(prefix + "affine.scale", n),
                                                  fetch(prefix + "affine.shift", n)};
            }
            layers.push_back(std::move(layer));
        }
        Checkpoint ckpt{DenoiserParams(geometry, std::move(layers), mode),
                        header.value("metadata", nlohmann::json::object())};
        return ckpt;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint header: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params,
                     const nlohmann::json& metadata)
{
    const std::string bytes = serialize_checkpoint(params, metadata);
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write checkpoint " + path.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw DataError("failed writing checkpoint " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

} // namespace dvdnet
