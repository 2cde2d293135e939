// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dvdnet/network.hpp"

namespace dvdnet {

/// Checkpoint container, version 1:
///
///   offset 0   8 bytes  magic "DVDNCKPT"
///   offset 8   u32 LE   format version
///   offset 12  u64 LE   header length L
///   offset 20  L bytes  UTF-8 JSON header
///   then                float32 LE tensors, in the order of header["tensors"]
///
/// The header records block kind, temporal radius, width, depth, norm mode,
/// the space-to-depth channel order tag, every layer spec and the byte
/// offset/count of each tensor, plus a free-form "metadata" object.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    DenoiserParams params;
    nlohmann::json metadata = nlohmann::json::object();
};

std::string serialize_checkpoint(const DenoiserParams& params,
                                 const nlohmann::json& metadata = nlohmann::json::object());
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params,
                     const nlohmann::json& metadata = nlohmann::json::object());
/// Throws DataError on malformed files, ConfigError on unsupported versions.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace dvdnet
