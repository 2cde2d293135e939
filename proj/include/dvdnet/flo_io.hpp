// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "dvdnet/flow.hpp"

namespace dvdnet {

/// Middlebury `.flo` sanity tag, stored as a little-endian float32.
inline constexpr float kFloMagic = 202021.25f;

/// Layout: magic (f32), width (i32), height (i32), then height*width pairs
/// of (u, v) float32 in row-major order. All little-endian.
std::string encode_flo(const FlowField& flow);
FlowField decode_flo(const std::string& bytes);

void write_flo(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flo(const std::filesystem::path& path);

} // namespace dvdnet
