// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "dvdnet/image.hpp"

namespace dvdnet {

/// Loads an 8-bit PNG as an RGB frame in [0,1]. Grayscale inputs are
/// replicated to three channels.
Image read_png(const std::filesystem::path& path);

/// Clips to [0,1], rounds to 8 bits and writes an RGB PNG.
void write_png(const std::filesystem::path& path, const Image& frame);

/// Round to the nearest 8-bit level (values clipped to [0,1] first).
Image quantize_8bit(const Image& frame);

/// Every *.png in `dir`, sorted by file name.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

/// Frames of a directory in file-name order. Throws DataError if empty.
FrameSequence read_frame_directory(const std::filesystem::path& dir);

/// Writes frames as %05d.png (00000.png, 00001.png, ...).
void write_frame_directory(const std::filesystem::path& dir, const FrameSequence& sequence);

} // namespace dvdnet
