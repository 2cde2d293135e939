// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dvdnet/image.hpp"

namespace dvdnet {

struct PaddedFrame {
    Image frame;
    int original_height = 0;
    int original_width = 0;
};

/// Reflect-pads the bottom row and/or right column (at most one pixel each)
/// so both extents are even. Frames of height or width 1 replicate instead.
PaddedFrame pad_to_even(const Image& frame);

/// Same padding rule for noise maps.
NoiseMap pad_to_even(const NoiseMap& map);

/// Undo pad_to_even: keep the top-left original_height x original_width.
Image crop_to_original(const PaddedFrame& padded);
Image crop_to_original(const Image& frame, int height, int width);

} // namespace dvdnet
