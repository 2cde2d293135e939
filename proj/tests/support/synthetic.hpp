// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// Procedural fixtures: textured RGB images and moving sequences with known
// motion, standing in for natural-image corpora in tests.

#pragma once

#include <cstdint>
#include <vector>

#include "dvdnet/image.hpp"
#include "dvdnet/network.hpp"

namespace dvdnet::testing {

/// Piecewise-smooth colour image: low-frequency sinusoid mixture plus a few
/// flat discs and rectangles, values kept inside [0.08, 0.92]; mostly mid-tones like natural footage.
Image textured_image(int height, int width, std::uint64_t seed);

/// Uniform random samples in [0,1) for each element.
Image random_image(int channels, int height, int width, std::uint64_t seed);

/// out(y, x) = in(clamp(y - dy), clamp(x - dx)): content moves by (dx, dy).
Image shift_image(const Image& image, int dx, int dy);

/// n frames of a textured canvas seen through a window moving (dx, dy) px
/// per frame, cut from a larger canvas so there are no border artefacts.
FrameSequence translating_sequence(int height, int width, int n, int dx, int dy, std::uint64_t seed);

/// n identical frames.
FrameSequence static_sequence(const Image& frame, int n);

/// Zeroes the weights and bias of the last convolution.
template <typename T>
void zero_final_layer(BasicDenoiserParams<T>& params);

/// Replaces gamma/beta/running statistics of train-mode params with random
/// values (variance in [0.25, 2]) so folding is non-trivial.
template <typename T>
void randomize_statistics(BasicDenoiserParams<T>& params, std::uint64_t seed);

} // namespace dvdnet::testing
