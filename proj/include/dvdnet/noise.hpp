// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "dvdnet/image.hpp"

namespace dvdnet {

/// Convert an 8-bit-scale standard deviation (e.g. 25) to the [0,1] scale.
constexpr double sigma_from_8bit(double sigma_8bit) noexcept { return sigma_8bit / 255.0; }

/// I + N with N i.i.d. zero-mean Gaussian of standard deviation `sigma`
/// ([0,1] scale). The result is not clipped. Deterministic for a given seed
/// and shape. Throws DomainError for negative sigma.
Image add_awgn(const Image& clean, double sigma, std::uint64_t seed);

NoiseMap constant_noise_map(double sigma, int height, int width);

/// Half-resolution map keeping the top-left sample of each 2x2 block.
NoiseMap downsample_noise_map(const NoiseMap& map);

} // namespace dvdnet
