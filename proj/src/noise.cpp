// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/noise.hpp"

#include <random>

#include "dvdnet/error.hpp"

namespace dvdnet {

Image add_awgn(const Image& clean, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0)) {
        throw DomainError("noise sigma must be non-negative");
    }
    Image noisy = clean;
    if (sigma == 0.0) {
        return noisy;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (float& v : noisy.data()) {
        v = static_cast<float>(static_cast<double>(v) + gauss(rng));
    }
    return noisy;
}

NoiseMap constant_noise_map(double sigma, int height, int width)
{
    if (!(sigma >= 0.0)) {
        throw DomainError("noise sigma must be non-negative");
    }
    return NoiseMap(height, width, static_cast<float>(sigma));
}

NoiseMap downsample_noise_map(const NoiseMap& map)
{
    if (map.height() % 2 != 0 || map.width() % 2 != 0) {
        throw DimensionError("noise map downsampling needs even dimensions");
    }
    NoiseMap out(map.height() / 2, map.width() / 2);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out(y, x) = map(2 * y, 2 * x);
        }
    }
    return out;
}

} // namespace dvdnet
