// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "dvdnet/error.hpp"
#include "dvdnet/eval.hpp"
#include "dvdnet/noise.hpp"
#include "synthetic.hpp"

using namespace dvdnet;

namespace {

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};

Moments residual_moments(const Image& clean, const Image& noisy)
{
    double s = 0.0;
    double s2 = 0.0;
    const auto n = static_cast<double>(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double d = static_cast<double>(noisy.data()[i]) - clean.data()[i];
        s += d;
        s2 += d * d;
    }
    const double mean = s / n;
    return {mean, std::sqrt(s2 / n - mean * mean)};
}

} // namespace

TEST_CASE("sigma conversion")
{
    CHECK(sigma_from_8bit(25.0) == doctest::Approx(0.0980392).epsilon(1e-6));
    CHECK(sigma_from_8bit(255.0) == 1.0);
}

TEST_CASE("sigma zero is the identity")
{
    const Image clean = testing::random_image(3, 17, 23, 1);
    CHECK(add_awgn(clean, 0.0, 42) == clean);
}

TEST_CASE("noise statistics at sigma 50")
{
    const Image clean = testing::random_image(3, 256, 256, 2);
    const double sigma = sigma_from_8bit(50.0);
    const Image noisy = add_awgn(clean, sigma, 7);
    const Moments m = residual_moments(clean, noisy);
    CHECK(std::abs(m.stddev - sigma) / sigma < 0.02);
    // Three standard errors of the mean.
    CHECK(std::abs(m.mean) < 3.0 * sigma / std::sqrt(static_cast<double>(clean.size())));
}

TEST_CASE("noise is reproducible and unclipped")
{
    const Image clean(3, 32, 32, 0.98f);
    const Image a = add_awgn(clean, 0.2, 5);
    CHECK(a == add_awgn(clean, 0.2, 5));
    CHECK_FALSE(a == add_awgn(clean, 0.2, 6));
    bool above_one = false;
    for (float v : a.data()) {
        above_one = above_one || v > 1.0f;
    }
    CHECK(above_one);
}

TEST_CASE("negative sigma is a domain error")
{
    CHECK_THROWS_AS(add_awgn(Image(3, 4, 4), -0.1, 0), DomainError);
    CHECK_THROWS_AS(constant_noise_map(-1.0, 4, 4), DomainError);
}

TEST_CASE("noisy PSNR near 14.15 dB at sigma 50 on natural-range content")
{
    const auto seq = testing::translating_sequence(96, 128, 6, 1, 0, 3);
    FrameSequence noisy;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        noisy.frames.push_back(add_awgn(seq.frames[i], sigma_from_8bit(50.0), 100 + i));
    }
    CHECK(std::abs(psnr_seq(seq, noisy) - 14.15) < 0.35);
}

TEST_CASE("constant noise map")
{
    const NoiseMap map = constant_noise_map(sigma_from_8bit(25.0), 6, 10);
    CHECK(map.height() == 6);
    CHECK(map.width() == 10);
    for (float v : map.values()) {
        CHECK(v == static_cast<float>(25.0 / 255.0));
    }
}

TEST_CASE("noise map downsampling keeps the top-left sample")
{
    NoiseMap map(4, 6);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 6; ++x) {
            map(y, x) = static_cast<float>(10 * y + x);
        }
    }
    const NoiseMap half = downsample_noise_map(map);
    REQUIRE(half.height() == 2);
    REQUIRE(half.width() == 3);
    CHECK(half(0, 0) == 0.0f);
    CHECK(half(0, 2) == 4.0f);
    CHECK(half(1, 1) == 22.0f);
    CHECK_THROWS_AS(downsample_noise_map(NoiseMap(3, 4)), DimensionError);
}
