// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "dvdnet/error.hpp"
#include "dvdnet/rearrange.hpp"
#include "synthetic.hpp"

using namespace dvdnet;

TEST_CASE("space_to_depth orders each 2x2 block in raster order")
{
    Image img(1, 2, 2);
    img(0, 0, 0) = 1.0f; // a
    img(0, 0, 1) = 2.0f; // b
    img(0, 1, 0) = 3.0f; // c
    img(0, 1, 1) = 4.0f; // d
    const FeatureTensor t = space_to_depth(img);
    REQUIRE(t.channels() == 4);
    REQUIRE(t.height() == 1);
    REQUIRE(t.width() == 1);
    CHECK(t(0, 0, 0) == 1.0f);
    CHECK(t(1, 0, 0) == 2.0f);
    CHECK(t(2, 0, 0) == 3.0f);
    CHECK(t(3, 0, 0) == 4.0f);

    const Image back = depth_to_space(t);
    CHECK(back == img);
}

TEST_CASE("channel groups follow the input channel")
{
    Image img(3, 2, 2);
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < 4; ++k) {
            img(c, k / 2, k % 2) = static_cast<float>(10 * c + k);
        }
    }
    const FeatureTensor t = space_to_depth(img);
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < 4; ++k) {
            CHECK(t(4 * c + k, 0, 0) == static_cast<float>(10 * c + k));
        }
    }
}

TEST_CASE("shape arithmetic on a DAVIS-sized frame")
{
    const Image frame(3, 480, 854);
    const FeatureTensor t = space_to_depth(frame);
    CHECK(t.channels() == 12);
    CHECK(t.height() == 240);
    CHECK(t.width() == 427);
    const Image back = depth_to_space(t);
    CHECK(back.channels() == 3);
    CHECK(back.height() == 480);
    CHECK(back.width() == 854);
}

TEST_CASE("rearrangements are exact mutual inverses on random data")
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        const int c = 1 + static_cast<int>(rng() % 4);
        const int h = 2 * (1 + static_cast<int>(rng() % 9));
        const int w = 2 * (1 + static_cast<int>(rng() % 9));
        const Image x = testing::random_image(c, h, w, rng());
        CHECK(depth_to_space(space_to_depth(x)) == x);
        const FeatureTensor t = testing::random_image(4 * c, h / 2, w / 2, rng());
        CHECK(space_to_depth(depth_to_space(t)) == t);
    }
}

TEST_CASE("odd extents and bad channel counts are dimension errors")
{
    CHECK_THROWS_AS(space_to_depth(Image(3, 3, 4)), DimensionError);
    CHECK_THROWS_AS(space_to_depth(Image(3, 4, 5)), DimensionError);
    CHECK_THROWS_AS(depth_to_space(Image(6, 2, 2)), DimensionError);
}
