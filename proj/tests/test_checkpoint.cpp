// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "dvdnet/blocks.hpp"
#include "dvdnet/checkpoint.hpp"
#include "dvdnet/error.hpp"
#include "synthetic.hpp"

using namespace dvdnet;

namespace {

void require_same_params(const DenoiserParams& a, const DenoiserParams& b)
{
    REQUIRE(a.geometry() == b.geometry());
    REQUIRE(a.mode() == b.mode());
    REQUIRE(a.layers().size() == b.layers().size());
    for (std::size_t l = 0; l < a.layers().size(); ++l) {
        const auto& x = a.layers()[l];
        const auto& y = b.layers()[l];
        CHECK(x.spec == y.spec);
        CHECK(x.weight == y.weight);
        CHECK(x.bias == y.bias);
        CHECK(x.norm.has_value() == y.norm.has_value());
        if (x.norm && y.norm) {
            CHECK(x.norm->gamma == y.norm->gamma);
            CHECK(x.norm->running_var == y.norm->running_var);
        }
        CHECK(x.affine.has_value() == y.affine.has_value());
        if (x.affine && y.affine) {
            CHECK(x.affine->scale == y.affine->scale);
            CHECK(x.affine->shift == y.affine->shift);
        }
    }
}

} // namespace

TEST_CASE("eval-mode checkpoint round trip is bit exact")
{
    auto train = initialize_block<float>(BlockGeometry::spatial(16, 5), 3);
    testing::randomize_statistics(train, 4);
    const auto params = fold_batchnorm(train);
    const auto path = std::filesystem::temp_directory_path() / "dvdnet_ckpt_roundtrip.ckpt";
    save_checkpoint(path, params, {{"note", "x"}});
    const Checkpoint loaded = load_checkpoint(path);
    std::filesystem::remove(path);
    require_same_params(params, loaded.params);
    CHECK(loaded.metadata["note"] == "x");

    const Image noisy = testing::random_image(3, 16, 16, 9);
    const NoiseMap map(16, 16, 0.1f);
    CHECK(spatial_forward(noisy, map, params) == spatial_forward(noisy, map, loaded.params));
}

TEST_CASE("train-mode temporal checkpoint round trip")
{
    auto params = initialize_block<float>(BlockGeometry::temporal(8, 4), 5);
    testing::randomize_statistics(params, 6);
    const Checkpoint loaded = deserialize_checkpoint(serialize_checkpoint(params));
    require_same_params(params, loaded.params);
    CHECK(loaded.params.geometry().temporal_radius == 2);
}

TEST_CASE("header records geometry and channel order")
{
    const auto params = fold_batchnorm(initialize_block<float>(BlockGeometry::temporal(8, 3), 5));
    const std::string bytes = serialize_checkpoint(params);
    REQUIRE(bytes.substr(0, 8) == "DVDNCKPT");
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 8, 4);
    CHECK(version == kCheckpointVersion);
    std::uint64_t length = 0;
    std::memcpy(&length, bytes.data() + 12, 8);
    const auto header = nlohmann::json::parse(bytes.substr(20, length));
    CHECK(header["block"] == "temporal");
    CHECK(header["temporal_radius"] == 2);
    CHECK(header["window_length"] == 5);
    CHECK(header["mode"] == "eval");
    CHECK(header["channel_order"] == "s2d-raster-tl-tr-bl-br");
}

TEST_CASE("malformed checkpoints")
{
    const auto params = fold_batchnorm(initialize_block<float>(BlockGeometry::spatial(8, 3), 5));
    std::string bytes = serialize_checkpoint(params);

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), DataError);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 4)), DataError);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, 10)), DataError);

    std::string future = bytes;
    const std::uint32_t v = kCheckpointVersion + 1;
    std::memcpy(future.data() + 8, &v, 4);
    CHECK_THROWS_AS(deserialize_checkpoint(future), ConfigError);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/x.ckpt"), DataError);
}
