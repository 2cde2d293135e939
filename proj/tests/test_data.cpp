// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dvdnet/dataset.hpp"
#include "dvdnet/error.hpp"
#include "dvdnet/image_io.hpp"
#include "synthetic.hpp"

using namespace dvdnet;

namespace {

DenoiserParams identity_spatial(int width = 8)
{
    auto params = fold_batchnorm(initialize_block<float>(BlockGeometry::spatial(width, 3), 1));
    testing::zero_final_layer(params);
    return params;
}

} // namespace

TEST_CASE("dataset constants")
{
    CHECK(kSpatialPatchSize == 50);
    CHECK(kTemporalPatchSize == 44);
    CHECK(kPaperSpatialSampleCount == 1024000);
    CHECK(kPaperTemporalSampleCount == 450000);
    CHECK(SigmaRange{}.min_8bit == 0.0);
    CHECK(SigmaRange{}.max_8bit == 55.0);
}

TEST_CASE("count zero gives an empty dataset")
{
    const std::vector<Image> corpus{testing::textured_image(64, 64, 1)};
    CHECK(extract_spatial_samples(corpus, {}).empty());
}

TEST_CASE("a patch-sized image forces the crop")
{
    const Image image = testing::textured_image(50, 50, 2);
    const std::vector<Image> corpus{image};
    SpatialDatasetConfig config;
    config.count = 3;
    config.seed = 4;
    const auto samples = extract_spatial_samples(corpus, config);
    REQUIRE(samples.size() == 3);
    for (const auto& s : samples) {
        CHECK(s.clean == image);
        CHECK(s.noisy.same_shape(image));
        CHECK(s.noise_map.matches(image));
        CHECK(s.sigma >= 0.0f);
        CHECK(s.sigma <= static_cast<float>(55.0 / 255.0));
        for (float v : s.noise_map.values()) {
            CHECK(v == s.sigma);
        }
    }
    CHECK_FALSE(samples[0].noisy == samples[1].noisy);
}

TEST_CASE("spatial samples are reproducible and worker independent")
{
    const std::vector<Image> corpus{testing::textured_image(96, 80, 1), testing::textured_image(70, 120, 2)};
    SpatialDatasetConfig config;
    config.count = 12;
    config.seed = 9;
    config.sigma = {5.0, 50.0};
    const auto a = extract_spatial_samples(corpus, config);
    config.workers = 3;
    const auto b = extract_spatial_samples(corpus, config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].noisy == b[i].noisy);
        CHECK(a[i].clean == b[i].clean);
        CHECK(a[i].clean.height() == 50);
        CHECK(a[i].sigma >= static_cast<float>(5.0 / 255.0) - 1e-7f);
        CHECK(a[i].sigma <= static_cast<float>(50.0 / 255.0) + 1e-7f);
    }
    const SpatialSampleGenerator gen(corpus, {.count = 12, .sigma = {5.0, 50.0}, .seed = 9});
    CHECK(gen.sample(7).noisy == a[7].noisy);
    config.seed = 10;
    CHECK_FALSE(extract_spatial_samples(corpus, config)[0].noisy == a[0].noisy);
}

TEST_CASE("spatial corpus errors")
{
    SpatialDatasetConfig config;
    config.count = 1;
    CHECK_THROWS_AS(extract_spatial_samples({}, config), DataError);
    const std::vector<Image> small{testing::textured_image(40, 60, 1)};
    CHECK_THROWS_AS(extract_spatial_samples(small, config), DataError);
    const std::vector<Image> ok{testing::textured_image(60, 60, 1)};
    config.sigma = {30.0, 10.0};
    CHECK_THROWS_AS(extract_spatial_samples(ok, config), DomainError);
}

TEST_CASE("augmentation helpers")
{
    CHECK(augmentation_scale(0) == 1.0);
    CHECK(augmentation_scale(1) == 0.9);
    CHECK(augmentation_scale(4) == 0.6);
    CHECK_THROWS_AS(augmentation_scale(5), DomainError);

    const Image img = testing::random_image(3, 20, 30, 1);
    CHECK(augment_source(img, 0) == img);
    const Image scaled = augment_source(img, 2);
    CHECK(scaled.height() == 16);
    CHECK(scaled.width() == 24);

    CHECK(flip(flip(img, true, false), true, false) == img);
    CHECK(flip(flip(img, false, true), false, true) == img);
    const Image h = flip(img, true, false);
    CHECK(h(1, 3, 0) == img(1, 3, 29));
    const Image v = flip(img, false, true);
    CHECK(v(2, 0, 5) == img(2, 19, 5));
}

TEST_CASE("temporal flips act on every patch alike")
{
    TemporalSample s;
    for (int i = 0; i < 5; ++i) {
        s.window.push_back(testing::random_image(3, 8, 8, static_cast<std::uint64_t>(i)));
    }
    s.clean_center = testing::random_image(3, 8, 8, 9);
    s.noise_map = NoiseMap(8, 8, 0.1f);
    const TemporalSample f = flip(s, true, true);
    for (int i = 0; i < 5; ++i) {
        CHECK(f.window[static_cast<std::size_t>(i)] == flip(s.window[static_cast<std::size_t>(i)], true, true));
    }
    CHECK(f.clean_center == flip(s.clean_center, true, true));
}

TEST_CASE("valid centers")
{
    CHECK(valid_centers(5, 2) == std::vector<int>{2});
    CHECK(valid_centers(7, 2) == std::vector<int>{2, 3, 4});
    CHECK(valid_centers(4, 2).empty());
}

TEST_CASE("static window at sigma zero reproduces the clean target")
{
    const Image frame = testing::textured_image(48, 48, 3);
    const std::vector<FrameSequence> seqs{testing::static_sequence(frame, 5)};
    TemporalDatasetConfig config;
    config.count = 2;
    config.sigma = {0.0, 0.0};
    config.augment.enabled = false;
    const auto samples =
        build_temporal_samples(seqs, identity_spatial(), std::make_shared<IdentityFlowBackend>(), config);
    REQUIRE(samples.size() == 2);
    for (const auto& s : samples) {
        REQUIRE(s.window.size() == 5);
        for (const auto& patch : s.window) {
            CHECK(patch == s.clean_center);
        }
        CHECK(s.clean_center.height() == 44);
    }
}

TEST_CASE("static noisy window patches differ only by noise")
{
    const Image frame = testing::textured_image(48, 48, 3);
    const std::vector<FrameSequence> seqs{testing::static_sequence(frame, 5)};
    TemporalDatasetConfig config;
    config.count = 1;
    config.sigma = {25.0, 25.0};
    config.augment.enabled = false;
    const auto s =
        build_temporal_samples(seqs, identity_spatial(), std::make_shared<IdentityFlowBackend>(), config)[0];
    const double sigma = 25.0 / 255.0;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
            double s2 = 0.0;
            for (std::size_t k = 0; k < s.window[i].size(); ++k) {
                const double d = s.window[i].data()[k] - s.window[j].data()[k];
                s2 += d * d;
            }
            const double stddev = std::sqrt(s2 / static_cast<double>(s.window[i].size()));
            CHECK(stddev == doctest::Approx(std::sqrt(2.0) * sigma).epsilon(0.05));
        }
    }
}

TEST_CASE("temporal sampling is reproducible and crop groups share a window")
{
    const std::vector<FrameSequence> seqs{testing::translating_sequence(56, 64, 7, 1, 1, 5)};
    TemporalDatasetConfig config;
    config.count = 4;
    config.crops_per_window = 2;
    config.seed = 3;
    const auto backend = std::make_shared<BlockMatchingFlowBackend>();
    const auto a = build_temporal_samples(seqs, identity_spatial(), backend, config);
    config.workers = 2;
    const auto b = build_temporal_samples(seqs, identity_spatial(), backend, config);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].window == b[i].window);
        CHECK(a[i].clean_center == b[i].clean_center);
    }
    CHECK(a[0].sigma == a[1].sigma);
    const TemporalSampleGenerator gen(seqs, identity_spatial(), backend, {.count = 4, .seed = 3, .crops_per_window = 2});
    CHECK(gen.sample(3).window == a[3].window);
}

TEST_CASE("temporal sampling preconditions")
{
    const std::vector<FrameSequence> short_seq{testing::static_sequence(testing::textured_image(48, 48, 1), 4)};
    TemporalDatasetConfig config;
    config.count = 1;
    const auto backend = std::make_shared<IdentityFlowBackend>();
    CHECK_THROWS_AS(build_temporal_samples(short_seq, identity_spatial(), backend, config), DataError);

    const std::vector<FrameSequence> seqs{testing::static_sequence(testing::textured_image(48, 48, 1), 5)};
    const auto train_mode = initialize_block<float>(BlockGeometry::spatial(8, 3), 1);
    CHECK_THROWS_AS(build_temporal_samples(seqs, train_mode, backend, config), StateError);
    CHECK_THROWS_AS(build_temporal_samples({}, identity_spatial(), backend, config), DataError);
}

TEST_CASE("manifest parsing")
{
    const auto dir = std::filesystem::temp_directory_path() / "dvdnet_manifest_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "manifest.json";
    std::ofstream(path) << R"({"corpus": ["images"], "count": 64, "sigma_range": [5, 40], "seed": 11,
                              "patch_size": 32, "augmentation": {"enabled": false}})";
    const DatasetManifest m = load_manifest(path);
    REQUIRE(m.corpus.size() == 1);
    CHECK(m.corpus[0] == dir / "images");
    CHECK(m.count == 64);
    CHECK(m.sigma.min_8bit == 5.0);
    CHECK(m.sigma.max_8bit == 40.0);
    CHECK(m.seed == 11);
    CHECK(m.patch_size == 32);
    CHECK_FALSE(m.augment.enabled);
    CHECK(parse_manifest(to_json(m)).count == 64);

    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(load_manifest(path), ConfigError);
    CHECK_THROWS_AS(parse_manifest(nlohmann::json{{"count", 3}}), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("PNG corpus loading")
{
    const auto dir = std::filesystem::temp_directory_path() / "dvdnet_corpus_test";
    std::filesystem::remove_all(dir);
    const auto seq = testing::translating_sequence(24, 32, 3, 1, 0, 2);
    write_frame_directory(dir / "seq_a", seq);
    write_png(dir / "single.png", seq.frames[0]);
    const auto sequences = load_sequence_corpus(dir);
    REQUIRE(sequences.size() == 1);
    CHECK(sequences[0].size() == 3);
    CHECK(sequences[0].frames[1] == quantize_8bit(seq.frames[1]));
    const auto images = load_image_corpus(dir);
    REQUIRE(images.size() == 1);
    CHECK(images[0].height() == 24);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(load_image_corpus(dir), DataError);
}
