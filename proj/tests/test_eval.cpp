// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <memory>

#include "dvdnet/error.hpp"
#include "dvdnet/eval.hpp"
#include "dvdnet/image_io.hpp"
#include "dvdnet/noise.hpp"
#include "synthetic.hpp"

using namespace dvdnet;

namespace {

Image offset(const Image& img, float delta)
{
    Image out = img;
    for (float& v : out.data()) {
        v += delta;
    }
    return out;
}

DenoiserParams identity_block(const BlockGeometry& geometry)
{
    auto params = fold_batchnorm(initialize_block<float>(geometry, 1));
    testing::zero_final_layer(params);
    return params;
}

std::vector<BenchmarkSequence> toy_testset()
{
    return {{"pan", testing::translating_sequence(24, 32, 5, 1, 0, 1)},
            {"tilt", testing::translating_sequence(24, 32, 4, 0, 1, 2)},
            {"long", testing::translating_sequence(16, 16, 90, 0, 0, 3)}};
}

} // namespace

TEST_CASE("psnr closed forms")
{
    const Image ref(3, 10, 10, 0.5f);
    CHECK(psnr(ref, ref) == kPsnrInfinity);
    CHECK(psnr(ref, offset(ref, 0.1f)) == doctest::Approx(20.0).epsilon(1e-5));
    CHECK(psnr(ref, offset(ref, -0.1f)) == doctest::Approx(20.0).epsilon(1e-5));
    CHECK_THROWS_AS(psnr(ref, Image(3, 10, 11)), DimensionError);
}

TEST_CASE("estimates are clipped before scoring")
{
    const Image ref(1, 4, 4, 1.0f);
    CHECK(psnr(ref, Image(1, 4, 4, 1.5f)) == kPsnrInfinity);
}

TEST_CASE("psnr symmetry and monotonicity")
{
    const Image a = testing::random_image(3, 16, 16, 1);
    const Image b = testing::random_image(3, 16, 16, 2);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)));
    const Image ref(3, 16, 16, 0.5f);
    double previous = kPsnrInfinity;
    for (float amp : {0.01f, 0.05f, 0.1f, 0.2f, 0.4f}) {
        const double p = psnr(ref, offset(ref, amp));
        CHECK(p < previous);
        previous = p;
    }
}

TEST_CASE("sequence psnr")
{
    FrameSequence ref;
    ref.frames = {Image(1, 10, 10, 0.5f), Image(1, 10, 10, 0.5f)};
    FrameSequence est;
    est.frames = {offset(ref.frames[0], 0.1f), offset(ref.frames[1], static_cast<float>(std::sqrt(0.03)))};
    CHECK(psnr_seq(ref, ref) == kPsnrInfinity);
    CHECK(psnr_seq(ref, est) == doctest::Approx(10.0 * std::log10(1.0 / 0.02)).epsilon(1e-5));
    CHECK(psnr_seq(ref, est) == doctest::Approx(16.99).epsilon(1e-3));
    const double mean_frame = (20.0 + 10.0 * std::log10(1.0 / 0.03)) / 2.0;
    CHECK(psnr_seq(ref, est, SequencePsnrMode::mean_frame_psnr) == doctest::Approx(mean_frame).epsilon(1e-5));

    FrameSequence one;
    one.frames = {est.frames[0]};
    FrameSequence one_ref;
    one_ref.frames = {ref.frames[0]};
    CHECK(psnr_seq(one_ref, one) == psnr(ref.frames[0], est.frames[0]));

    CHECK_THROWS_AS(psnr_seq(ref, one), DimensionError);
}

TEST_CASE("corruption seeds are stable and distinct")
{
    CHECK(corruption_seed("a", 25, 0) == corruption_seed("a", 25, 0));
    CHECK(corruption_seed("a", 25, 0) != corruption_seed("b", 25, 0));
    CHECK(corruption_seed("a", 25, 0) != corruption_seed("a", 50, 0));
    CHECK(corruption_seed("a", 25, 0) != corruption_seed("a", 25, 1));
}

TEST_CASE("benchmark report")
{
    const auto testset = toy_testset();
    const std::vector<double> sigmas{10.0, 30.0};
    PipelineConfig config;
    const auto report = run_benchmark(testset, sigmas, identity_block(BlockGeometry::spatial(8, 3)),
                                      identity_block(BlockGeometry::temporal(8, 3)),
                                      std::make_shared<IdentityFlowBackend>(), config, {.testset = "toy"});
    REQUIRE(report.entries.size() == 6);
    CHECK_FALSE(report.any_failed());
    for (double s : sigmas) {
        double sum = 0.0;
        double noisy_sum = 0.0;
        int n = 0;
        for (const auto& e : report.entries) {
            if (e.sigma_8bit == s) {
                sum += e.denoised_psnr;
                noisy_sum += e.noisy_psnr;
                ++n;
            }
        }
        CHECK(report.mean_psnr(s) == sum / n);
        CHECK(report.mean_noisy_psnr(s) == noisy_sum / n);
    }
    for (const auto& e : report.entries) {
        if (e.sequence == "long") {
            CHECK(e.frames == kMaxBenchmarkFrames);
        }
        CHECK(e.seconds_per_frame >= 0.0);
    }
    const auto j = report.to_json();
    CHECK(j["testset"] == "toy");
    CHECK(j["entries"].size() == 6);
    CHECK(j["means"].size() == 2);
    CHECK(j["psnr_seq_mode"] == "aggregate-mse");
    const std::string table = report.to_table();
    CHECK(table.find("Comparison of PSNR on the toy testset") != std::string::npos);
    CHECK(table.find("sigma = 30") != std::string::npos);

    const auto again = run_benchmark(testset, sigmas, identity_block(BlockGeometry::spatial(8, 3)),
                                     identity_block(BlockGeometry::temporal(8, 3)),
                                     std::make_shared<IdentityFlowBackend>(), config, {.testset = "toy"});
    CHECK(again.entries[0].noisy_psnr == report.entries[0].noisy_psnr);
}

TEST_CASE("noisy benchmark PSNR matches independent corruption of quantized ground truth")
{
    const auto testset = toy_testset();
    const std::vector<double> sigmas{20.0};
    const auto report = run_benchmark(std::span(testset).first(1), sigmas, identity_block(BlockGeometry::spatial(8, 3)),
                                      identity_block(BlockGeometry::temporal(8, 3)),
                                      std::make_shared<IdentityFlowBackend>(), {}, {.seed = 3});
    FrameSequence clean;
    FrameSequence noisy;
    const auto base = corruption_seed("pan", 20.0, 3);
    for (std::size_t i = 0; i < testset[0].clean.size(); ++i) {
        clean.frames.push_back(quantize_8bit(testset[0].clean.frames[i]));
        noisy.frames.push_back(add_awgn(clean.frames.back(), 20.0 / 255.0, base + i));
    }
    CHECK(report.entries[0].noisy_psnr == psnr_seq(clean, noisy));
}

TEST_CASE("empty sigma list gives a header-only report")
{
    const auto testset = toy_testset();
    const auto report = run_benchmark(testset, std::span<const double>(), identity_block(BlockGeometry::spatial(8, 3)),
                                      identity_block(BlockGeometry::temporal(8, 3)),
                                      std::make_shared<IdentityFlowBackend>(), {}, {.testset = "toy"});
    CHECK(report.entries.empty());
    CHECK(report.to_table().find("Comparison of PSNR") != std::string::npos);
    CHECK(report.to_json()["means"].empty());
}

TEST_CASE("failures are recorded per sequence")
{
    std::vector<BenchmarkSequence> testset{{"ok", testing::translating_sequence(16, 16, 3, 0, 0, 1)},
                                           {"broken", FrameSequence{{Image(3, 8, 8), Image(3, 8, 6)}, {}}}};
    const std::vector<double> sigmas{10.0};
    const auto report = run_benchmark(testset, sigmas, identity_block(BlockGeometry::spatial(8, 3)),
                                      identity_block(BlockGeometry::temporal(8, 3)),
                                      std::make_shared<IdentityFlowBackend>(), {});
    CHECK(report.any_failed());
    CHECK(report.entries[1].failed);
    CHECK_FALSE(report.entries[1].error.empty());
    CHECK(std::isfinite(report.mean_psnr(10.0)));
    CHECK_THROWS_AS(run_benchmark(std::span<const BenchmarkSequence>(), sigmas,
                                  identity_block(BlockGeometry::spatial(8, 3)),
                                  identity_block(BlockGeometry::temporal(8, 3)),
                                  std::make_shared<IdentityFlowBackend>(), {}),
                    DataError);
}

TEST_CASE("inference timing accounts for every stage")
{
    const auto seq = testing::translating_sequence(48, 64, 5, 1, 0, 1);
    auto spatial = initialize_block<float>(BlockGeometry::spatial(32, 6), 1);
    auto temporal = initialize_block<float>(BlockGeometry::temporal(32, 4), 2);
    PipelineConfig config;
    config.sigma = 0.1;
    const auto backend = std::make_shared<BlockMatchingFlowBackend>();
    const auto t = time_inference(seq, fold_batchnorm(spatial), fold_batchnorm(temporal), backend, config);
    CHECK(t.frames == 5);
    const double stages = t.spatial_per_frame + t.flow_per_frame + t.temporal_per_frame;
    CHECK(std::abs(stages - t.seconds_per_frame) <= 0.05 * t.seconds_per_frame);
    CHECK(t.to_json()["frames"] == 5);
    const auto t2 = time_inference(seq, fold_batchnorm(spatial), fold_batchnorm(temporal), backend, config);
    CHECK(std::abs(t2.seconds_per_frame - t.seconds_per_frame) < 0.5 * t.seconds_per_frame);
}
