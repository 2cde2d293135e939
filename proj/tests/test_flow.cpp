// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "dvdnet/error.hpp"
#include "dvdnet/eval.hpp"
#include "dvdnet/flo_io.hpp"
#include "dvdnet/flow.hpp"
#include "dvdnet/noise.hpp"
#include "synthetic.hpp"

using namespace dvdnet;

namespace {

double median(std::vector<double> v)
{
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

Image interior(const Image& img, int margin)
{
    return img.crop(margin, margin, img.height() - 2 * margin, img.width() - 2 * margin);
}

} // namespace

TEST_CASE("zero flow warp is the identity")
{
    const Image frame = testing::random_image(3, 13, 17, 1);
    CHECK(warp(frame, FlowField(13, 17)) == frame);
}

TEST_CASE("integer flow samples the displaced pixel")
{
    Image frame(1, 3, 4);
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 3; ++y) {
            frame(0, y, x) = static_cast<float>(x + 10 * y);
        }
    }
    const Image out = warp(frame, FlowField(3, 4, 1.0f, 0.0f));
    CHECK(out(0, 0, 0) == 1.0f);
    CHECK(out(0, 2, 2) == 23.0f);
    // Samples beyond the border clamp to the edge.
    CHECK(out(0, 1, 3) == 13.0f);
}

TEST_CASE("half-pixel flow interpolates bilinearly")
{
    Image frame(1, 1, 2);
    frame(0, 0, 0) = 0.0f;
    frame(0, 0, 1) = 1.0f;
    const Image out = warp(frame, FlowField(1, 2, 0.5f, 0.0f));
    CHECK(out(0, 0, 0) == doctest::Approx(0.5));
}

TEST_CASE("warp is linear in the frame")
{
    const Image a = testing::random_image(3, 16, 16, 2);
    const Image b = testing::random_image(3, 16, 16, 3);
    FlowField flow(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            flow.u(y, x) = 0.3f * static_cast<float>(x % 5) - 0.7f;
            flow.v(y, x) = 0.25f * static_cast<float>(y % 3);
        }
    }
    Image sum(3, 16, 16);
    for (std::size_t i = 0; i < sum.size(); ++i) {
        sum.data()[i] = 2.0f * a.data()[i] + b.data()[i];
    }
    const Image wa = warp(a, flow);
    const Image wb = warp(b, flow);
    const Image ws = warp(sum, flow);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        CHECK(ws.data()[i] == doctest::Approx(2.0f * wa.data()[i] + wb.data()[i]).epsilon(1e-5));
    }
}

TEST_CASE("flow shape mismatch is a dimension error")
{
    CHECK_THROWS_AS(warp(Image(3, 8, 8), FlowField(8, 9)), DimensionError);
}

TEST_CASE("blockmatch finds no motion between a frame and itself")
{
    const Image frame = testing::textured_image(64, 80, 4);
    const BlockMatchingFlowBackend backend;
    const FlowField flow = backend.estimate(frame, frame);
    double worst = 0.0;
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            worst = std::max(worst, static_cast<double>(std::hypot(flow.u(y, x), flow.v(y, x))));
        }
    }
    CHECK(worst < 0.5);
}

TEST_CASE("blockmatch recovers a 3 px translation")
{
    const auto seq = testing::translating_sequence(96, 128, 2, 3, 0, 5);
    const BlockMatchingFlowBackend backend;
    const FlowField flow = backend.estimate(seq.frames[0], seq.frames[1]);
    std::vector<double> errors;
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            errors.push_back(std::hypot(flow.u(y, x) - 3.0, flow.v(y, x)));
        }
    }
    CHECK(median(errors) < 0.5);
}

TEST_CASE("constant frames yield zero flow")
{
    const Image flat(3, 48, 48, 0.4f);
    const FlowField flow = BlockMatchingFlowBackend().estimate(flat, flat);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 48; ++x) {
            CHECK(flow.u(y, x) == 0.0f);
            CHECK(flow.v(y, x) == 0.0f);
        }
    }
}

TEST_CASE("compensation")
{
    const BlockMatchingFlowBackend backend;
    const Image reference = testing::textured_image(64, 64, 6);

    SUBCASE("of a frame onto itself is near exact")
    {
        const Image out = compensate(reference, reference, backend);
        CHECK(clipped_mse(reference, out) < 1e-3);
    }
    SUBCASE("undoes a translation in the interior")
    {
        const auto seq = testing::translating_sequence(64, 80, 2, 2, -1, 7);
        const Image out = compensate(seq.frames[1], seq.frames[0], backend);
        double worst = 0.0;
        const Image a = interior(out, 8);
        const Image b = interior(seq.frames[0], 8);
        for (std::size_t i = 0; i < a.size(); ++i) {
            worst = std::max(worst, static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
        }
        CHECK(worst < 0.02);
        CHECK(psnr(interior(seq.frames[0], 8), a) > psnr(interior(seq.frames[0], 8), interior(seq.frames[1], 8)));
    }
    SUBCASE("with the identity backend returns the neighbor")
    {
        const Image neighbor = testing::textured_image(64, 64, 8);
        CHECK(compensate(neighbor, reference, IdentityFlowBackend()) == neighbor);
    }
    SUBCASE("of noisy frames still improves alignment")
    {
        const auto seq = testing::translating_sequence(64, 80, 2, 3, 1, 9);
        const Image ref = add_awgn(seq.frames[0], 0.02, 1);
        const Image mov = add_awgn(seq.frames[1], 0.02, 2);
        const Image out = compensate(mov, ref, backend);
        CHECK(psnr(interior(seq.frames[0], 8), interior(out, 8)) >
              psnr(interior(seq.frames[0], 8), interior(seq.frames[1], 8)) + 5.0);
    }
}

TEST_CASE("backend registry")
{
    CHECK(make_flow_backend("identity")->name() == "identity");
    CHECK(make_flow_backend("blockmatch")->name() == "blockmatch");
    CHECK(make_flow_backend("external:true")->name() == "external");
    CHECK_THROWS_AS(make_flow_backend("pwc"), ConfigError);
    CHECK_THROWS_AS(make_flow_backend("external:"), ConfigError);
}

TEST_CASE(".flo encoding")
{
    FlowField flow(3, 5);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 5; ++x) {
            flow.u(y, x) = 0.25f * static_cast<float>(x) - 1.0f;
            flow.v(y, x) = -0.5f * static_cast<float>(y);
        }
    }
    const std::string bytes = encode_flo(flow);
    CHECK(bytes.size() == 12 + 3 * 5 * 8);
    CHECK(decode_flo(bytes) == flow);

    std::string bad = bytes;
    bad[0] = 0;
    CHECK_THROWS_AS(decode_flo(bad), DataError);
    CHECK_THROWS_AS(decode_flo(bytes.substr(0, bytes.size() - 1)), DataError);

    const auto path = std::filesystem::temp_directory_path() / "dvdnet_test.flo";
    write_flo(path, flow);
    CHECK(read_flo(path) == flow);
    std::filesystem::remove(path);
}

TEST_CASE("external backend reads the tool's .flo output")
{
    const auto path = std::filesystem::temp_directory_path() / "dvdnet_external_fixture.flo";
    write_flo(path, FlowField(16, 16, 1.5f, -0.5f));
    const auto backend = make_flow_backend("external:cp " + path.string() + " {output}");
    const Image frame = testing::textured_image(16, 16, 1);
    const FlowField flow = backend->estimate(frame, frame);
    CHECK(flow == FlowField(16, 16, 1.5f, -0.5f));

    const auto failing = make_flow_backend("external:false");
    CHECK_THROWS_AS(failing->estimate(frame, frame), DataError);

    const auto wrong_shape = make_flow_backend("external:cp " + path.string() + " {output}");
    CHECK_THROWS_AS(wrong_shape->estimate(testing::textured_image(8, 8, 1), testing::textured_image(8, 8, 1)),
                    DimensionError);
    std::filesystem::remove(path);
}
