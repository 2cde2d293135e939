// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dvdnet/image.hpp"

namespace dvdnet {

/// Dense displacement field. For a flow estimated from (reference, moving),
/// pixel p of the reference corresponds to p + (u(p), v(p)) in the moving
/// frame; u is horizontal, v vertical, both in pixels.
class FlowField {
public:
    FlowField() = default;
    FlowField(int height, int width, float u = 0.0f, float v = 0.0f);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    float& u(int y, int x) noexcept { return u_[index(y, x)]; }
    float u(int y, int x) const noexcept { return u_[index(y, x)]; }
    float& v(int y, int x) noexcept { return v_[index(y, x)]; }
    float v(int y, int x) const noexcept { return v_[index(y, x)]; }

    bool matches(const Image& frame) const noexcept
    {
        return height_ == frame.height() && width_ == frame.width();
    }

    friend bool operator==(const FlowField&, const FlowField&) = default;

private:
    std::size_t index(int y, int x) const noexcept
    {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<float> u_;
    std::vector<float> v_;
};

/// Pluggable optical-flow estimator. Implementations must be safe to call
/// concurrently on distinct frame pairs.
class FlowBackend {
public:
    virtual ~FlowBackend() = default;
    virtual std::string name() const = 0;
    virtual FlowField estimate(const Image& reference, const Image& moving) const = 0;
};

/// Always returns zero flow.
class IdentityFlowBackend final : public FlowBackend {
public:
    std::string name() const override { return "identity"; }
    FlowField estimate(const Image& reference, const Image& moving) const override;
};

/// Coarse-to-fine block matching on a grayscale pyramid. At each level the
/// upsampled flow is refined by an integer SSD search around the prediction,
/// followed by a parabolic sub-pixel fit and a 3x3 median filter. Ties keep
/// the prediction, so textureless frames yield zero flow.
class BlockMatchingFlowBackend final : public FlowBackend {
public:
    struct Options {
        int levels = 4;
        int search_radius = 2;
        int patch_radius = 3;
        /// Coarsest level must be at least this many pixels on each side.
        int min_level_size = 16;
    };

    BlockMatchingFlowBackend() = default;
    explicit BlockMatchingFlowBackend(Options options) : options_(options) {}

    std::string name() const override { return "blockmatch"; }
    FlowField estimate(const Image& reference, const Image& moving) const override;

private:
    Options options_;
};

/// Delegates to an external program. The command template may contain
/// {reference}, {moving} and {output}; the first two are replaced with PNG
/// paths, the last with the `.flo` file the tool must write.
class ExternalFlowBackend final : public FlowBackend {
public:
    explicit ExternalFlowBackend(std::string command_template);

    std::string name() const override { return "external"; }
    FlowField estimate(const Image& reference, const Image& moving) const override;

private:
    std::string command_template_;
};

/// Resolves a backend id: "identity", "blockmatch", or "external:<command>".
/// Throws ConfigError for unknown ids.
std::shared_ptr<const FlowBackend> make_flow_backend(const std::string& id);

/// Checks shapes, then calls the backend.
FlowField estimate_flow(const Image& reference, const Image& moving, const FlowBackend& backend);

/// output(p) = frame(p + flow(p)), bilinear, coordinates clamped to the frame.
Image warp(const Image& frame, const FlowField& flow);

/// Aligns `neighbor` onto `reference`.
Image compensate(const Image& neighbor, const Image& reference, const FlowBackend& backend);

} // namespace dvdnet
