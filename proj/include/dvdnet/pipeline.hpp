// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dvdnet/flow.hpp"
#include "dvdnet/image.hpp"
#include "dvdnet/network.hpp"
#include "dvdnet/padding.hpp"

namespace dvdnet {

struct PipelineConfig {
    int temporal_radius = kTemporalRadius;
    /// Noise standard deviation on the [0,1] scale.
    double sigma = 0.0;
    std::string flow_backend = "blockmatch";
    int workers = 1;
};

/// Wall-clock seconds spent in each stage of one denoise() call.
struct StageTimings {
    double spatial = 0.0;
    double flow = 0.0;
    double temporal = 0.0;
    double total = 0.0;
};

/// Indices t-T..t+T reflected into [0, n): -1 -> 1, n -> n-2. A single-frame
/// sequence maps every slot to 0. Throws DomainError when t is outside [0, n).
std::vector<int> temporal_window_indices(int t, int temporal_radius, int sequence_length);

class DenoisingPipeline {
public:
    /// Throws ConfigError when the blocks are of the wrong kind, not in eval
    /// mode, or when the temporal block's window does not match the radius.
    DenoisingPipeline(DenoiserParams spatial, DenoiserParams temporal, std::shared_ptr<const FlowBackend> backend,
                      PipelineConfig config);

    /// Stage 1 denoises every frame once; stage 2 compensates the 2T
    /// neighbors onto each center and fuses the window. Output is clipped to
    /// [0,1] and identical for any worker count.
    FrameSequence denoise(const FrameSequence& sequence);

    /// Frames passed through the spatial block so far.
    std::size_t spatial_passes() const noexcept { return spatial_passes_.load(); }
    std::size_t temporal_passes() const noexcept { return temporal_passes_.load(); }
    const StageTimings& last_timings() const noexcept { return timings_; }
    const PipelineConfig& config() const noexcept { return config_; }

    /// Called with (frames done, total) after each stage-2 frame.
    std::function<void(std::size_t, std::size_t)> progress;

private:
    DenoiserParams spatial_;
    DenoiserParams temporal_;
    std::shared_ptr<const FlowBackend> backend_;
    PipelineConfig config_;
    std::atomic<std::size_t> spatial_passes_{0};
    std::atomic<std::size_t> temporal_passes_{0};
    StageTimings timings_;
};

} // namespace dvdnet
