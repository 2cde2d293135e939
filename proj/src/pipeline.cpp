// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <thread>

#include "dvdnet/blocks.hpp"
#include "dvdnet/error.hpp"
#include "dvdnet/noise.hpp"

namespace dvdnet {

std::vector<int> temporal_window_indices(int t, int temporal_radius, int sequence_length)
{
    if (sequence_length < 1) {
        throw DomainError("sequence length must be at least 1");
    }
    if (t < 0 || t >= sequence_length) {
        throw DomainError("frame index " + std::to_string(t) + " outside [0, " + std::to_string(sequence_length) +
                          ")");
    }
    if (temporal_radius < 0) {
        throw DomainError("temporal radius must be non-negative");
    }
    std::vector<int> indices;
    indices.reserve(static_cast<std::size_t>(2 * temporal_radius + 1));
    const int n = sequence_length;
    for (int i = t - temporal_radius; i <= t + temporal_radius; ++i) {
        if (n == 1) {
            indices.push_back(0);
            continue;
        }
        // Mirror about 0 and n-1 without repeating the edge frame.
        const int period = 2 * (n - 1);
        int r = ((i % period) + period) % period;
        indices.push_back(r < n ? r : period - r);
    }
    return indices;
}

DenoisingPipeline::DenoisingPipeline(DenoiserParams spatial, DenoiserParams temporal,
                                     std::shared_ptr<const FlowBackend> backend, PipelineConfig config)
    : spatial_(std::move(spatial)), temporal_(std::move(temporal)), backend_(std::move(backend)),
      config_(std::move(config))
{
    if (spatial_.kind() != BlockKind::spatial) {
        throw ConfigError("first checkpoint is not a spatial block");
    }
    if (temporal_.kind() != BlockKind::temporal) {
        throw ConfigError("second checkpoint is not a temporal block");
    }
    if (spatial_.mode() != NormMode::eval || temporal_.mode() != NormMode::eval) {
        throw ConfigError("pipeline needs eval-mode (folded) blocks");
    }
    if (temporal_.geometry().temporal_radius != config_.temporal_radius) {
        throw ConfigError("temporal block was built for T=" + std::to_string(temporal_.geometry().temporal_radius) +
                          ", pipeline configured with T=" + std::to_string(config_.temporal_radius));
    }
    if (!(config_.sigma >= 0.0)) {
        throw ConfigError("sigma must be non-negative");
    }
    if (!backend_) {
        throw ConfigError("pipeline needs a flow backend");
    }
    config_.workers = std::max(config_.workers, 1);
}

namespace {

template <typename Fn>
void run_parallel(std::size_t count, int workers, Fn&& fn)
{
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(count, 1));
    if (n <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < count; i = next++) {
                        fn(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

FrameSequence DenoisingPipeline::denoise(const FrameSequence& sequence)
{
    sequence.validate();
    const Image& first = sequence.frames.front();
    if (first.channels() != 3) {
        throw DataError("frames must be RGB");
    }
    const int h = first.height();
    const int w = first.width();
    const int n = static_cast<int>(sequence.size());
    const NoiseMap map = pad_to_even(constant_noise_map(config_.sigma, h, w));

    const auto t0 = Clock::now();
    std::vector<Image> stage1(sequence.size());
    run_parallel(sequence.size(), config_.workers, [&](std::size_t i) {
        const PaddedFrame padded = pad_to_even(sequence.frames[i]);
        stage1[i] = spatial_forward(padded.frame, map, spatial_);
        ++spatial_passes_;
    });
    timings_ = {};
    timings_.spatial = seconds_since(t0);

    FrameSequence out;
    out.frame_rate = sequence.frame_rate;
    out.frames.resize(sequence.size());
    std::mutex timing_mutex;
    std::atomic<std::size_t> done{0};
    run_parallel(sequence.size(), config_.workers, [&](std::size_t ti) {
        const int t = static_cast<int>(ti);
        const auto indices = temporal_window_indices(t, config_.temporal_radius, n);
        const auto f0 = Clock::now();
        std::vector<Image> window;
        window.reserve(indices.size());
        for (int idx : indices) {
            window.push_back(idx == t ? stage1[ti] : compensate(stage1[static_cast<std::size_t>(idx)], stage1[ti], *backend_));
        }
        const double flow_time = seconds_since(f0);
        const auto f1 = Clock::now();
        Image fused = temporal_forward(window, map, temporal_);
        ++temporal_passes_;
        out.frames[ti] = clipped(crop_to_original(fused, h, w));
        const double temporal_time = seconds_since(f1);
        {
            std::lock_guard lock(timing_mutex);
            timings_.flow += flow_time;
            timings_.temporal += temporal_time;
        }
        const std::size_t finished = ++done;
        if (progress) {
            progress(finished, sequence.size());
        }
    });
    timings_.total = seconds_since(t0);
    return out;
}

} // namespace dvdnet
