// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvdnet/flow.hpp"
#include "dvdnet/image.hpp"
#include "dvdnet/network.hpp"
#include "dvdnet/pipeline.hpp"

namespace dvdnet {

/// Reported when the error is exactly zero.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kMaxBenchmarkFrames = 85;

/// Mean squared error after clipping `estimate` to [0, peak].
double clipped_mse(const Image& reference, const Image& estimate, double peak = 1.0);

/// 10 log10(peak^2 / MSE) with the estimate clipped to [0, peak].
double psnr(const Image& reference, const Image& estimate, double peak = 1.0);

enum class SequencePsnrMode {
    /// PSNR of the MSE pooled over every frame.
    aggregate_mse,
    /// Arithmetic mean of per-frame PSNR values.
    mean_frame_psnr,
};

std::string to_string(SequencePsnrMode mode);

double psnr_seq(const FrameSequence& reference, const FrameSequence& estimate,
                SequencePsnrMode mode = SequencePsnrMode::aggregate_mse, double peak = 1.0);

struct BenchmarkSequence {
    std::string name;
    FrameSequence clean;
};

struct BenchmarkEntry {
    std::string sequence;
    double sigma_8bit = 0.0;
    std::size_t frames = 0;
    double noisy_psnr = 0.0;
    double denoised_psnr = 0.0;
    double seconds_per_frame = 0.0;
    bool failed = false;
    std::string error;
};

struct BenchmarkReport {
    std::string testset;
    SequencePsnrMode mode = SequencePsnrMode::aggregate_mse;
    std::vector<double> sigmas_8bit;
    std::vector<BenchmarkEntry> entries;
    nlohmann::json config = nlohmann::json::object();

    /// Mean denoised PSNR over the successful entries at `sigma_8bit`.
    double mean_psnr(double sigma_8bit) const;
    double mean_noisy_psnr(double sigma_8bit) const;
    bool any_failed() const;

    /// Plain-text table: one row per sigma, then the per-sequence detail.
    std::string to_table() const;
    nlohmann::json to_json() const;
};

struct BenchmarkOptions {
    std::string testset = "testset";
    std::size_t max_frames = kMaxBenchmarkFrames;
    std::uint64_t seed = 0;
    SequencePsnrMode mode = SequencePsnrMode::aggregate_mse;
};

/// Seed used to corrupt a sequence at a sigma; stable across runs and builds.
std::uint64_t corruption_seed(const std::string& sequence_name, double sigma_8bit, std::uint64_t base_seed);

/// For each sigma: corrupt every sequence (first max_frames frames), denoise,
/// score and time it. Sequence failures are recorded, not thrown.
BenchmarkReport run_benchmark(std::span<const BenchmarkSequence> testset, std::span<const double> sigmas_8bit,
                              const DenoiserParams& spatial, const DenoiserParams& temporal,
                              std::shared_ptr<const FlowBackend> backend, const PipelineConfig& base_config,
                              const BenchmarkOptions& options = {});

struct InferenceTiming {
    std::size_t frames = 0;
    double seconds_per_frame = 0.0;
    double spatial_per_frame = 0.0;
    double flow_per_frame = 0.0;
    double temporal_per_frame = 0.0;
    double total_seconds = 0.0;

    nlohmann::json to_json() const;
};

/// Serial (single worker) timing of the whole pipeline on `noisy`.
InferenceTiming time_inference(const FrameSequence& noisy, const DenoiserParams& spatial,
                               const DenoiserParams& temporal, std::shared_ptr<const FlowBackend> backend,
                               PipelineConfig config);

} // namespace dvdnet
