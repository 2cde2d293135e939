// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "dvdnet/flow.hpp"
#include "dvdnet/image.hpp"
#include "dvdnet/network.hpp"

namespace dvdnet {

inline constexpr int kSpatialPatchSize = 50;
inline constexpr int kTemporalPatchSize = 44;
inline constexpr std::size_t kPaperSpatialSampleCount = 1024000;
inline constexpr std::size_t kPaperTemporalSampleCount = 450000;
inline constexpr int kAugmentationModes = 5;

/// Noise levels on the 8-bit scale; samples draw sigma uniformly.
struct SigmaRange {
    double min_8bit = 0.0;
    double max_8bit = 55.0;
};

struct AugmentConfig {
    bool enabled = true;
    /// Source rescale factor for modes 1..4 (mode 0 is the identity).
    std::array<double, 4> scales{0.9, 0.8, 0.7, 0.6};
    bool flips = true;
};

struct SpatialSample {
    Image noisy;
    NoiseMap noise_map;
    Image clean;
    /// [0,1] scale; equals every noise_map value.
    float sigma = 0.0f;
};

struct TemporalSample {
    /// 2T+1 co-located patches: denoised center, compensated neighbors.
    std::vector<Image> window;
    NoiseMap noise_map;
    Image clean_center;
    float sigma = 0.0f;
};

/// Rescale factor of an augmentation mode. Throws DomainError outside 0..4.
double augmentation_scale(int mode_index, const AugmentConfig& config = {});

/// Source image for a mode: mode 0 returns the input, modes 1..4 an
/// area-resampled copy.
Image augment_source(const Image& source, int mode_index, const AugmentConfig& config = {});

Image flip(const Image& image, bool horizontal, bool vertical);
NoiseMap flip(const NoiseMap& map, bool horizontal, bool vertical);
/// Same flip on every patch of the sample.
SpatialSample flip(SpatialSample sample, bool horizontal, bool vertical);
TemporalSample flip(TemporalSample sample, bool horizontal, bool vertical);

Image rescale(const Image& image, double factor);

struct SpatialDatasetConfig {
    std::size_t count = 0;
    SigmaRange sigma;
    std::uint64_t seed = 0;
    int patch_size = kSpatialPatchSize;
    AugmentConfig augment;
    int workers = 1;
};

/// Draws sample i reproducibly from (seed, i), independent of any other
/// sample, so producers can split the index range freely.
class SpatialSampleGenerator {
public:
    SpatialSampleGenerator(std::vector<Image> corpus, SpatialDatasetConfig config);

    SpatialSample sample(std::size_t index) const;
    const SpatialDatasetConfig& config() const noexcept { return config_; }

private:
    SpatialDatasetConfig config_;
    /// sources_[image][mode]; empty when the rescaled image is too small.
    std::vector<std::array<Image, kAugmentationModes>> sources_;
};

/// Exactly config.count samples (throws DataError on empty corpus or
/// images smaller than the patch).
std::vector<SpatialSample> extract_spatial_samples(std::span<const Image> corpus,
                                                   const SpatialDatasetConfig& config);

struct TemporalDatasetConfig {
    std::size_t count = 0;
    SigmaRange sigma;
    std::uint64_t seed = 0;
    int patch_size = kTemporalPatchSize;
    int temporal_radius = kTemporalRadius;
    /// Patches cropped from one processed window. 1 means every sample
    /// comes from its own window; larger values amortize the full-frame
    /// denoising and flow work across several co-located crops.
    int crops_per_window = 1;
    AugmentConfig augment;
    int workers = 1;
};

class TemporalSampleGenerator {
public:
    /// `spatial` must be an eval-mode spatial block (StateError otherwise).
    TemporalSampleGenerator(std::vector<FrameSequence> sequences, DenoiserParams spatial,
                            std::shared_ptr<const FlowBackend> backend, TemporalDatasetConfig config);

    std::size_t window_count() const noexcept;
    /// All crops of window w (crops_per_window of them).
    std::vector<TemporalSample> window_samples(std::size_t window_index) const;
    TemporalSample sample(std::size_t index) const;

private:
    std::vector<FrameSequence> sequences_;
    DenoiserParams spatial_;
    std::shared_ptr<const FlowBackend> backend_;
    TemporalDatasetConfig config_;
};

std::vector<TemporalSample> build_temporal_samples(std::span<const FrameSequence> sequences,
                                                   const DenoiserParams& spatial,
                                                   std::shared_ptr<const FlowBackend> backend,
                                                   const TemporalDatasetConfig& config);

/// Valid center indices t in [T, n-1-T] for a sequence of n frames.
std::vector<int> valid_centers(int sequence_length, int temporal_radius);

/// PNG images of a directory (spatial corpus).
std::vector<Image> load_image_corpus(const std::filesystem::path& dir);
/// Each subdirectory holding PNG frames is one sequence.
std::vector<FrameSequence> load_sequence_corpus(const std::filesystem::path& dir);

/// Dataset manifest (JSON):
///   {"corpus": ["dir", ...], "count": N, "sigma_range": [lo, hi],
///    "seed": S, "patch_size": P, "crops_per_window": K,
///    "augmentation": {"enabled": true, "scales": [..4..], "flips": true}}
struct DatasetManifest {
    std::vector<std::filesystem::path> corpus;
    std::size_t count = 0;
    SigmaRange sigma;
    std::uint64_t seed = 0;
    int patch_size = 0;
    int crops_per_window = 1;
    AugmentConfig augment;
};

DatasetManifest parse_manifest(const nlohmann::json& json, const std::filesystem::path& base_dir = {});
DatasetManifest load_manifest(const std::filesystem::path& path);
nlohmann::json to_json(const DatasetManifest& manifest);

} // namespace dvdnet
