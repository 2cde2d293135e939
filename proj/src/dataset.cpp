// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include "dvdnet/blocks.hpp"
#include "dvdnet/error.hpp"
#include "dvdnet/image_io.hpp"
#include "dvdnet/noise.hpp"
#include "dvdnet/padding.hpp"

namespace dvdnet {

double augmentation_scale(int mode_index, const AugmentConfig& config)
{
    if (mode_index < 0 || mode_index >= kAugmentationModes) {
        throw DomainError("augmentation mode must be in 0..4");
    }
    return mode_index == 0 ? 1.0 : config.scales[static_cast<std::size_t>(mode_index - 1)];
}

Image rescale(const Image& image, double factor)
{
    if (!(factor > 0.0)) {
        throw DomainError("rescale factor must be positive");
    }
    const int h = std::max(1, static_cast<int>(std::lround(image.height() * factor)));
    const int w = std::max(1, static_cast<int>(std::lround(image.width() * factor)));
    if (h == image.height() && w == image.width()) {
        return image;
    }
    Image out(image.channels(), h, w);
    for (int c = 0; c < image.channels(); ++c) {
        const cv::Mat src(image.height(), image.width(), CV_32F,
                          const_cast<float*>(image.plane(c).data()));
        cv::Mat dst(h, w, CV_32F, out.plane(c).data());
        cv::resize(src, dst, dst.size(), 0, 0, cv::INTER_AREA);
    }
    return out;
}

Image augment_source(const Image& source, int mode_index, const AugmentConfig& config)
{
    const double scale = augmentation_scale(mode_index, config);
    return mode_index == 0 ? source : rescale(source, scale);
}

Image flip(const Image& image, bool horizontal, bool vertical)
{
    if (!horizontal && !vertical) {
        return image;
    }
    Image out(image.channels(), image.height(), image.width());
    const int h = image.height();
    const int w = image.width();
    for (int c = 0; c < image.channels(); ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out(c, y, x) = image(c, vertical ? h - 1 - y : y, horizontal ? w - 1 - x : x);
            }
        }
    }
    return out;
}

NoiseMap flip(const NoiseMap& map, bool horizontal, bool vertical)
{
    if (!horizontal && !vertical) {
        return map;
    }
    NoiseMap out(map.height(), map.width());
    const int h = map.height();
    const int w = map.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out(y, x) = map(vertical ? h - 1 - y : y, horizontal ? w - 1 - x : x);
        }
    }
    return out;
}

SpatialSample flip(SpatialSample sample, bool horizontal, bool vertical)
{
    sample.noisy = flip(sample.noisy, horizontal, vertical);
    sample.clean = flip(sample.clean, horizontal, vertical);
    sample.noise_map = flip(sample.noise_map, horizontal, vertical);
    return sample;
}

TemporalSample flip(TemporalSample sample, bool horizontal, bool vertical)
{
    for (auto& patch : sample.window) {
        patch = flip(patch, horizontal, vertical);
    }
    sample.clean_center = flip(sample.clean_center, horizontal, vertical);
    sample.noise_map = flip(sample.noise_map, horizontal, vertical);
    return sample;
}

namespace {

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

double draw_sigma(std::mt19937_64& rng, const SigmaRange& range)
{
    if (!(range.min_8bit >= 0.0) || range.max_8bit < range.min_8bit) {
        throw DomainError("invalid sigma range");
    }
    std::uniform_real_distribution<double> dist(range.min_8bit, range.max_8bit);
    return sigma_from_8bit(range.max_8bit == range.min_8bit ? range.min_8bit : dist(rng));
}

int draw_int(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn)
{
    const std::size_t n_workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                          std::max<std::size_t>(count, 1));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += n_workers) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    pool.clear();
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace

SpatialSampleGenerator::SpatialSampleGenerator(std::vector<Image> corpus, SpatialDatasetConfig config)
    : config_(config)
{
    if (corpus.empty()) {
        throw DataError("spatial corpus is empty");
    }
    if (config_.patch_size < 2 || config_.patch_size % 2 != 0) {
        throw ConfigError("patch size must be even and at least 2");
    }
    sources_.resize(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Image& img = corpus[i];
        if (img.channels() != 3) {
            throw DataError("corpus image " + std::to_string(i) + " is not RGB");
        }
        if (img.height() < config_.patch_size || img.width() < config_.patch_size) {
            throw DataError("corpus image " + std::to_string(i) + " is smaller than the " +
                            std::to_string(config_.patch_size) + " px patch");
        }
        for (int mode = 1; config_.augment.enabled && mode < kAugmentationModes; ++mode) {
            Image scaled = augment_source(img, mode, config_.augment);
            if (scaled.height() < config_.patch_size || scaled.width() < config_.patch_size) {
                spdlog::warn("corpus image {} at scale {} is smaller than the patch; mode {} falls back to identity",
                             i, augmentation_scale(mode, config_.augment), mode);
                continue;
            }
            sources_[i][mode] = std::move(scaled);
        }
        sources_[i][0] = std::move(corpus[i]);
    }
}

SpatialSample SpatialSampleGenerator::sample(std::size_t index) const
{
    auto rng = sample_rng(config_.seed, index, 1);
    const auto image_index = static_cast<std::size_t>(draw_int(rng, 0, static_cast<int>(sources_.size()) - 1));
    int mode = config_.augment.enabled ? draw_int(rng, 0, kAugmentationModes - 1) : 0;
    if (sources_[image_index][mode].empty()) {
        mode = 0;
    }
    const Image& src = sources_[image_index][mode];
    const int p = config_.patch_size;
    const int y0 = draw_int(rng, 0, src.height() - p);
    const int x0 = draw_int(rng, 0, src.width() - p);
    const double sigma = draw_sigma(rng, config_.sigma);
    const std::uint64_t noise_seed = rng();
    const bool hflip = mode != 0 && config_.augment.flips && draw_int(rng, 0, 1) == 1;
    const bool vflip = mode != 0 && config_.augment.flips && draw_int(rng, 0, 1) == 1;

    SpatialSample s;
    s.clean = src.crop(y0, x0, p, p);
    s.noisy = add_awgn(s.clean, sigma, noise_seed);
    s.noise_map = constant_noise_map(sigma, p, p);
    s.sigma = static_cast<float>(sigma);
    return flip(std::move(s), hflip, vflip);
}

std::vector<SpatialSample> extract_spatial_samples(std::span<const Image> corpus,
                                                   const SpatialDatasetConfig& config)
{
    if (corpus.empty()) {
        throw DataError("spatial corpus is empty");
    }
    SpatialSampleGenerator gen(std::vector<Image>(corpus.begin(), corpus.end()), config);
    std::vector<SpatialSample> out(config.count);
    parallel_for(config.count, config.workers, [&](std::size_t i) { out[i] = gen.sample(i); });
    return out;
}

std::vector<int> valid_centers(int sequence_length, int temporal_radius)
{
    std::vector<int> centers;
    for (int t = temporal_radius; t <= sequence_length - 1 - temporal_radius; ++t) {
        centers.push_back(t);
    }
    return centers;
}

TemporalSampleGenerator::TemporalSampleGenerator(std::vector<FrameSequence> sequences, DenoiserParams spatial,
                                                 std::shared_ptr<const FlowBackend> backend,
                                                 TemporalDatasetConfig config)
    : sequences_(std::move(sequences)), spatial_(std::move(spatial)), backend_(std::move(backend)),
      config_(config)
{
    if (spatial_.kind() != BlockKind::spatial || spatial_.mode() != NormMode::eval) {
        throw StateError("temporal samples need an eval-mode spatial block");
    }
    if (!backend_) {
        throw ConfigError("temporal samples need a flow backend");
    }
    if (sequences_.empty()) {
        throw DataError("sequence corpus is empty");
    }
    if (config_.crops_per_window < 1) {
        throw ConfigError("crops_per_window must be at least 1");
    }
    if (config_.patch_size < 2 || config_.patch_size % 2 != 0) {
        throw ConfigError("patch size must be even and at least 2");
    }
    const int window = 2 * config_.temporal_radius + 1;
    for (std::size_t i = 0; i < sequences_.size(); ++i) {
        const auto& seq = sequences_[i];
        seq.validate();
        if (static_cast<int>(seq.size()) < window) {
            throw DataError("sequence " + std::to_string(i) + " has " + std::to_string(seq.size()) +
                            " frames; at least " + std::to_string(window) + " are needed");
        }
        const Image& f = seq.frames.front();
        if (f.height() < config_.patch_size || f.width() < config_.patch_size) {
            throw DataError("sequence " + std::to_string(i) + " frames are smaller than the patch");
        }
    }
}

std::size_t TemporalSampleGenerator::window_count() const noexcept
{
    const auto k = static_cast<std::size_t>(config_.crops_per_window);
    return (config_.count + k - 1) / k;
}

std::vector<TemporalSample> TemporalSampleGenerator::window_samples(std::size_t window_index) const
{
    auto rng = sample_rng(config_.seed, window_index, 2);
    const int radius = config_.temporal_radius;
    const auto& seq = sequences_[static_cast<std::size_t>(draw_int(rng, 0, static_cast<int>(sequences_.size()) - 1))];
    const auto centers = valid_centers(static_cast<int>(seq.size()), radius);
    const int t = centers[static_cast<std::size_t>(draw_int(rng, 0, static_cast<int>(centers.size()) - 1))];
    const double sigma = draw_sigma(rng, config_.sigma);
    int mode = config_.augment.enabled ? draw_int(rng, 0, kAugmentationModes - 1) : 0;
    const int p = config_.patch_size;

    std::vector<Image> clean;
    for (int i = t - radius; i <= t + radius; ++i) {
        clean.push_back(augment_source(seq.frames[static_cast<std::size_t>(i)], mode, config_.augment));
    }
    if (clean.front().height() < p || clean.front().width() < p) {
        spdlog::warn("rescaled window smaller than the {} px patch; using identity mode", p);
        mode = 0;
        clean.clear();
        for (int i = t - radius; i <= t + radius; ++i) {
            clean.push_back(seq.frames[static_cast<std::size_t>(i)]);
        }
    }

    const int h = clean.front().height();
    const int w = clean.front().width();
    const NoiseMap full_map = constant_noise_map(sigma, h, w);
    const NoiseMap padded_map = pad_to_even(full_map);
    std::vector<Image> denoised;
    for (const auto& frame : clean) {
        const Image noisy = add_awgn(frame, sigma, rng());
        const PaddedFrame padded = pad_to_even(noisy);
        denoised.push_back(crop_to_original(spatial_forward(padded.frame, padded_map, spatial_), h, w));
    }
    const Image& center = denoised[static_cast<std::size_t>(radius)];
    std::vector<Image> aligned;
    for (std::size_t i = 0; i < denoised.size(); ++i) {
        aligned.push_back(static_cast<int>(i) == radius ? center : compensate(denoised[i], center, *backend_));
    }

    std::vector<TemporalSample> out;
    const std::size_t first = window_index * static_cast<std::size_t>(config_.crops_per_window);
    for (int k = 0; k < config_.crops_per_window && first + static_cast<std::size_t>(k) < config_.count; ++k) {
        const int y0 = draw_int(rng, 0, h - p);
        const int x0 = draw_int(rng, 0, w - p);
        const bool hflip = mode != 0 && config_.augment.flips && draw_int(rng, 0, 1) == 1;
        const bool vflip = mode != 0 && config_.augment.flips && draw_int(rng, 0, 1) == 1;
        TemporalSample s;
        for (const auto& frame : aligned) {
            s.window.push_back(frame.crop(y0, x0, p, p));
        }
        s.clean_center = clean[static_cast<std::size_t>(radius)].crop(y0, x0, p, p);
        s.noise_map = full_map.crop(y0, x0, p, p);
        s.sigma = static_cast<float>(sigma);
        out.push_back(flip(std::move(s), hflip, vflip));
    }
    return out;
}

TemporalSample TemporalSampleGenerator::sample(std::size_t index) const
{
    if (index >= config_.count) {
        throw DomainError("sample index out of range");
    }
    const auto k = static_cast<std::size_t>(config_.crops_per_window);
    auto crops = window_samples(index / k);
    return std::move(crops[index % k]);
}

std::vector<TemporalSample> build_temporal_samples(std::span<const FrameSequence> sequences,
                                                   const DenoiserParams& spatial,
                                                   std::shared_ptr<const FlowBackend> backend,
                                                   const TemporalDatasetConfig& config)
{
    TemporalSampleGenerator gen(std::vector<FrameSequence>(sequences.begin(), sequences.end()), spatial,
                                std::move(backend), config);
    std::vector<TemporalSample> out(config.count);
    const auto k = static_cast<std::size_t>(config.crops_per_window);
    parallel_for(gen.window_count(), config.workers, [&](std::size_t w) {
        auto crops = gen.window_samples(w);
        for (std::size_t j = 0; j < crops.size(); ++j) {
            out[w * k + j] = std::move(crops[j]);
        }
    });
    return out;
}

std::vector<Image> load_image_corpus(const std::filesystem::path& dir)
{
    std::vector<Image> images;
    for (const auto& file : list_png_files(dir)) {
        images.push_back(read_png(file));
    }
    if (images.empty()) {
        throw DataError("no PNG images in " + dir.string());
    }
    return images;
}

std::vector<FrameSequence> load_sequence_corpus(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> subdirs;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_directory()) {
            subdirs.push_back(entry.path());
        }
    }
    std::sort(subdirs.begin(), subdirs.end());
    std::vector<FrameSequence> sequences;
    for (const auto& sub : subdirs) {
        if (!list_png_files(sub).empty()) {
            sequences.push_back(read_frame_directory(sub));
        }
    }
    if (sequences.empty()) {
        throw DataError("no frame sequences under " + dir.string());
    }
    return sequences;
}

DatasetManifest parse_manifest(const nlohmann::json& json, const std::filesystem::path& base_dir)
{
    try {
        DatasetManifest m;
        for (const auto& p : json.at("corpus")) {
            std::filesystem::path path = p.get<std::string>();
            m.corpus.push_back(path.is_relative() && !base_dir.empty() ? base_dir / path : path);
        }
        m.count = json.at("count").get<std::size_t>();
        if (json.contains("sigma_range")) {
            const auto& r = json.at("sigma_range");
            m.sigma = {r.at(0).get<double>(), r.at(1).get<double>()};
        }
        m.seed = json.value("seed", std::uint64_t{0});
        m.patch_size = json.value("patch_size", 0);
        m.crops_per_window = json.value("crops_per_window", 1);
        if (json.contains("augmentation")) {
            const auto& a = json.at("augmentation");
            m.augment.enabled = a.value("enabled", true);
            m.augment.flips = a.value("flips", true);
            if (a.contains("scales")) {
                const auto scales = a.at("scales").get<std::vector<double>>();
                if (scales.size() != m.augment.scales.size()) {
                    throw ConfigError("augmentation needs exactly four scale factors");
                }
                std::copy(scales.begin(), scales.end(), m.augment.scales.begin());
            }
        }
        if (m.corpus.empty()) {
            throw ConfigError("manifest lists no corpus paths");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed dataset manifest: ") + e.what());
    }
}

DatasetManifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open manifest " + path.string());
    }
    nlohmann::json json;
    try {
        in >> json;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_manifest(json, path.parent_path());
}

nlohmann::json to_json(const DatasetManifest& m)
{
    nlohmann::json corpus = nlohmann::json::array();
    for (const auto& p : m.corpus) {
        corpus.push_back(p.string());
    }
    return {{"corpus", corpus},
            {"count", m.count},
            {"sigma_range", {m.sigma.min_8bit, m.sigma.max_8bit}},
            {"seed", m.seed},
            {"patch_size", m.patch_size},
            {"crops_per_window", m.crops_per_window},
            {"augmentation",
             {{"enabled", m.augment.enabled},
              {"scales", std::vector<double>(m.augment.scales.begin(), m.augment.scales.end())},
              {"flips", m.augment.flips}}}};
}

} // namespace dvdnet
