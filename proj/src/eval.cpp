// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <spdlog/spdlog.h>

#include "dvdnet/error.hpp"
#include "dvdnet/image_io.hpp"
#include "dvdnet/noise.hpp"

namespace dvdnet {

namespace {

double squared_error_sum(const Image& reference, const Image& estimate, double peak)
{
    if (!reference.same_shape(estimate)) {
        throw DimensionError("PSNR needs images of identical shape");
    }
    const auto ref = reference.data();
    const auto est = estimate.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double e = std::clamp(static_cast<double>(est[i]), 0.0, peak);
        const double d = static_cast<double>(ref[i]) - e;
        sum += d * d;
    }
    return sum;
}

double psnr_from_mse(double mse, double peak)
{
    if (mse == 0.0) {
        return kPsnrInfinity;
    }
    return 10.0 * std::log10(peak * peak / mse);
}

} // namespace

double clipped_mse(const Image& reference, const Image& estimate, double peak)
{
    if (reference.size() == 0) {
        throw DimensionError("PSNR of an empty image");
    }
    return squared_error_sum(reference, estimate, peak) / static_cast<double>(reference.size());
}

double psnr(const Image& reference, const Image& estimate, double peak)
{
    return psnr_from_mse(clipped_mse(reference, estimate, peak), peak);
}

std::string to_string(SequencePsnrMode mode)
{
    return mode == SequencePsnrMode::aggregate_mse ? "aggregate-mse" : "mean-frame-psnr";
}

double psnr_seq(const FrameSequence& reference, const FrameSequence& estimate, SequencePsnrMode mode, double peak)
{
    if (reference.size() != estimate.size()) {
        throw DimensionError("sequences differ in length");
    }
    if (reference.size() == 0) {
        throw DimensionError("PSNR of an empty sequence");
    }
    if (mode == SequencePsnrMode::mean_frame_psnr) {
        double sum = 0.0;
        for (std::size_t i = 0; i < reference.size(); ++i) {
            sum += psnr(reference.frames[i], estimate.frames[i], peak);
        }
        return sum / static_cast<double>(reference.size());
    }
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        sq += squared_error_sum(reference.frames[i], estimate.frames[i], peak);
        count += reference.frames[i].size();
    }
    return psnr_from_mse(sq / static_cast<double>(count), peak);
}

double BenchmarkReport::mean_psnr(double sigma_8bit) const
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (!e.failed && e.sigma_8bit == sigma_8bit) {
            sum += e.denoised_psnr;
            ++n;
        }
    }
    return n == 0 ? std::nan("") : sum / static_cast<double>(n);
}

double BenchmarkReport::mean_noisy_psnr(double sigma_8bit) const
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (!e.failed && e.sigma_8bit == sigma_8bit) {
            sum += e.noisy_psnr;
            ++n;
        }
    }
    return n == 0 ? std::nan("") : sum / static_cast<double>(n);
}

bool BenchmarkReport::any_failed() const
{
    return std::any_of(entries.begin(), entries.end(), [](const BenchmarkEntry& e) { return e.failed; });
}

std::string BenchmarkReport::to_table() const
{
    std::ostringstream os;
    char line[256];
    os << "Comparison of PSNR on the " << testset << " testset (PSNR_seq: " << to_string(mode) << ")\n";
    std::snprintf(line, sizeof(line), "%-12s %10s %10s\n", "", "DVDnet", "Noisy");
    os << line;
    for (double s : sigmas_8bit) {
        std::snprintf(line, sizeof(line), "sigma = %-4g %10.2f %10.2f\n", s, mean_psnr(s), mean_noisy_psnr(s));
        os << line;
    }
    if (!entries.empty()) {
        os << '\n';
        std::snprintf(line, sizeof(line), "%-20s %6s %7s %10s %10s %10s\n", "sequence", "sigma", "frames", "noisy",
                      "denoised", "s/frame");
        os << line;
        for (const auto& e : entries) {
            if (e.failed) {
                std::snprintf(line, sizeof(line), "%-20s %6g FAILED: %s\n", e.sequence.c_str(), e.sigma_8bit,
                              e.error.c_str());
            } else {
                std::snprintf(line, sizeof(line), "%-20s %6g %7zu %10.2f %10.2f %10.3f\n", e.sequence.c_str(),
                              e.sigma_8bit, e.frames, e.noisy_psnr, e.denoised_psnr, e.seconds_per_frame);
            }
            os << line;
        }
    }
    return os.str();
}

namespace {

nlohmann::json number_or_string(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return nullptr;
    }
    return v;
}

} // namespace

nlohmann::json BenchmarkReport::to_json() const
{
    nlohmann::json j;
    j["testset"] = testset;
    j["psnr_seq_mode"] = to_string(mode);
    j["config"] = config;
    j["sigmas"] = sigmas_8bit;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json row{{"sequence", e.sequence}, {"sigma", e.sigma_8bit}, {"frames", e.frames},
                           {"failed", e.failed}};
        if (e.failed) {
            row["error"] = e.error;
        } else {
            row["noisy_psnr"] = number_or_string(e.noisy_psnr);
            row["denoised_psnr"] = number_or_string(e.denoised_psnr);
            row["seconds_per_frame"] = e.seconds_per_frame;
        }
        j["entries"].push_back(row);
    }
    j["means"] = nlohmann::json::array();
    for (double s : sigmas_8bit) {
        j["means"].push_back(
            {{"sigma", s}, {"denoised_psnr", number_or_string(mean_psnr(s))}, {"noisy_psnr", number_or_string(mean_noisy_psnr(s))}});
    }
    return j;
}

std::uint64_t corruption_seed(const std::string& sequence_name, double sigma_8bit, std::uint64_t base_seed)
{
    // FNV-1a over the name, mixed with sigma (in 1/1000 units) and the base.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : sequence_name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    h ^= static_cast<std::uint64_t>(std::llround(sigma_8bit * 1000.0)) * 0x9e3779b97f4a7c15ULL;
    h ^= base_seed + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
    return h;
}

BenchmarkReport run_benchmark(std::span<const BenchmarkSequence> testset, std::span<const double> sigmas_8bit,
                              const DenoiserParams& spatial, const DenoiserParams& temporal,
                              std::shared_ptr<const FlowBackend> backend, const PipelineConfig& base_config,
                              const BenchmarkOptions& options)
{
    if (testset.empty()) {
        throw DataError("benchmark testset is empty");
    }
    BenchmarkReport report;
    report.testset = options.testset;
    report.mode = options.mode;
    report.sigmas_8bit.assign(sigmas_8bit.begin(), sigmas_8bit.end());
    report.config = {{"temporal_radius", base_config.temporal_radius},
                     {"flow_backend", backend ? backend->name() : std::string("none")},
                     {"workers", base_config.workers},
                     {"max_frames", options.max_frames},
                     {"seed", options.seed}};

    for (double sigma : sigmas_8bit) {
        for (const auto& seq : testset) {
            BenchmarkEntry entry;
            entry.sequence = seq.name;
            entry.sigma_8bit = sigma;
            try {
                FrameSequence clean;
                const std::size_t n = std::min(seq.clean.size(), options.max_frames);
                // Ground truth is scored at 8-bit precision.
                for (std::size_t i = 0; i < n; ++i) {
                    clean.frames.push_back(quantize_8bit(seq.clean.frames[i]));
                }
                clean.validate();
                const std::uint64_t base = corruption_seed(seq.name, sigma, options.seed);
                FrameSequence noisy;
                for (std::size_t i = 0; i < clean.size(); ++i) {
                    noisy.frames.push_back(add_awgn(clean.frames[i], sigma_from_8bit(sigma), base + i));
                }
                PipelineConfig config = base_config;
                config.sigma = sigma_from_8bit(sigma);
                DenoisingPipeline pipeline(spatial, temporal, backend, config);
                const auto start = std::chrono::steady_clock::now();
                const FrameSequence denoised = pipeline.denoise(noisy);
                const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                entry.frames = clean.size();
                entry.noisy_psnr = psnr_seq(clean, noisy, options.mode);
                entry.denoised_psnr = psnr_seq(clean, denoised, options.mode);
                entry.seconds_per_frame = elapsed / static_cast<double>(clean.size());
                spdlog::info("{} sigma={} noisy {:.2f} dB -> denoised {:.2f} dB", seq.name, sigma, entry.noisy_psnr,
                             entry.denoised_psnr);
            } catch (const std::exception& e) {
                entry.failed = true;
                entry.error = e.what();
                spdlog::error("{} sigma={} failed: {}", seq.name, sigma, e.what());
            }
            report.entries.push_back(std::move(entry));
        }
    }
    return report;
}

nlohmann::json InferenceTiming::to_json() const
{
    return {{"frames", frames},
            {"seconds_per_frame", seconds_per_frame},
            {"spatial_per_frame", spatial_per_frame},
            {"flow_per_frame", flow_per_frame},
            {"temporal_per_frame", temporal_per_frame},
            {"total_seconds", total_seconds}};
}

InferenceTiming time_inference(const FrameSequence& noisy, const DenoiserParams& spatial,
                               const DenoiserParams& temporal, std::shared_ptr<const FlowBackend> backend,
                               PipelineConfig config)
{
    config.workers = 1;
    DenoisingPipeline pipeline(spatial, temporal, std::move(backend), config);
    pipeline.denoise(noisy);
    const auto& t = pipeline.last_timings();
    const auto frames = static_cast<double>(noisy.size());
    InferenceTiming timing;
    timing.frames = noisy.size();
    timing.total_seconds = t.total;
    timing.seconds_per_frame = t.total / frames;
    timing.spatial_per_frame = t.spatial / frames;
    timing.flow_per_frame = t.flow / frames;
    timing.temporal_per_frame = t.temporal / frames;
    return timing;
}

} // namespace dvdnet
