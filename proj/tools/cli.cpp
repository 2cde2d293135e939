// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dvdnet/checkpoint.hpp"
#include "dvdnet/dataset.hpp"
#include "dvdnet/error.hpp"
#include "dvdnet/eval.hpp"
#include "dvdnet/image_io.hpp"
#include "dvdnet/noise.hpp"
#include "dvdnet/pipeline.hpp"
#include "dvdnet/train.hpp"

namespace dvdnet::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kMaxSigma = 75.0;
constexpr double kTrainedSigma = 55.0;

struct Common {
    std::uint64_t seed = 0;
    int workers = 1;
};

struct DenoiseArgs {
    fs::path in;
    fs::path out;
    double sigma = 0.0;
    std::string spatial;
    std::string temporal;
    std::string flow = "blockmatch";
    int temporal_radius = kTemporalRadius;
};

struct AddNoiseArgs {
    fs::path in;
    fs::path out;
    double sigma = 0.0;
};

struct TrainArgs {
    std::string manifest;
    std::vector<std::string> corpus;
    std::optional<std::size_t> count;
    std::optional<int> patch_size;
    std::optional<double> sigma_min;
    std::optional<double> sigma_max;
    bool no_augment = false;
    int epochs = 80;
    int batch_size = 128;
    int orthogonalize_until = 60;
    std::string loss = "sum";
    std::string out_dir;
    std::string log;
    std::string init;
    // Temporal only.
    std::string spatial;
    std::string flow = "blockmatch";
    std::optional<int> crops_per_window;
};

struct BenchmarkArgs {
    fs::path testset;
    std::vector<double> sigmas{10, 20, 30, 40, 50};
    std::string spatial;
    std::string temporal;
    std::string flow = "blockmatch";
    int temporal_radius = kTemporalRadius;
    std::size_t max_frames = kMaxBenchmarkFrames;
    std::string psnr_mode = "aggregate";
    std::string report_json;
    std::string report_txt;
    bool timing = false;
};

std::string checkpoint_dir_default()
{
    const char* env = std::getenv(kCheckpointDirEnv);
    return env != nullptr && *env != '\0' ? std::string(env) : std::string("checkpoints");
}

std::string resolve_checkpoint(const std::string& given, const std::string& fallback_name)
{
    if (!given.empty()) {
        return given;
    }
    return (fs::path(checkpoint_dir_default()) / fallback_name).string();
}

void print_config(const std::string& command, nlohmann::json config)
{
    config["command"] = command;
    std::cout << "config " << config.dump() << std::endl;
}

void warn_sigma(double sigma)
{
    if (sigma > kTrainedSigma) {
        spdlog::warn("sigma {} is above the trained range [0, {}]", sigma, kTrainedSigma);
    }
}

DenoiserParams load_block(const std::string& path, BlockKind kind)
{
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.params.kind() != kind) {
        throw ConfigError(path + " holds a " + to_string(ckpt.params.kind()) + " block, expected " +
                          to_string(kind));
    }
    return std::move(ckpt.params);
}

int run_add_noise(const AddNoiseArgs& args, const Common& common)
{
    warn_sigma(args.sigma);
    print_config("add-noise", {{"in", args.in.string()},
                               {"out", args.out.string()},
                               {"sigma", args.sigma},
                               {"seed", common.seed}});
    const FrameSequence clean = read_frame_directory(args.in);
    FrameSequence noisy;
    noisy.frame_rate = clean.frame_rate;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        noisy.frames.push_back(add_awgn(clean.frames[i], sigma_from_8bit(args.sigma), common.seed + i));
    }
    write_frame_directory(args.out, noisy);
    spdlog::info("wrote {} noisy frames to {}", noisy.size(), args.out.string());
    return kExitOk;
}

int run_denoise(const DenoiseArgs& args, const Common& common)
{
    warn_sigma(args.sigma);
    const std::string spatial_path = resolve_checkpoint(args.spatial, "spatial_final.ckpt");
    const std::string temporal_path = resolve_checkpoint(args.temporal, "temporal_final.ckpt");
    print_config("denoise", {{"in", args.in.string()},
                             {"out", args.out.string()},
                             {"sigma", args.sigma},
                             {"spatial", spatial_path},
                             {"temporal", temporal_path},
                             {"flow", args.flow},
                             {"temporal_radius", args.temporal_radius},
                             {"workers", common.workers},
                             {"seed", common.seed}});
    PipelineConfig config;
    config.temporal_radius = args.temporal_radius;
    config.sigma = sigma_from_8bit(args.sigma);
    config.flow_backend = args.flow;
    config.workers = common.workers;
    DenoisingPipeline pipeline(load_block(spatial_path, BlockKind::spatial),
                               load_block(temporal_path, BlockKind::temporal), make_flow_backend(args.flow), config);
    pipeline.progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\rdenoised " << done << "/" << total << std::flush;
        if (done == total) {
            std::cerr << '\n';
        }
    };
    const FrameSequence noisy = read_frame_directory(args.in);
    const FrameSequence out = pipeline.denoise(noisy);
    write_frame_directory(args.out, out);
    const auto& t = pipeline.last_timings();
    spdlog::info("{} frames in {:.2f} s (spatial {:.2f}, flow {:.2f}, temporal {:.2f})", out.size(), t.total,
                 t.spatial, t.flow, t.temporal);
    return kExitOk;
}

DatasetManifest resolve_manifest(const TrainArgs& args, int default_patch)
{
    DatasetManifest m;
    if (!args.manifest.empty()) {
        m = load_manifest(args.manifest);
    }
    if (!args.corpus.empty()) {
        m.corpus.assign(args.corpus.begin(), args.corpus.end());
    }
    if (args.count) {
        m.count = *args.count;
    }
    if (args.patch_size) {
        m.patch_size = *args.patch_size;
    }
    if (m.patch_size == 0) {
        m.patch_size = default_patch;
    }
    if (args.sigma_min) {
        m.sigma.min_8bit = *args.sigma_min;
    }
    if (args.sigma_max) {
        m.sigma.max_8bit = *args.sigma_max;
    }
    if (args.crops_per_window) {
        m.crops_per_window = *args.crops_per_window;
    }
    if (args.no_augment) {
        m.augment.enabled = false;
    }
    if (m.corpus.empty()) {
        throw ConfigError("training needs --manifest or --corpus");
    }
    if (m.count == 0) {
        throw ConfigError("training needs a positive sample count");
    }
    return m;
}

TrainConfig resolve_train_config(const TrainArgs& args, const Common& common, const DatasetManifest& m)
{
    TrainConfig config;
    config.epochs = args.epochs;
    config.batch_size = args.batch_size;
    config.orthogonalize_until_epoch = args.orthogonalize_until;
    config.sigma = m.sigma;
    config.seed = common.seed;
    if (args.loss == "mean") {
        config.loss_normalization = LossNormalization::mean_per_pixel;
    }
    config.checkpoint_dir = args.out_dir.empty() ? fs::path(checkpoint_dir_default()) : fs::path(args.out_dir);
    if (!args.log.empty()) {
        config.log_path = fs::path(args.log);
    }
    config.validate();
    return config;
}

nlohmann::json train_echo(const TrainArgs& args, const Common& common, const DatasetManifest& m,
                          const TrainConfig& config)
{
    return {{"dataset", to_json(m)},
            {"train", config.to_json()},
            {"checkpoint_dir", config.checkpoint_dir->string()},
            {"log", args.log},
            {"init", args.init},
            {"workers", common.workers}};
}

int run_train_spatial(const TrainArgs& args, const Common& common)
{
    const DatasetManifest m = resolve_manifest(args, kSpatialPatchSize);
    const TrainConfig config = resolve_train_config(args, common, m);
    print_config("train-spatial", train_echo(args, common, m, config));

    std::vector<Image> corpus;
    for (const auto& dir : m.corpus) {
        auto images = load_image_corpus(dir);
        corpus.insert(corpus.end(), std::make_move_iterator(images.begin()), std::make_move_iterator(images.end()));
    }
    SpatialDatasetConfig data;
    data.count = m.count;
    data.sigma = m.sigma;
    data.seed = m.seed;
    data.patch_size = m.patch_size;
    data.augment = m.augment;
    data.workers = common.workers;
    const auto samples = extract_spatial_samples(corpus, data);
    spdlog::info("extracted {} spatial samples from {} images", samples.size(), corpus.size());

    std::optional<DenoiserParams> initial;
    if (!args.init.empty()) {
        initial = load_block(args.init, BlockKind::spatial);
    }
    train_spatial(samples, config, std::move(initial));
    spdlog::info("wrote {}", (*config.checkpoint_dir / "spatial_final.ckpt").string());
    return kExitOk;
}

int run_train_temporal(const TrainArgs& args, const Common& common)
{
    const DatasetManifest m = resolve_manifest(args, kTemporalPatchSize);
    const TrainConfig config = resolve_train_config(args, common, m);
    const std::string spatial_path = resolve_checkpoint(args.spatial, "spatial_final.ckpt");
    auto echo = train_echo(args, common, m, config);
    echo["spatial"] = spatial_path;
    echo["flow"] = args.flow;
    print_config("train-temporal", echo);

    const DenoiserParams spatial = load_block(spatial_path, BlockKind::spatial);
    std::vector<FrameSequence> sequences;
    for (const auto& dir : m.corpus) {
        auto seqs = load_sequence_corpus(dir);
        sequences.insert(sequences.end(), std::make_move_iterator(seqs.begin()), std::make_move_iterator(seqs.end()));
    }
    TemporalDatasetConfig data;
    data.count = m.count;
    data.sigma = m.sigma;
    data.seed = m.seed;
    data.patch_size = m.patch_size;
    data.crops_per_window = m.crops_per_window;
    data.augment = m.augment;
    data.workers = common.workers;
    const auto samples = build_temporal_samples(sequences, spatial, make_flow_backend(args.flow), data);
    spdlog::info("built {} temporal samples from {} sequences", samples.size(), sequences.size());

    std::optional<DenoiserParams> initial;
    if (!args.init.empty()) {
        initial = load_block(args.init, BlockKind::temporal);
    }
    train_temporal(samples, &spatial, config, std::move(initial));
    spdlog::info("wrote {}", (*config.checkpoint_dir / "temporal_final.ckpt").string());
    return kExitOk;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
}

int run_benchmark_command(const BenchmarkArgs& args, const Common& common)
{
    for (double s : args.sigmas) {
        warn_sigma(s);
    }
    const std::string spatial_path = resolve_checkpoint(args.spatial, "spatial_final.ckpt");
    const std::string temporal_path = resolve_checkpoint(args.temporal, "temporal_final.ckpt");
    print_config("benchmark", {{"testset", args.testset.string()},
                               {"sigmas", args.sigmas},
                               {"spatial", spatial_path},
                               {"temporal", temporal_path},
                               {"flow", args.flow},
                               {"temporal_radius", args.temporal_radius},
                               {"max_frames", args.max_frames},
                               {"psnr_mode", args.psnr_mode},
                               {"report_json", args.report_json},
                               {"report_txt", args.report_txt},
                               {"timing", args.timing},
                               {"workers", common.workers},
                               {"seed", common.seed}});

    std::vector<BenchmarkSequence> testset;
    for (const auto& dir : list_sequence_dirs(args.testset)) {
        testset.push_back({dir.filename().string(), read_frame_directory(dir)});
    }
    const auto spatial = load_block(spatial_path, BlockKind::spatial);
    const auto temporal = load_block(temporal_path, BlockKind::temporal);
    const auto backend = make_flow_backend(args.flow);
    PipelineConfig config;
    config.temporal_radius = args.temporal_radius;
    config.flow_backend = args.flow;
    config.workers = common.workers;
    BenchmarkOptions options;
    options.testset = args.testset.filename().string();
    options.max_frames = args.max_frames;
    options.seed = common.seed;
    options.mode = args.psnr_mode == "mean-frame" ? SequencePsnrMode::mean_frame_psnr : SequencePsnrMode::aggregate_mse;

    const BenchmarkReport report = run_benchmark(testset, args.sigmas, spatial, temporal, backend, config, options);
    nlohmann::json json = report.to_json();
    if (args.timing && !testset.empty() && !args.sigmas.empty()) {
        // Serialized run on the first sequence at the first noise level.
        const auto& seq = testset.front();
        FrameSequence noisy;
        const std::size_t n = std::min(seq.clean.size(), args.max_frames);
        const auto base = corruption_seed(seq.name, args.sigmas.front(), common.seed);
        for (std::size_t i = 0; i < n; ++i) {
            noisy.frames.push_back(add_awgn(seq.clean.frames[i], sigma_from_8bit(args.sigmas.front()), base + i));
        }
        config.sigma = sigma_from_8bit(args.sigmas.front());
        const InferenceTiming timing = time_inference(noisy, spatial, temporal, backend, config);
        json["timing"] = timing.to_json();
        json["timing"]["sequence"] = seq.name;
    }
    const std::string table = report.to_table();
    std::cout << table;
    if (!args.report_txt.empty()) {
        write_text(args.report_txt, table);
    }
    if (!args.report_json.empty()) {
        write_text(args.report_json, json.dump(2) + "\n");
    }
    return report.any_failed() ? kExitFailure : kExitOk;
}

void add_sigma_option(CLI::App* cmd, double& sigma)
{
    cmd->add_option("--sigma", sigma, "Noise standard deviation on the 8-bit scale")
        ->required()
        ->check(CLI::Range(0.0, kMaxSigma));
}

void add_train_options(CLI::App* cmd, TrainArgs& args)
{
    cmd->add_option("--manifest", args.manifest, "Dataset manifest (JSON)");
    cmd->add_option("--corpus", args.corpus, "Corpus directories (override the manifest)");
    cmd->add_option("--count", args.count, "Number of training samples")->check(CLI::PositiveNumber);
    cmd->add_option("--patch-size", args.patch_size, "Training patch size");
    cmd->add_option("--sigma-min", args.sigma_min, "Lowest training noise level (8-bit scale)")
        ->check(CLI::Range(0.0, kMaxSigma));
    cmd->add_option("--sigma-max", args.sigma_max, "Highest training noise level (8-bit scale)")
        ->check(CLI::Range(0.0, kMaxSigma));
    cmd->add_flag("--no-augment", args.no_augment, "Disable rescale/flip augmentation");
    cmd->add_option("--epochs", args.epochs, "Training epochs")->check(CLI::Range(1, 80));
    cmd->add_option("--batch-size", args.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    cmd->add_option("--orthogonalize-until", args.orthogonalize_until,
                    "Orthogonalize kernels after each step before this epoch")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--loss", args.loss, "Loss normalization")->check(CLI::IsMember({"sum", "mean"}));
    cmd->add_option("--out-dir", args.out_dir, std::string("Checkpoint directory (default $") + kCheckpointDirEnv +
                                                   " or ./checkpoints)");
    cmd->add_option("--log", args.log, "Training log (line-delimited JSON)");
    cmd->add_option("--init", args.init, "Resume from a train-mode checkpoint");
}

int map_exception(const std::exception& e)
{
    spdlog::error("{}", e.what());
    if (dynamic_cast<const TrainingError*>(&e) != nullptr) {
        return kExitTraining;
    }
    if (dynamic_cast<const DataError*>(&e) != nullptr || dynamic_cast<const DimensionError*>(&e) != nullptr) {
        return kExitData;
    }
    if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const StateError*>(&e) != nullptr ||
        dynamic_cast<const ArityError*>(&e) != nullptr) {
        return kExitConfig;
    }
    if (dynamic_cast<const DomainError*>(&e) != nullptr) {
        return kExitUsage;
    }
    return kExitFailure;
}

} // namespace

std::vector<fs::path> list_sequence_dirs(const fs::path& root)
{
    if (!fs::is_directory(root)) {
        throw DataError("not a directory: " + root.string());
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && !list_png_files(entry.path()).empty()) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) {
        throw DataError("no frame sequences under " + root.string());
    }
    return dirs;
}

int run_cli(int argc, const char* const* argv)
{
    if (spdlog::get("dvdnet-cli") == nullptr) {
        auto logger = spdlog::stderr_color_mt("dvdnet-cli");
        spdlog::set_default_logger(logger);
    }

    CLI::App app{"Two-stage video denoiser: spatial then motion-compensated temporal CNN"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a TOML/INI file");
    Common common;
    app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
    app.add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    DenoiseArgs denoise;
    auto* denoise_cmd = app.add_subcommand("denoise", "Denoise a directory of PNG frames");
    denoise_cmd->add_option("--in", denoise.in, "Input frame directory")->required();
    denoise_cmd->add_option("--out", denoise.out, "Output frame directory")->required();
    add_sigma_option(denoise_cmd, denoise.sigma);
    denoise_cmd->add_option("--spatial", denoise.spatial, "Spatial block checkpoint");
    denoise_cmd->add_option("--temporal", denoise.temporal, "Temporal block checkpoint");
    denoise_cmd->add_option("--flow", denoise.flow, "Flow backend: blockmatch | identity | external:<cmd>");
    denoise_cmd->add_option("--temporal-radius", denoise.temporal_radius, "Temporal radius T")
        ->check(CLI::NonNegativeNumber);

    AddNoiseArgs add_noise;
    auto* noise_cmd = app.add_subcommand("add-noise", "Corrupt a directory of PNG frames with AWGN");
    noise_cmd->add_option("--in", add_noise.in, "Input frame directory")->required();
    noise_cmd->add_option("--out", add_noise.out, "Output frame directory")->required();
    add_sigma_option(noise_cmd, add_noise.sigma);

    TrainArgs spatial_train;
    auto* spatial_cmd = app.add_subcommand("train-spatial", "Train the spatial block");
    add_train_options(spatial_cmd, spatial_train);

    TrainArgs temporal_train;
    auto* temporal_cmd = app.add_subcommand("train-temporal", "Train the temporal block");
    add_train_options(temporal_cmd, temporal_train);
    temporal_cmd->add_option("--spatial", temporal_train.spatial, "Trained spatial block checkpoint");
    temporal_cmd->add_option("--flow", temporal_train.flow, "Flow backend for motion compensation");
    temporal_cmd->add_option("--crops-per-window", temporal_train.crops_per_window,
                             "Patches cropped from each processed window")
        ->check(CLI::PositiveNumber);

    BenchmarkArgs bench;
    auto* bench_cmd = app.add_subcommand("benchmark", "PSNR benchmark over a testset of sequences");
    bench_cmd->add_option("--testset", bench.testset, "Directory of sequence directories")->required();
    bench_cmd->add_option("--sigmas", bench.sigmas, "Noise levels (8-bit scale)")
        ->delimiter(',')
        ->check(CLI::Range(0.0, kMaxSigma));
    bench_cmd->add_option("--spatial", bench.spatial, "Spatial block checkpoint");
    bench_cmd->add_option("--temporal", bench.temporal, "Temporal block checkpoint");
    bench_cmd->add_option("--flow", bench.flow, "Flow backend");
    bench_cmd->add_option("--temporal-radius", bench.temporal_radius, "Temporal radius T")
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--max-frames", bench.max_frames, "Truncate sequences to this many frames")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--psnr-mode", bench.psnr_mode, "Sequence PSNR: aggregate | mean-frame")
        ->check(CLI::IsMember({"aggregate", "mean-frame"}));
    bench_cmd->add_option("--report-json", bench.report_json, "Structured report path");
    bench_cmd->add_option("--report-txt", bench.report_txt, "Plain-text table path");
    bench_cmd->add_flag("--timing", bench.timing, "Add a serialized per-frame timing breakdown");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*denoise_cmd) {
            return run_denoise(denoise, common);
        }
        if (*noise_cmd) {
            return run_add_noise(add_noise, common);
        }
        if (*spatial_cmd) {
            return run_train_spatial(spatial_train, common);
        }
        if (*temporal_cmd) {
            return run_train_temporal(temporal_train, common);
        }
        if (*bench_cmd) {
            return run_benchmark_command(bench, common);
        }
    } catch (const std::exception& e) {
        return map_exception(e);
    }
    return kExitUsage;
}

} // namespace dvdnet::cli
