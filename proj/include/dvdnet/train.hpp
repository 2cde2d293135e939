// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvdnet/dataset.hpp"
#include "dvdnet/losses.hpp"
#include "dvdnet/network.hpp"

namespace dvdnet {

/// Piecewise-constant learning rate: 1e-3 for epochs 0-49, 1e-4 for 50-59,
/// 1e-6 for 60-79.
class LearningRateSchedule {
public:
    struct Phase {
        int first_epoch;
        double rate;
    };

    LearningRateSchedule();
    LearningRateSchedule(std::vector<Phase> phases, int total_epochs);

    /// Throws DomainError when epoch is outside [0, total_epochs).
    double operator()(int epoch) const;
    int total_epochs() const noexcept { return total_epochs_; }
    const std::vector<Phase>& phases() const noexcept { return phases_; }

private:
    std::vector<Phase> phases_;
    int total_epochs_ = 0;
};

/// The default schedule evaluated at `epoch`.
double learning_rate(int epoch);

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    int epochs = 80;
    int batch_size = 128;
    int orthogonalize_until_epoch = 60;
    LearningRateSchedule schedule;
    SigmaRange sigma;
    std::uint64_t seed = 0;
    LossNormalization loss_normalization = LossNormalization::sum_per_sample;
    AdamOptions adam;
    double bn_momentum = 0.1;
    /// Per-epoch train-mode checkpoints and the final folded model go here.
    std::optional<std::filesystem::path> checkpoint_dir;
    /// Line-delimited JSON records {step, epoch, lr, loss}.
    std::optional<std::filesystem::path> log_path;

    void validate() const;
    nlohmann::json to_json() const;
};

struct TrainLogRecord {
    std::int64_t step = 0;
    int epoch = 0;
    double learning_rate = 0.0;
    double loss = 0.0;
};

/// Single-writer training state for one block: parameters, ADAM moments and
/// the loss history (one entry per completed step).
class Trainer {
public:
    Trainer(DenoiserParams initial, TrainConfig config);

    /// One ADAM step on `batch`; orthogonalizes the kernels afterwards when
    /// `orthogonalize` is set. Returns the loss before the update. Throws
    /// TrainingError on a non-finite loss or gradient (parameters untouched).
    double step(std::span<const SpatialSample> batch, double learning_rate, bool orthogonalize);
    double step(std::span<const TemporalSample> batch, double learning_rate, bool orthogonalize);

    const DenoiserParams& params() const noexcept { return params_; }
    const TrainConfig& config() const noexcept { return config_; }
    std::int64_t steps() const noexcept { return static_cast<std::int64_t>(history_.size()); }
    const std::vector<TrainLogRecord>& history() const noexcept { return history_; }
    int epoch() const noexcept { return epoch_; }
    void set_epoch(int epoch) noexcept { epoch_ = epoch; }

private:
    template <typename Sample>
    double step_impl(std::span<const Sample> batch, double learning_rate, bool orthogonalize);
    void apply(const LossEvaluation<float>& eval, double learning_rate);

    DenoiserParams params_;
    TrainConfig config_;
    int epoch_ = 0;
    std::vector<TrainLogRecord> history_;
    std::vector<std::vector<double>> first_moment_;
    std::vector<std::vector<double>> second_moment_;
};

using StepObserver = std::function<void(const Trainer&)>;

/// Trains a spatial block from scratch (or from `initial`) and returns the
/// folded eval-mode parameters.
DenoiserParams train_spatial(std::span<const SpatialSample> dataset, const TrainConfig& config,
                             std::optional<DenoiserParams> initial = std::nullopt,
                             const StepObserver& observer = {});

/// Trains the temporal block. `spatial_params` is the eval-mode spatial
/// block that produced the dataset; null or train-mode params raise
/// StateError since the spatial stage must be trained first.
DenoiserParams train_temporal(std::span<const TemporalSample> dataset, const DenoiserParams* spatial_params,
                              const TrainConfig& config, std::optional<DenoiserParams> initial = std::nullopt,
                              const StepObserver& observer = {});

} // namespace dvdnet
