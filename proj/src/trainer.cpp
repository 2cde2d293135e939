// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "dvdnet/checkpoint.hpp"
#include "dvdnet/error.hpp"

namespace dvdnet {

LearningRateSchedule::LearningRateSchedule()
    : LearningRateSchedule({{0, 1e-3}, {50, 1e-4}, {60, 1e-6}}, 80)
{
}

LearningRateSchedule::LearningRateSchedule(std::vector<Phase> phases, int total_epochs)
    : phases_(std::move(phases)), total_epochs_(total_epochs)
{
    if (phases_.empty() || phases_.front().first_epoch != 0) {
        throw ConfigError("learning rate schedule must start at epoch 0");
    }
    for (std::size_t i = 1; i < phases_.size(); ++i) {
        if (phases_[i].first_epoch <= phases_[i - 1].first_epoch) {
            throw ConfigError("learning rate phases must be strictly increasing");
        }
    }
}

double LearningRateSchedule::operator()(int epoch) const
{
    if (epoch < 0 || epoch >= total_epochs_) {
        throw DomainError("epoch " + std::to_string(epoch) + " outside schedule [0, " +
                          std::to_string(total_epochs_) + ")");
    }
    double rate = phases_.front().rate;
    for (const auto& phase : phases_) {
        if (epoch >= phase.first_epoch) {
            rate = phase.rate;
        }
    }
    return rate;
}

double learning_rate(int epoch)
{
    static const LearningRateSchedule schedule;
    return schedule(epoch);
}

void TrainConfig::validate() const
{
    if (epochs < 1) {
        throw ConfigError("epochs must be positive");
    }
    if (batch_size < 1) {
        throw ConfigError("batch size must be at least 1");
    }
    if (epochs > schedule.total_epochs()) {
        throw ConfigError("epochs exceed the learning rate schedule");
    }
    if (orthogonalize_until_epoch < 0) {
        throw ConfigError("orthogonalization boundary must be non-negative");
    }
    if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) {
        throw ConfigError("batch norm momentum must lie in (0, 1]");
    }
}

nlohmann::json TrainConfig::to_json() const
{
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& p : schedule.phases()) {
        phases.push_back({{"first_epoch", p.first_epoch}, {"rate", p.rate}});
    }
    return {{"epochs", epochs},
            {"batch_size", batch_size},
            {"orthogonalize_until_epoch", orthogonalize_until_epoch},
            {"lr_schedule", phases},
            {"sigma_range", {sigma.min_8bit, sigma.max_8bit}},
            {"seed", seed},
            {"loss_normalization",
             loss_normalization == LossNormalization::sum_per_sample ? "sum_per_sample" : "mean_per_pixel"},
            {"adam", {{"beta1", adam.beta1}, {"beta2", adam.beta2}, {"epsilon", adam.epsilon}}},
            {"bn_momentum", bn_momentum}};
}

namespace {

// Visits (param, grad) pairs in a fixed order: per layer weight, bias,
// gamma, beta.
template <typename Fn>
void for_each_parameter(DenoiserParams& params, const Gradients<float>& grads, Fn&& fn)
{
    auto& layers = params.layers();
    std::size_t slot = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto& layer = layers[i];
        const auto& g = grads.layers[i];
        fn(slot++, layer.weight, g.weight);
        fn(slot++, layer.bias, g.bias);
        if (layer.norm) {
            fn(slot++, layer.norm->gamma, g.gamma);
            fn(slot++, layer.norm->beta, g.beta);
        }
    }
}

bool all_finite(const Gradients<float>& grads)
{
    for (const auto& lg : grads.layers) {
        for (const auto* v : {&lg.weight, &lg.bias, &lg.gamma, &lg.beta}) {
            for (float x : *v) {
                if (!std::isfinite(x)) {
                    return false;
                }
            }
        }
    }
    return true;
}

} // namespace

Trainer::Trainer(DenoiserParams initial, TrainConfig config)
    : params_(std::move(initial)), config_(std::move(config))
{
    config_.validate();
    if (params_.mode() != NormMode::train) {
        throw StateError("training needs train-mode parameters");
    }
}

void Trainer::apply(const LossEvaluation<float>& eval, double lr)
{
    const auto& adam = config_.adam;
    const double t = static_cast<double>(history_.size() + 1);
    const double bias1 = 1.0 - std::pow(adam.beta1, t);
    const double bias2 = 1.0 - std::pow(adam.beta2, t);
    for_each_parameter(params_, eval.gradients, [&](std::size_t slot, std::vector<float>& p, const std::vector<float>& g) {
        if (first_moment_.size() <= slot) {
            first_moment_.resize(slot + 1);
            second_moment_.resize(slot + 1);
        }
        auto& m = first_moment_[slot];
        auto& v = second_moment_[slot];
        if (m.size() != p.size()) {
            m.assign(p.size(), 0.0);
            v.assign(p.size(), 0.0);
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = static_cast<double>(g[i]);
            m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * gi;
            v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * gi * gi;
            const double mhat = m[i] / bias1;
            const double vhat = v[i] / bias2;
            p[i] = static_cast<float>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + adam.epsilon));
        }
    });

    const double momentum = config_.bn_momentum;
    auto& layers = params_.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (!layers[i].norm) {
            continue;
        }
        auto& bn = *layers[i].norm;
        const auto& mean = eval.batch_mean[i];
        const auto& var = eval.batch_var[i];
        for (std::size_t c = 0; c < bn.running_mean.size(); ++c) {
            bn.running_mean[c] = static_cast<float>((1.0 - momentum) * bn.running_mean[c] + momentum * mean[c]);
            bn.running_var[c] = static_cast<float>((1.0 - momentum) * bn.running_var[c] + momentum * var[c]);
        }
    }
}

template <typename Sample>
double Trainer::step_impl(std::span<const Sample> batch, double lr, bool orthogonalize)
{
    LossEvaluation<float> eval;
    if constexpr (std::is_same_v<Sample, SpatialSample>) {
        eval = spatial_loss_and_gradient(batch, params_, config_.loss_normalization);
    } else {
        eval = temporal_loss_and_gradient(batch, params_, config_.loss_normalization);
    }
    if (!std::isfinite(eval.loss) || !all_finite(eval.gradients)) {
        throw TrainingError("non-finite loss at step " + std::to_string(history_.size()) + " (epoch " +
                            std::to_string(epoch_) + ")");
    }
    apply(eval, lr);
    if (orthogonalize) {
        orthogonalize_kernels_inplace(params_, config_.seed + 7919 * (history_.size() + 1));
    }
    history_.push_back({static_cast<std::int64_t>(history_.size()), epoch_, lr, eval.loss});
    return eval.loss;
}

double Trainer::step(std::span<const SpatialSample> batch, double lr, bool orthogonalize)
{
    return step_impl(batch, lr, orthogonalize);
}

double Trainer::step(std::span<const TemporalSample> batch, double lr, bool orthogonalize)
{
    return step_impl(batch, lr, orthogonalize);
}

namespace {

template <typename Sample>
DenoiserParams run_training(std::span<const Sample> dataset, const TrainConfig& config, DenoiserParams initial,
                            const StepObserver& observer, nlohmann::json metadata)
{
    if (dataset.empty()) {
        throw DataError("training dataset is empty");
    }
    Trainer trainer(std::move(initial), config);
    const std::string kind = to_string(trainer.params().kind());
    metadata["train_config"] = config.to_json();
    metadata["dataset_size"] = dataset.size();

    std::ofstream log;
    if (config.log_path) {
        if (config.log_path->has_parent_path()) {
            std::filesystem::create_directories(config.log_path->parent_path());
        }
        log.open(*config.log_path, std::ios::trunc);
        if (!log) {
            throw ConfigError("cannot open training log " + config.log_path->string());
        }
    }
    if (config.checkpoint_dir) {
        std::filesystem::create_directories(*config.checkpoint_dir);
    }

    std::vector<std::size_t> order(dataset.size());
    std::vector<Sample> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        trainer.set_epoch(epoch);
        const double lr = config.schedule(epoch);
        const bool ortho = epoch < config.orthogonalize_until_epoch;
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 shuffle_rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(dataset[order[i]]);
            }
            const double loss = trainer.step(std::span<const Sample>(batch), lr, ortho);
            epoch_loss += loss;
            ++batches;
            const auto& rec = trainer.history().back();
            if (log) {
                log << nlohmann::json{{"step", rec.step}, {"epoch", rec.epoch}, {"lr", rec.learning_rate},
                                      {"loss", rec.loss}}
                           .dump()
                    << '\n';
                log.flush();
            }
            if (observer) {
                observer(trainer);
            }
        }
        spdlog::info("{} epoch {}/{}: mean loss {:.6g} over {} steps (lr {:g})", kind, epoch + 1, config.epochs,
                     epoch_loss / static_cast<double>(batches), batches, lr);
        if (config.checkpoint_dir) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s_epoch_%03d.ckpt", kind.c_str(), epoch);
            auto meta = metadata;
            meta["epoch"] = epoch;
            meta["steps"] = trainer.steps();
            save_checkpoint(*config.checkpoint_dir / name, trainer.params(), meta);
        }
    }
    DenoiserParams folded = fold_batchnorm(trainer.params());
    if (config.checkpoint_dir) {
        auto meta = metadata;
        meta["epoch"] = config.epochs - 1;
        meta["steps"] = trainer.steps();
        save_checkpoint(*config.checkpoint_dir / (kind + "_final.ckpt"), folded, meta);
    }
    return folded;
}

} // namespace

DenoiserParams train_spatial(std::span<const SpatialSample> dataset, const TrainConfig& config,
                             std::optional<DenoiserParams> initial, const StepObserver& observer)
{
    DenoiserParams start = initial ? std::move(*initial) : initialize_block<float>(BlockGeometry::spatial(), config.seed);
    if (start.kind() != BlockKind::spatial) {
        throw ConfigError("train_spatial needs a spatial block");
    }
    return run_training(dataset, config, std::move(start), observer, nlohmann::json::object());
}

DenoiserParams train_temporal(std::span<const TemporalSample> dataset, const DenoiserParams* spatial_params,
                              const TrainConfig& config, std::optional<DenoiserParams> initial,
                              const StepObserver& observer)
{
    if (spatial_params == nullptr) {
        throw StateError("the spatial block must be trained before the temporal block");
    }
    if (spatial_params->kind() != BlockKind::spatial || spatial_params->mode() != NormMode::eval) {
        throw StateError("temporal training needs the eval-mode spatial block");
    }
    DenoiserParams start =
        initial ? std::move(*initial) : initialize_block<float>(BlockGeometry::temporal(), config.seed);
    if (start.kind() != BlockKind::temporal) {
        throw ConfigError("train_temporal needs a temporal block");
    }
    nlohmann::json metadata;
    metadata["temporal_radius"] = start.geometry().temporal_radius;
    metadata["window_length"] = start.geometry().window_length();
    return run_training(dataset, config, std::move(start), observer, metadata);
}

} // namespace dvdnet
