// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/losses.hpp"

#include "dvdnet/blocks.hpp"
#include "dvdnet/error.hpp"
#include "dvdnet/rearrange.hpp"

namespace dvdnet {

namespace {

struct PreparedBatch {
    std::vector<BlockInput> inputs;
    std::vector<const Image*> targets;
};

PreparedBatch prepare(std::span<const SpatialSample> batch)
{
    PreparedBatch p;
    for (const auto& s : batch) {
        p.inputs.push_back({std::span<const Image>(&s.noisy, 1), &s.noise_map});
        p.targets.push_back(&s.clean);
    }
    return p;
}

PreparedBatch prepare(std::span<const TemporalSample> batch)
{
    PreparedBatch p;
    for (const auto& s : batch) {
        p.inputs.push_back({std::span<const Image>(s.window), &s.noise_map});
        p.targets.push_back(&s.clean_center);
    }
    return p;
}

template <typename T>
LossEvaluation<T> evaluate(const PreparedBatch& batch, const BasicDenoiserParams<T>& params,
                           BlockKind expected_kind, LossNormalization normalization, bool with_gradient)
{
    if (batch.inputs.empty()) {
        throw DomainError("loss of an empty batch is undefined");
    }
    if (params.kind() != expected_kind) {
        throw ConfigError("loss evaluated with the wrong block kind");
    }
    if (with_gradient && params.mode() != NormMode::train) {
        throw StateError("gradients need train-mode parameters");
    }
    const auto& geometry = params.geometry();
    Activations<T> packed = pack_block_input<T>(geometry, batch.inputs);
    const int m = packed.batch;
    const int h = packed.height;
    const int w = packed.width;
    const std::size_t cols = packed.columns();
    const std::size_t source = static_cast<std::size_t>(residual_source_offset(geometry)) * cols;
    const std::vector<T> residual(packed.data.begin() + static_cast<std::ptrdiff_t>(source),
                                  packed.data.begin() +
                                      static_cast<std::ptrdiff_t>(source + kPackedFrameChannels * cols));

    Activations<T> target(kPackedFrameChannels, m, h, w);
    for (int n = 0; n < m; ++n) {
        const Image& clean = *batch.targets[static_cast<std::size_t>(n)];
        if (clean.height() != 2 * h || clean.width() != 2 * w || clean.channels() != 3) {
            throw DimensionError("target patch shape does not match the input");
        }
        const FeatureTensor packed_clean = space_to_depth(clean);
        for (int c = 0; c < kPackedFrameChannels; ++c) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    target.at(c, n, y, x) = static_cast<T>(packed_clean(c, y, x));
                }
            }
        }
    }

    ForwardTrace<T> trace;
    const NormUsage usage = NormUsage::batch_statistics;
    Activations<T> core = run_layers(params, std::move(packed), usage, with_gradient ? &trace : nullptr);

    const T sign = static_cast<T>(residual_sign(geometry.kind));
    double scale = 1.0 / (2.0 * m);
    if (normalization == LossNormalization::mean_per_pixel) {
        scale /= static_cast<double>(target.data.size()) / m;
    }
    double sum = 0.0;
    Activations<T> grad(kPackedFrameChannels, m, h, w);
    for (std::size_t i = 0; i < core.data.size(); ++i) {
        const T diff = residual[i] + sign * core.data[i] - target.data[i];
        sum += static_cast<double>(diff) * static_cast<double>(diff);
        grad.data[i] = static_cast<T>(2.0 * scale) * sign * diff;
    }
    LossEvaluation<T> result;
    result.loss = scale * sum;
    if (with_gradient) {
        result.batch_mean.resize(trace.layers.size());
        result.batch_var.resize(trace.layers.size());
        for (std::size_t i = 0; i < trace.layers.size(); ++i) {
            result.batch_mean[i] = trace.layers[i].batch_mean;
            result.batch_var[i] = trace.layers[i].batch_var;
        }
        result.gradients = backprop_layers(params, trace, std::move(grad));
    }
    return result;
}

} // namespace

template <typename T>
double spatial_loss(std::span<const SpatialSample> batch, const BasicDenoiserParams<T>& params,
                    LossNormalization normalization)
{
    return evaluate(prepare(batch), params, BlockKind::spatial, normalization, false).loss;
}

template <typename T>
double temporal_loss(std::span<const TemporalSample> batch, const BasicDenoiserParams<T>& params,
                     LossNormalization normalization)
{
    return evaluate(prepare(batch), params, BlockKind::temporal, normalization, false).loss;
}

template <typename T>
LossEvaluation<T> spatial_loss_and_gradient(std::span<const SpatialSample> batch,
                                            const BasicDenoiserParams<T>& params, LossNormalization normalization)
{
    return evaluate(prepare(batch), params, BlockKind::spatial, normalization, true);
}

template <typename T>
LossEvaluation<T> temporal_loss_and_gradient(std::span<const TemporalSample> batch,
                                             const BasicDenoiserParams<T>& params, LossNormalization normalization)
{
    return evaluate(prepare(batch), params, BlockKind::temporal, normalization, true);
}

#define DVDNET_INSTANTIATE(T)                                                                                   \
    template double spatial_loss<T>(std::span<const SpatialSample>, const BasicDenoiserParams<T>&,              \
                                    LossNormalization);                                                         \
    template double temporal_loss<T>(std::span<const TemporalSample>, const BasicDenoiserParams<T>&,            \
                                     LossNormalization);                                                        \
    template LossEvaluation<T> spatial_loss_and_gradient<T>(std::span<const SpatialSample>,                     \
                                                            const BasicDenoiserParams<T>&, LossNormalization);  \
    template LossEvaluation<T> temporal_loss_and_gradient<T>(std::span<const TemporalSample>,                   \
                                                             const BasicDenoiserParams<T>&, LossNormalization);

DVDNET_INSTANTIATE(float)
DVDNET_INSTANTIATE(double)

#undef DVDNET_INSTANTIATE

} // namespace dvdnet
