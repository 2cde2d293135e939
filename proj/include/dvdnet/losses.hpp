// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "dvdnet/dataset.hpp"
#include "dvdnet/network.hpp"

namespace dvdnet {

enum class LossNormalization {
    /// (1/2m) * sum over the batch of the squared error summed over every
    /// pixel and channel of the patch.
    sum_per_sample,
    /// Same, additionally divided by the number of samples per patch.
    mean_per_pixel,
};

template <typename T>
struct LossEvaluation {
    double loss = 0.0;
    Gradients<T> gradients;
    /// Per normalized layer (empty entries for the others): batch mean and
    /// biased variance seen during the forward pass.
    std::vector<std::vector<T>> batch_mean;
    std::vector<std::vector<T>> batch_var;
};

/// Spatial loss. Train-mode params normalize with batch statistics,
/// eval-mode params with their folded affine. Throws DomainError on an
/// empty batch.
template <typename T>
double spatial_loss(std::span<const SpatialSample> batch, const BasicDenoiserParams<T>& params,
                    LossNormalization normalization = LossNormalization::sum_per_sample);

template <typename T>
double temporal_loss(std::span<const TemporalSample> batch, const BasicDenoiserParams<T>& params,
                     LossNormalization normalization = LossNormalization::sum_per_sample);

/// Loss plus gradients with respect to every parameter (train mode only).
template <typename T>
LossEvaluation<T> spatial_loss_and_gradient(std::span<const SpatialSample> batch,
                                            const BasicDenoiserParams<T>& params,
                                            LossNormalization normalization = LossNormalization::sum_per_sample);

template <typename T>
LossEvaluation<T> temporal_loss_and_gradient(std::span<const TemporalSample> batch,
                                             const BasicDenoiserParams<T>& params,
                                             LossNormalization normalization = LossNormalization::sum_per_sample);

} // namespace dvdnet
