// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "dvdnet/image.hpp"
#include "dvdnet/network.hpp"

namespace dvdnet {

/// Frames of one block input (one frame for the spatial block, the 2T+1
/// aligned window for the temporal block) and the noise map that goes with it.
struct BlockInput {
    std::span<const Image> frames;
    const NoiseMap* noise_map = nullptr;
};

/// Packs a batch for the conv stack: each frame goes through space_to_depth
/// (12 channels per frame, in window order) and the half-resolution noise map
/// is appended as the last channel.
template <typename T>
Activations<T> pack_block_input(const BlockGeometry& geometry, std::span<const BlockInput> batch);

/// Packed channels of the frame the residual connection adds to: the noisy
/// frame for the spatial block, the central window frame for the temporal one.
int residual_source_offset(const BlockGeometry& geometry) noexcept;

/// Sign applied to the stack output: the spatial block predicts noise and
/// subtracts it, the temporal block adds its correction to the center frame.
int residual_sign(BlockKind kind) noexcept;

/// Full block forward for a batch; returns one full-resolution frame per
/// input. Train-mode params normalize with `usage`.
std::vector<Image> block_forward(const DenoiserParams& params, std::span<const BlockInput> batch,
                                 NormUsage usage = NormUsage::running_statistics);

/// Denoised frame noisy - F_spa(noisy, map).
Image spatial_forward(const Image& noisy, const NoiseMap& noise_map, const DenoiserParams& params);

/// Fused frame center + F_temp(window, map) for a window of 2T+1 aligned,
/// spatially denoised frames.
Image temporal_forward(std::span<const Image> window, const NoiseMap& noise_map,
                       const DenoiserParams& params);

} // namespace dvdnet
