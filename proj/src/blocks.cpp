// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/blocks.hpp"

#include <string>

#include "dvdnet/error.hpp"
#include "dvdnet/noise.hpp"
#include "dvdnet/rearrange.hpp"

namespace dvdnet {

template <typename T>
Activations<T> pack_block_input(const BlockGeometry& geometry, std::span<const BlockInput> batch)
{
    if (batch.empty()) {
        throw DimensionError("empty batch");
    }
    const int window = geometry.window_length();
    const auto& first = batch.front();
    if (static_cast<int>(first.frames.size()) != window) {
        throw ArityError("block expects a window of " + std::to_string(window) + " frames, got " +
                         std::to_string(first.frames.size()));
    }
    const int height = first.frames.front().height();
    const int width = first.frames.front().width();
    if (height % 2 != 0 || width % 2 != 0) {
        throw DimensionError("block inputs need even height and width");
    }
    Activations<T> packed(geometry.input_channels(), static_cast<int>(batch.size()), height / 2,
                          width / 2);
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const auto& item = batch[n];
        if (static_cast<int>(item.frames.size()) != window) {
            throw ArityError("inconsistent window length within batch");
        }
        if (item.noise_map == nullptr) {
            throw DimensionError("missing noise map");
        }
        for (int f = 0; f < window; ++f) {
            const Image& frame = item.frames[f];
            if (frame.channels() != 3 || frame.height() != height || frame.width() != width) {
                throw DimensionError("window frames must be RGB and share one shape");
            }
            const FeatureTensor s2d = space_to_depth(frame);
            for (int c = 0; c < kPackedFrameChannels; ++c) {
                for (int y = 0; y < packed.height; ++y) {
                    for (int x = 0; x < packed.width; ++x) {
                        packed.at(f * kPackedFrameChannels + c, static_cast<int>(n), y, x) =
                            static_cast<T>(s2d(c, y, x));
                    }
                }
            }
        }
        if (!item.noise_map->matches(item.frames.front())) {
            throw DimensionError("noise map shape does not match frame shape");
        }
        const NoiseMap half = downsample_noise_map(*item.noise_map);
        const int map_channel = geometry.input_channels() - 1;
        for (int y = 0; y < packed.height; ++y) {
            for (int x = 0; x < packed.width; ++x) {
                packed.at(map_channel, static_cast<int>(n), y, x) = static_cast<T>(half(y, x));
            }
        }
    }
    return packed;
}

int residual_source_offset(const BlockGeometry& geometry) noexcept
{
    return geometry.kind == BlockKind::spatial ? 0 : geometry.temporal_radius * kPackedFrameChannels;
}

int residual_sign(BlockKind kind) noexcept
{
    return kind == BlockKind::spatial ? -1 : 1;
}

std::vector<Image> block_forward(const DenoiserParams& params, std::span<const BlockInput> batch,
                                 NormUsage usage)
{
    const auto& geometry = params.geometry();
    Activations<float> packed = pack_block_input<float>(geometry, batch);
    const int source = residual_source_offset(geometry);
    const float sign = static_cast<float>(residual_sign(geometry.kind));
    // Copy the residual source before the input buffer is consumed.
    std::vector<float> residual(static_cast<std::size_t>(kPackedFrameChannels) * packed.columns());
    std::copy_n(packed.data.begin() + static_cast<std::ptrdiff_t>(source * packed.columns()),
                residual.size(), residual.begin());
    const int batch_size = packed.batch;
    const int h = packed.height;
    const int w = packed.width;
    Activations<float> core = run_layers(params, std::move(packed), usage);

    std::vector<Image> outputs;
    outputs.reserve(batch.size());
    const std::size_t cols = core.columns();
    for (int n = 0; n < batch_size; ++n) {
        FeatureTensor quarter(kPackedFrameChannels, h, w);
        for (int c = 0; c < kPackedFrameChannels; ++c) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const std::size_t j = (static_cast<std::size_t>(n) * h + y) * w + x;
                    quarter(c, y, x) = residual[c * cols + j] + sign * core.at(c, n, y, x);
                }
            }
        }
        outputs.push_back(depth_to_space(quarter));
    }
    return outputs;
}

Image spatial_forward(const Image& noisy, const NoiseMap& noise_map, const DenoiserParams& params)
{
    if (params.kind() != BlockKind::spatial) {
        throw ConfigError("spatial_forward needs spatial block parameters");
    }
    if (!noise_map.matches(noisy)) {
        throw DimensionError("noise map shape does not match frame shape");
    }
    const BlockInput input{std::span<const Image>(&noisy, 1), &noise_map};
    return std::move(block_forward(params, std::span<const BlockInput>(&input, 1)).front());
}

Image temporal_forward(std::span<const Image> window, const NoiseMap& noise_map,
                       const DenoiserParams& params)
{
    if (params.kind() != BlockKind::temporal) {
        throw ConfigError("temporal_forward needs temporal block parameters");
    }
    if (static_cast<int>(window.size()) != params.geometry().window_length()) {
        throw ArityError("temporal block expects " + std::to_string(params.geometry().window_length()) +
                         " frames, got " + std::to_string(window.size()));
    }
    for (const auto& frame : window) {
        if (!frame.same_shape(window.front())) {
            throw DimensionError("window frames differ in shape");
        }
    }
    if (!noise_map.matches(window.front())) {
        throw DimensionError("noise map shape does not match frame shape");
    }
    const BlockInput input{window, &noise_map};
    return std::move(block_forward(params, std::span<const BlockInput>(&input, 1)).front());
}

template Activations<float> pack_block_input<float>(const BlockGeometry&, std::span<const BlockInput>);
template Activations<double> pack_block_input<double>(const BlockGeometry&, std::span<const BlockInput>);

} // namespace dvdnet
