// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/rearrange.hpp"

#include "dvdnet/error.hpp"

namespace dvdnet {

FeatureTensor space_to_depth(const Image& image)
{
    if (image.height() % 2 != 0 || image.width() % 2 != 0) {
        throw DimensionError("space_to_depth needs even height and width");
    }
    const int h = image.height() / 2;
    const int w = image.width() / 2;
    FeatureTensor out(image.channels() * 4, h, w);
    for (int c = 0; c < image.channels(); ++c) {
        for (int k = 0; k < 4; ++k) {
            const int dy = k / 2;
            const int dx = k % 2;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    out(4 * c + k, y, x) = image(c, 2 * y + dy, 2 * x + dx);
                }
            }
        }
    }
    return out;
}

Image depth_to_space(const FeatureTensor& tensor)
{
    if (tensor.channels() % 4 != 0) {
        throw DimensionError("depth_to_space needs a channel count divisible by 4");
    }
    const int channels = tensor.channels() / 4;
    Image out(channels, tensor.height() * 2, tensor.width() * 2);
    for (int c = 0; c < channels; ++c) {
        for (int k = 0; k < 4; ++k) {
            const int dy = k / 2;
            const int dx = k % 2;
            for (int y = 0; y < tensor.height(); ++y) {
                for (int x = 0; x < tensor.width(); ++x) {
                    out(c, 2 * y + dy, 2 * x + dx) = tensor(4 * c + k, y, x);
                }
            }
        }
    }
    return out;
}

} // namespace dvdnet
