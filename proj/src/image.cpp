// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/image.hpp"

#include <algorithm>
#include <string>

#include "dvdnet/error.hpp"

namespace dvdnet {

Image::Image(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width)
{
    if (channels < 0 || height < 0 || width < 0) {
        throw DimensionError("negative image extent");
    }
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Image Image::crop(int y0, int x0, int h, int w) const
{
    if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > height_ || x0 + w > width_) {
        throw DimensionError("crop rectangle outside image");
    }
    Image out(channels_, h, w);
    for (int c = 0; c < channels_; ++c) {
        for (int y = 0; y < h; ++y) {
            const float* src = data_.data() + (static_cast<std::size_t>(c) * height_ + y0 + y) * width_ + x0;
            std::copy(src, src + w, &out(c, y, 0));
        }
    }
    return out;
}

NoiseMap::NoiseMap(int height, int width, float fill) : height_(height), width_(width)
{
    if (height < 0 || width < 0) {
        throw DimensionError("negative noise map extent");
    }
    if (fill < 0.0f) {
        throw DomainError("noise map values must be non-negative");
    }
    values_.assign(static_cast<std::size_t>(height) * width, fill);
}

NoiseMap NoiseMap::crop(int y0, int x0, int h, int w) const
{
    if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > height_ || x0 + w > width_) {
        throw DimensionError("crop rectangle outside noise map");
    }
    NoiseMap out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out(y, x) = (*this)(y0 + y, x0 + x);
        }
    }
    return out;
}

void FrameSequence::validate() const
{
    if (frames.empty()) {
        throw DataError("frame sequence is empty");
    }
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (!frames[i].same_shape(frames[0])) {
            throw DataError("frame " + std::to_string(i) + " differs in shape from frame 0");
        }
    }
}

Image clipped(Image image, float lo, float hi)
{
    for (float& v : image.data()) {
        v = std::clamp(v, lo, hi);
    }
    return image;
}

} // namespace dvdnet
