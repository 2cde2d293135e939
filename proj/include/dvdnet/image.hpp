// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dvdnet {

/// Planar multi-channel image (channel-major, then rows). Frames are
/// 3-channel images with samples nominally in [0,1]; the same type is used
/// for quarter-resolution feature tensors with many channels.
class Image {
public:
    Image() = default;
    Image(int channels, int height, int width, float fill = 0.0f);

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept
    {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& operator()(int c, int y, int x) noexcept
    {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }
    float operator()(int c, int y, int x) const noexcept
    {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }

    std::span<float> plane(int c) noexcept
    {
        return {data_.data() + c * plane_size(), plane_size()};
    }
    std::span<const float> plane(int c) const noexcept
    {
        return {data_.data() + c * plane_size(), plane_size()};
    }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept
    {
        return channels_ == other.channels_ && height_ == other.height_ &&
               width_ == other.width_;
    }

    /// Copy of the rectangle [y0, y0+h) x [x0, x0+w).
    Image crop(int y0, int x0, int h, int w) const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

using FeatureTensor = Image;

/// Per-pixel noise standard deviation on the [0,1] intensity scale.
class NoiseMap {
public:
    NoiseMap() = default;
    NoiseMap(int height, int width, float fill = 0.0f);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    float& operator()(int y, int x) noexcept
    {
        return values_[static_cast<std::size_t>(y) * width_ + x];
    }
    float operator()(int y, int x) const noexcept
    {
        return values_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<float> values() noexcept { return values_; }
    std::span<const float> values() const noexcept { return values_; }

    bool matches(const Image& frame) const noexcept
    {
        return height_ == frame.height() && width_ == frame.width();
    }

    NoiseMap crop(int y0, int x0, int h, int w) const;

    friend bool operator==(const NoiseMap&, const NoiseMap&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> values_;
};

/// Ordered frames of identical shape.
struct FrameSequence {
    std::vector<Image> frames;
    std::optional<double> frame_rate;

    std::size_t size() const noexcept { return frames.size(); }
    /// Throws DataError when empty or when frame shapes differ.
    void validate() const;
};

/// Clamp every sample to [lo, hi].
Image clipped(Image image, float lo = 0.0f, float hi = 1.0f);

} // namespace dvdnet
