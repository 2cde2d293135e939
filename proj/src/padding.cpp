// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/padding.hpp"

namespace dvdnet {

namespace {

// Index reflected about the last valid sample (n -> n-2).
int reflect_tail(int i, int n)
{
    return i < n ? i : (n >= 2 ? 2 * (n - 1) - i : n - 1);
}

} // namespace

PaddedFrame pad_to_even(const Image& frame)
{
    const int h = frame.height();
    const int w = frame.width();
    const int ph = h + (h % 2);
    const int pw = w + (w % 2);
    if (ph == h && pw == w) {
        return {frame, h, w};
    }
    Image out(frame.channels(), ph, pw);
    for (int c = 0; c < frame.channels(); ++c) {
        for (int y = 0; y < ph; ++y) {
            for (int x = 0; x < pw; ++x) {
                out(c, y, x) = frame(c, reflect_tail(y, h), reflect_tail(x, w));
            }
        }
    }
    return {std::move(out), h, w};
}

NoiseMap pad_to_even(const NoiseMap& map)
{
    const int h = map.height();
    const int w = map.width();
    NoiseMap out(h + (h % 2), w + (w % 2));
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out(y, x) = map(reflect_tail(y, h), reflect_tail(x, w));
        }
    }
    return out;
}

Image crop_to_original(const PaddedFrame& padded)
{
    return crop_to_original(padded.frame, padded.original_height, padded.original_width);
}

Image crop_to_original(const Image& frame, int height, int width)
{
    if (frame.height() == height && frame.width() == width) {
        return frame;
    }
    return frame.crop(0, 0, height, width);
}

} // namespace dvdnet
