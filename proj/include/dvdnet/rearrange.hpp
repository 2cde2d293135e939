// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dvdnet/image.hpp"

namespace dvdnet {

/// Tag written into checkpoints to pin the sub-pixel channel ordering.
inline constexpr const char* kChannelOrderTag = "s2d-raster-tl-tr-bl-br";

/// Rearranges every 2x2 block into 4 channels. Output channel 4*c + k holds
/// input channel c at offset k in raster order (0 = top-left, 1 = top-right,
/// 2 = bottom-left, 3 = bottom-right). Throws DimensionError on odd extents.
FeatureTensor space_to_depth(const Image& image);

/// Exact inverse of space_to_depth. Throws DimensionError when the channel
/// count is not a multiple of 4.
Image depth_to_space(const FeatureTensor& tensor);

} // namespace dvdnet
