// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace dvdnet {

/// Keeps freed activation buffers inside the process heap instead of handing
/// them back to the kernel after every layer. Training and inference allocate
/// and release multi-megabyte buffers per step; without this, glibc maps and
/// unmaps them each time and page faults eat a large share of the runtime.
/// A no-op on other C libraries. Call once, early in main().
void retain_large_allocations() noexcept;

} // namespace dvdnet
