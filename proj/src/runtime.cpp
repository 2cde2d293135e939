// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dvdnet/runtime.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace dvdnet {

void retain_large_allocations() noexcept
{
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

} // namespace dvdnet
