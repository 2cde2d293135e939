// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: denoise, train-spatial, train-temporal, benchmark
// and add-noise subcommands.

#pragma once

#include <filesystem>
#include <vector>

namespace dvdnet::cli {

enum ExitCode : int {
    kExitOk = 0,
    /// Benchmark finished but at least one sequence failed, or an
    /// unexpected error.
    kExitFailure = 1,
    kExitUsage = 2,
    kExitData = 3,
    kExitConfig = 4,
    kExitTraining = 5,
};

/// Default checkpoint directory for --spatial/--temporal/--out-dir.
inline constexpr const char* kCheckpointDirEnv = "DVDNET_CHECKPOINT_DIR";

/// Sorted subdirectories of `root` that contain PNG frames.
std::vector<std::filesystem::path> list_sequence_dirs(const std::filesystem::path& root);

int run_cli(int argc, const char* const* argv);

} // namespace dvdnet::cli
