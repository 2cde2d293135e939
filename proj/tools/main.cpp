// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"
#include "dvdnet/runtime.hpp"

int main(int argc, char** argv)
{
    dvdnet::retain_large_allocations();
    return dvdnet::cli::run_cli(argc, argv);
}
