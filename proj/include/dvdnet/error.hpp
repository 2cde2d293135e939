// Copyright 2026 The dvdnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dvdnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor/frame shapes do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Wrong number of inputs (e.g. temporal window length).
class ArityError : public Error {
public:
    using Error::Error;
};

/// A scalar argument lies outside its valid range.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An object is in the wrong lifecycle state (e.g. folding twice).
class StateError : public Error {
public:
    using Error::Error;
};

/// Corpus, dataset or file content problems.
class DataError : public Error {
public:
    using Error::Error;
};

/// Inconsistent configuration or checkpoint/block mismatch.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training diverged or could not proceed.
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace dvdnet
