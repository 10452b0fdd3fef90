// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vattn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct NonFiniteEntry : Error {
    NonFiniteEntry(std::string where, std::size_t row, std::size_t col)
        : Error(where + " has a non-finite entry at (" + std::to_string(row) + "," +
                std::to_string(col) + ")"),
          row(row),
          col(col) {}
    std::size_t row;
    std::size_t col;
};

struct EmptyCache : Error {
    using Error::Error;
};

// Cache container I/O
struct BadMagic : Error {
    using Error::Error;
};
struct UnsupportedVersion : Error {
    using Error::Error;
};
struct TruncatedFile : Error {
    using Error::Error;
};
struct IoFailure : Error {
    using Error::Error;
};

// Selection / selectors
struct EmptySelection : Error {
    using Error::Error;
};
struct InvalidProbability : Error {
    using Error::Error;
};
struct CountOutOfRange : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct BudgetExceedsResidual : Error {
    using Error::Error;
};

// Attention / budget
struct ZeroReference : Error {
    using Error::Error;
};
struct InvalidTolerance : Error {
    using Error::Error;
};
struct EmptyBaseSample : Error {
    using Error::Error;
};

// Configuration objects (workload specs, guarantee parameters)
struct InvalidSpec : Error {
    using Error::Error;
};

}  // namespace vattn
