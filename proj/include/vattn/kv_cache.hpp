// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "vattn/errors.hpp"
#include "vattn/matrix.hpp"

namespace vattn {

/// Key and value matrices for one attention head. Immutable after
/// construction; n tokens by d channels, identical shape for both sides.
struct KVCache {
    RowMatrix keys;    // n x d
    RowMatrix values;  // n x d

    std::size_t n() const { return keys.rows(); }
    std::size_t d() const { return keys.cols(); }
};

/// Batch of query vectors evaluated against one cache.
struct QueryBatch {
    RowMatrix queries;  // m x d

    std::size_t m() const { return queries.rows(); }
    std::size_t d() const { return queries.cols(); }
};

namespace detail {

inline void check_finite(const RowMatrix& m, const char* name) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j))) throw NonFiniteEntry(name, i, j);
}

}  // namespace detail

/// Checks every type invariant; returns normally iff (cache, queries) is a
/// valid instance.
inline void validate_cache(const KVCache& cache, const QueryBatch& queries) {
    if (cache.n() == 0 || queries.m() == 0 || cache.d() == 0)
        throw EmptyCache("cache must have n >= 1, d >= 1 and at least one query");
    if (!cache.keys.same_shape(cache.values))
        throw ShapeMismatch("keys and values must have identical shape");
    if (queries.d() != cache.d())
        throw ShapeMismatch("query width does not match cache head dimension");
    detail::check_finite(cache.keys, "keys");
    detail::check_finite(cache.values, "values");
    detail::check_finite(queries.queries, "queries");
}

}  // namespace vattn
