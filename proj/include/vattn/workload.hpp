// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vattn/kv_cache.hpp"
#include "vattn/rng.hpp"

namespace vattn {

/// Exact attention scores follow a Zipf(s) profile for every query
/// (d = 1 construction: logits = -s * ln(rank + 1)).
struct ZipfScores {
    double s = 1.0;
};

/// Near-uniform scores: i.i.d. logits with the given jitter (d = 1).
struct FlatScores {
    double jitter = 0.0;
};

/// Gaussian key/value/query vectors in d dimensions, keys optionally
/// grouped around cluster centers.
struct GaussianKeys {
    std::size_t cluster_count = 1;
};

/// Gaussian keys with a fraction of outlier tokens whose keys are scaled
/// up, producing heavy-hitter logits.
struct OutlierMix {
    double outlier_frac = 0.05;
    double outlier_gain = 4.0;
};

struct WorkloadSpec {
    std::variant<ZipfScores, FlatScores, GaussianKeys, OutlierMix> dist;
    std::size_t n = 1;
    std::size_t d = 1;
    std::size_t m = 1;
    std::uint64_t seed = 0;
};

namespace detail {

// Quantize to f32 so the VATN container round-trips generated workloads
// bit-exactly.
inline double q32(double x) { return static_cast<double>(static_cast<float>(x)); }

// Values for the score-profile workloads: coupled to the (standardized)
// logit plus noise. The coupling is what separates the selector families:
// a top-heavy deterministic pick sees systematically atypical values,
// while a uniform sample stays representative.
inline RowMatrix coupled_values(const std::vector<double>& logits, Rng& gen) {
    const std::size_t n = logits.size();
    double mean = 0.0;
    for (double l : logits) mean += l;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double l : logits) var += (l - mean) * (l - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));

    RowMatrix values(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double standardized = sd == 0.0 ? 0.0 : (logits[i] - mean) / sd;
        values(i, 0) = q32(1.0 + standardized + 0.25 * gen.normal());
    }
    return values;
}

inline std::pair<KVCache, QueryBatch> profile_workload(const WorkloadSpec& spec,
                                                       const std::vector<double>& logits) {
    Rng gen(RngStream{spec.seed, 0x77ULL});
    KVCache cache;
    cache.keys = RowMatrix(spec.n, 1);
    for (std::size_t i = 0; i < spec.n; ++i) cache.keys(i, 0) = q32(logits[i]);
    cache.values = coupled_values(logits, gen);
    QueryBatch queries;
    queries.queries = RowMatrix(spec.m, 1, 1.0);
    return {std::move(cache), std::move(queries)};
}

}  // namespace detail

/// Deterministic synthetic (cache, queries) pair for the requested score
/// regime. Score-profile distributions (zipf, flat) require d = 1.
inline std::pair<KVCache, QueryBatch> gen_workload(const WorkloadSpec& spec) {
    if (spec.n == 0 || spec.d == 0 || spec.m == 0)
        throw InvalidSpec("workload sizes must be >= 1");

    if (const auto* zipf = std::get_if<ZipfScores>(&spec.dist)) {
        if (zipf->s <= 0.0) throw InvalidSpec("zipf exponent must be > 0");
        if (spec.d != 1) throw InvalidSpec("zipf workload uses the d = 1 construction");
        std::vector<double> logits(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i)
            logits[i] = -zipf->s * std::log(static_cast<double>(i + 1));
        return detail::profile_workload(spec, logits);
    }

    if (const auto* flat = std::get_if<FlatScores>(&spec.dist)) {
        if (flat->jitter < 0.0) throw InvalidSpec("jitter must be >= 0");
        if (spec.d != 1) throw InvalidSpec("flat workload uses the d = 1 construction");
        Rng gen(RngStream{spec.seed, 0x11ULL});
        std::vector<double> logits(spec.n);
        for (double& l : logits) l = flat->jitter * gen.normal();
        return detail::profile_workload(spec, logits);
    }

    if (const auto* gauss = std::get_if<GaussianKeys>(&spec.dist)) {
        if (gauss->cluster_count == 0) throw InvalidSpec("cluster_count must be >= 1");
        Rng gen(RngStream{spec.seed, 0x22ULL});
        RowMatrix centers(gauss->cluster_count, spec.d, 0.0);
        if (gauss->cluster_count > 1)
            for (double& c : centers.data()) c = detail::q32(gen.normal());
        KVCache cache;
        cache.keys = RowMatrix(spec.n, spec.d);
        cache.values = RowMatrix(spec.n, spec.d);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const auto center = centers.row(i % gauss->cluster_count);
            for (std::size_t j = 0; j < spec.d; ++j) {
                cache.keys(i, j) = detail::q32(center[j] + gen.normal());
                cache.values(i, j) = detail::q32(gen.normal());
            }
        }
        QueryBatch queries;
        queries.queries = RowMatrix(spec.m, spec.d);
        for (double& x : queries.queries.data()) x = detail::q32(gen.normal());
        return {std::move(cache), std::move(queries)};
    }

    const auto& mix = std::get<OutlierMix>(spec.dist);
    if (!(mix.outlier_frac >= 0.0 && mix.outlier_frac < 1.0))
        throw InvalidSpec("outlier_frac must lie in [0,1)");
    if (mix.outlier_gain <= 0.0) throw InvalidSpec("outlier_gain must be > 0");
    Rng gen(RngStream{spec.seed, 0x33ULL});
    KVCache cache;
    cache.keys = RowMatrix(spec.n, spec.d);
    cache.values = RowMatrix(spec.n, spec.d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double gain = gen.uniform01() < mix.outlier_frac ? mix.outlier_gain : 1.0;
        for (std::size_t j = 0; j < spec.d; ++j) {
            cache.keys(i, j) = detail::q32(gain * gen.normal());
            cache.values(i, j) = detail::q32(gen.normal());
        }
    }
    QueryBatch queries;
    queries.queries = RowMatrix(spec.m, spec.d);
    for (double& x : queries.queries.data()) x = detail::q32(gen.normal());
    return {std::move(cache), std::move(queries)};
}

}  // namespace vattn
