// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "vattn/attention.hpp"
#include "vattn/kv_cache.hpp"
#include "vattn/rng.hpp"
#include "vattn/selection.hpp"

namespace vattn {

/// Sign-random-projection sampler configuration.
struct LshSpec {
    std::size_t k_bits = 4;
    std::size_t l_tables = 8;
    std::uint64_t seed = 0;
};

struct SinkSpec {
    std::size_t count = 0;
};
struct LocalSpec {
    std::size_t count = 0;
};
struct OracleTopKSpec {
    std::size_t count = 0;
};
struct OracleTopPSpec {
    double p = 0.5;
};
struct UniformResidualSpec {
    std::size_t count = 0;
};

using SelectorSpec =
    std::variant<SinkSpec, LocalSpec, OracleTopKSpec, OracleTopPSpec, UniformResidualSpec, LshSpec>;

/// First `count` token indices.
inline std::vector<std::size_t> sink_indices(std::size_t n, std::size_t count) {
    if (n == 0) throw EmptyCache("sink_indices on an empty cache");
    if (count > n) throw CountOutOfRange("sink count exceeds n");
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

/// Last `count` token indices.
inline std::vector<std::size_t> local_indices(std::size_t n, std::size_t count) {
    if (n == 0) throw EmptyCache("local_indices on an empty cache");
    if (count > n) throw CountOutOfRange("local count exceeds n");
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), n - count);
    return idx;
}

/// The `count` non-excluded indices with the largest key-query inner
/// products, ties toward the lower index. Scaling by 1/sqrt(d) does not
/// change the order, so no scale flag is taken.
inline std::vector<std::size_t> oracle_topk(const KVCache& cache, std::span<const double> q,
                                            std::size_t count,
                                            std::span<const std::size_t> excluded = {}) {
    detail::check_query(cache, q);
    std::vector<bool> skip(cache.n(), false);
    std::size_t n_excluded = 0;
    for (std::size_t e : excluded) {
        if (e >= cache.n()) throw IndexOutOfRange("excluded index >= n");
        if (!skip[e]) ++n_excluded;
        skip[e] = true;
    }
    if (count > cache.n() - n_excluded)
        throw CountOutOfRange("top-k count exceeds the non-excluded token count");

    std::vector<std::size_t> candidates;
    candidates.reserve(cache.n() - n_excluded);
    for (std::size_t i = 0; i < cache.n(); ++i)
        if (!skip[i]) candidates.push_back(i);

    std::vector<double> logits(cache.n());
    for (std::size_t i : candidates) logits[i] = dot(cache.keys.row(i), q);

    std::partial_sort(candidates.begin(), candidates.begin() + count, candidates.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (logits[a] != logits[b]) return logits[a] > logits[b];
                          return a < b;
                      });
    candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

/// Shortest descending-score prefix whose exact attention scores sum to
/// at least p.
inline std::vector<std::size_t> oracle_topp(const KVCache& cache, std::span<const double> q,
                                            double p, bool scale_flag) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidSpec("top-p threshold must be inside (0,1)");
    const ScoreProfile prof = attention_scores(cache, q, scale_flag);
    std::vector<std::size_t> idx;
    double cum = 0.0;
    for (std::size_t i : prof.sorted_order) {
        idx.push_back(i);
        cum += prof.scores[i];
        if (cum >= p) break;
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Uniform sample of b distinct indices from the residual set
/// {0..n-1} \ excluded, each with inclusion probability b / n_s.
/// Partial Fisher-Yates over the residual index array.
inline SelectionFragment uniform_residual(std::size_t n, std::span<const std::size_t> excluded,
                                          std::size_t b, RngStream rng) {
    std::vector<bool> skip(n, false);
    for (std::size_t e : excluded) {
        if (e >= n) throw IndexOutOfRange("excluded index >= n");
        skip[e] = true;
    }
    std::vector<std::size_t> residual;
    residual.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!skip[i]) residual.push_back(i);
    const std::size_t n_s = residual.size();
    if (b > n_s) throw BudgetExceedsResidual("sample size exceeds the residual count");
    if (b == 0) return SelectionFragment::sampled(std::vector<std::size_t>{}, 1.0);

    Rng gen(rng);
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen.below(n_s - i));
        std::swap(residual[i], residual[j]);
    }
    residual.resize(b);
    std::sort(residual.begin(), residual.end());
    const double prob = static_cast<double>(b) / static_cast<double>(n_s);
    return SelectionFragment::sampled(std::move(residual), prob);
}

namespace detail {

/// Angle between two vectors; degenerate (zero-norm) inputs get pi/2,
/// which matches the actual collision rate of an all-zero vector under
/// the >=0 sign convention below.
inline double vector_angle(std::span<const double> a, std::span<const double> b) {
    const double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return std::numbers::pi / 2.0;
    const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

}  // namespace detail

/// Inclusion probability of one index under sign-random-projection LSH:
/// collides with the query in at least one of l tables of k bits each.
inline double lsh_inclusion_prob(double theta, std::size_t k_bits, std::size_t l_tables) {
    const double p_c = 1.0 - theta / std::numbers::pi;
    const double per_table = std::pow(p_c, static_cast<double>(k_bits));
    return 1.0 - std::pow(1.0 - per_table, static_cast<double>(l_tables));
}

/// Baseline sampler: builds l_tables sign-random-projection tables of
/// k_bits hyperplanes, selects every key that shares a full signature
/// with the query in some table, and records each selected index with
/// its analytic inclusion probability.
inline Selection lsh_selection(const KVCache& cache, std::span<const double> q,
                               const LshSpec& spec) {
    detail::check_query(cache, q);
    if (spec.k_bits == 0 || spec.l_tables == 0)
        throw InvalidSpec("LSH needs k_bits >= 1 and l_tables >= 1");

    const std::size_t d = cache.d();
    Rng gen(RngStream{spec.seed, 0x4C5348ULL});
    std::vector<double> planes(spec.l_tables * spec.k_bits * d);
    for (double& x : planes) x = gen.normal();

    auto signature_bit = [&](std::span<const double> v, std::size_t t, std::size_t k) {
        const double* w = planes.data() + (t * spec.k_bits + k) * d;
        return dot({w, d}, v) >= 0.0;
    };

    std::vector<std::pair<std::size_t, double>> hits;  // (index, inclusion prob)
    for (std::size_t i = 0; i < cache.n(); ++i) {
        bool selected = false;
        for (std::size_t t = 0; t < spec.l_tables && !selected; ++t) {
            bool match = true;
            for (std::size_t k = 0; k < spec.k_bits && match; ++k)
                match = signature_bit(cache.keys.row(i), t, k) == signature_bit(q, t, k);
            selected = match;
        }
        if (!selected) continue;
        const double theta = detail::vector_angle(cache.keys.row(i), q);
        double p = lsh_inclusion_prob(theta, spec.k_bits, spec.l_tables);
        // A collision with analytic probability 0 can only be a rounding
        // artifact of acos; keep the entry representable.
        p = std::clamp(p, 1e-300, 1.0);
        hits.emplace_back(i, p);
    }
    if (hits.empty()) throw EmptySelection("LSH selected no tokens");

    Selection sel;
    sel.n_total = cache.n();
    for (const auto& [i, p] : hits)
        if (p == 1.0) {
            sel.indices.push_back(i);
            sel.probs.push_back(1.0);
        }
    sel.n_static = sel.indices.size();
    for (const auto& [i, p] : hits)
        if (p != 1.0) {
            sel.indices.push_back(i);
            sel.probs.push_back(p);
        }
    return sel;
}

}  // namespace vattn
