// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "vattn/kv_cache.hpp"
#include "vattn/selection.hpp"

namespace vattn {

/// Attention result for one query. The normalizer is kept in log form
/// together with the shift applied before exponentiation so long-context
/// magnitudes stay representable; denom() reconstructs the true scale.
struct AttentionOutput {
    std::vector<double> out;  // length d
    double log_denom = 0.0;   // log of the shifted weight sum
    double shift = 0.0;       // max selected logit (scaled if scaling is on)

    double log_denom_true() const { return log_denom + shift; }
    double denom() const { return std::exp(log_denom_true()); }
};

/// Full softmax weights for one query plus their descending order
/// (ties broken toward the lower index).
struct ScoreProfile {
    std::vector<double> scores;
    std::vector<std::size_t> sorted_order;
};

namespace detail {

inline void check_query(const KVCache& cache, std::span<const double> q) {
    if (q.size() != cache.d()) throw ShapeMismatch("query width does not match cache");
    if (cache.n() == 0) throw EmptyCache("cache has no tokens");
}

inline double logit_scale(const KVCache& cache, bool scale_flag) {
    return scale_flag ? 1.0 / std::sqrt(static_cast<double>(cache.d())) : 1.0;
}

}  // namespace detail

/// logits[i] = <K[i], q>, divided by sqrt(d) iff scale_flag.
inline std::vector<double> attention_logits(const KVCache& cache, std::span<const double> q,
                                            bool scale_flag) {
    detail::check_query(cache, q);
    const double s = detail::logit_scale(cache, scale_flag);
    std::vector<double> logits(cache.n());
    for (std::size_t i = 0; i < cache.n(); ++i) logits[i] = s * dot(cache.keys.row(i), q);
    return logits;
}

/// Exact attention over every token, max-shifted before exponentiation.
inline AttentionOutput full_sdpa(const KVCache& cache, std::span<const double> q,
                                 bool scale_flag) {
    const std::vector<double> logits = attention_logits(cache, q, scale_flag);
    const double shift = *std::max_element(logits.begin(), logits.end());

    AttentionOutput res;
    res.shift = shift;
    res.out.assign(cache.d(), 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < cache.n(); ++i) {
        const double w = std::exp(logits[i] - shift);
        wsum += w;
        const auto v = cache.values.row(i);
        for (std::size_t j = 0; j < cache.d(); ++j) res.out[j] += w * v[j];
    }
    for (double& x : res.out) x /= wsum;
    res.log_denom = std::log(wsum);
    return res;
}

/// Exact attention scores a_i and their descending sort order.
inline ScoreProfile attention_scores(const KVCache& cache, std::span<const double> q,
                                     bool scale_flag) {
    const std::vector<double> logits = attention_logits(cache, q, scale_flag);
    const double shift = *std::max_element(logits.begin(), logits.end());

    ScoreProfile prof;
    prof.scores.resize(cache.n());
    double wsum = 0.0;
    for (std::size_t i = 0; i < cache.n(); ++i) {
        prof.scores[i] = std::exp(logits[i] - shift);
        wsum += prof.scores[i];
    }
    for (double& s : prof.scores) s /= wsum;

    prof.sorted_order.resize(cache.n());
    std::iota(prof.sorted_order.begin(), prof.sorted_order.end(), std::size_t{0});
    std::stable_sort(prof.sorted_order.begin(), prof.sorted_order.end(),
                     [&](std::size_t a, std::size_t b) { return prof.scores[a] > prof.scores[b]; });
    return prof;
}

/// Sparse attention over a selection with importance weights 1/p.
///
/// The shared shift is the max logit over the selected set; only the
/// exponentials need stabilization, the 1/p factors are O(n) and applied
/// afterwards. With every probability equal to 1 this is deterministic
/// sparse attention; with the full index set it reduces to full_sdpa.
inline AttentionOutput sdpa_selected(const KVCache& cache, std::span<const double> q,
                                     const Selection& sel, bool scale_flag) {
    detail::check_query(cache, q);
    if (sel.indices.empty()) throw EmptySelection("selection has no indices");
    if (sel.n_total != cache.n())
        throw ShapeMismatch("selection was drawn against a different token count");
    const double s = detail::logit_scale(cache, scale_flag);

    double shift = -std::numeric_limits<double>::infinity();
    std::vector<double> logits(sel.indices.size());
    for (std::size_t k = 0; k < sel.indices.size(); ++k) {
        const std::size_t idx = sel.indices[k];
        if (idx >= cache.n()) throw IndexOutOfRange("selection index >= n");
        const double p = sel.probs[k];
        if (!(p > 0.0 && p <= 1.0)) throw InvalidProbability("probability outside (0,1]");
        logits[k] = s * dot(cache.keys.row(idx), q);
        shift = std::max(shift, logits[k]);
    }

    AttentionOutput res;
    res.shift = shift;
    res.out.assign(cache.d(), 0.0);
    double wsum = 0.0;
    for (std::size_t k = 0; k < sel.indices.size(); ++k) {
        const double w = std::exp(logits[k] - shift) / sel.probs[k];
        wsum += w;
        const auto v = cache.values.row(sel.indices[k]);
        for (std::size_t j = 0; j < cache.d(); ++j) res.out[j] += w * v[j];
    }
    for (double& x : res.out) x /= wsum;
    res.log_denom = std::log(wsum);
    return res;
}

/// ||est - ref||_2 / ||ref||_2
inline double rel_error(std::span<const double> est, std::span<const double> ref) {
    if (est.size() != ref.size()) throw ShapeMismatch("rel_error length mismatch");
    double diff2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = est[i] - ref[i];
        diff2 += d * d;
        ref2 += ref[i] * ref[i];
    }
    if (ref2 == 0.0) throw ZeroReference("reference vector has zero norm");
    return std::sqrt(diff2 / ref2);
}

/// |D_est/D_ref - 1| computed in log space so extreme normalizers stay finite.
inline double denom_rel_error(const AttentionOutput& est, const AttentionOutput& ref) {
    return std::abs(std::expm1(est.log_denom_true() - ref.log_denom_true()));
}

}  // namespace vattn
