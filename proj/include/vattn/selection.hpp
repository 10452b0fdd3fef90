// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vattn/errors.hpp"

namespace vattn {

/// Unified deterministic + stochastic index set (S, P).
///
/// Deterministic entries carry probability exactly 1 and precede sampled
/// entries; both regions are kept sorted by index. Uniform-residual
/// composition yields one shared probability for the sampled region; the
/// LSH sampler assigns per-index probabilities.
struct Selection {
    std::vector<std::size_t> indices;
    std::vector<double> probs;
    std::size_t n_total = 0;
    std::size_t n_static = 0;

    std::size_t size() const { return indices.size(); }
    double density() const {
        return n_total == 0 ? 0.0 : static_cast<double>(indices.size()) / static_cast<double>(n_total);
    }

    void validate() const {
        if (indices.empty()) throw EmptySelection("selection has no indices");
        if (indices.size() != probs.size())
            throw ShapeMismatch("selection indices/probs length mismatch");
        if (n_static > indices.size()) throw ShapeMismatch("n_static exceeds selection size");
        std::vector<bool> seen(n_total, false);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            if (indices[k] >= n_total) throw IndexOutOfRange("selection index >= n_total");
            if (seen[indices[k]]) throw IndexOutOfRange("duplicate index in selection");
            seen[indices[k]] = true;
            const double p = probs[k];
            if (!(p > 0.0 && p <= 1.0)) throw InvalidProbability("probability outside (0,1]");
            if (k < n_static && p != 1.0)
                throw InvalidProbability("deterministic region must have prob exactly 1");
        }
    }
};

/// One composable piece of a selection: either a deterministic index list
/// or a sampled list with per-index inclusion probabilities.
struct SelectionFragment {
    std::vector<std::size_t> indices;
    std::vector<double> probs;  // empty => deterministic (all prob 1)

    bool deterministic() const { return probs.empty(); }

    static SelectionFragment fixed(std::vector<std::size_t> idx) {
        return SelectionFragment{std::move(idx), {}};
    }
    static SelectionFragment sampled(std::vector<std::size_t> idx, double common_prob) {
        std::vector<double> p(idx.size(), common_prob);
        return SelectionFragment{std::move(idx), std::move(p)};
    }
    static SelectionFragment sampled(std::vector<std::size_t> idx, std::vector<double> p) {
        return SelectionFragment{std::move(idx), std::move(p)};
    }
};

/// Unions deterministic fragments (duplicates collapse to one entry at
/// prob 1), then appends sampled entries with their probabilities. A
/// sampled index that also appears deterministically stays at prob 1; a
/// sampled index repeated across sampled fragments keeps its first
/// occurrence. Sampled entries carrying probability exactly 1 (an
/// exhaustive draw) join the deterministic region.
inline Selection compose(std::span<const SelectionFragment> fragments, std::size_t n) {
    std::vector<double> prob_of(n, 0.0);  // 0 marks "absent"
    for (const auto& frag : fragments) {
        if (!frag.deterministic()) continue;
        for (std::size_t idx : frag.indices) {
            if (idx >= n) throw IndexOutOfRange("deterministic fragment index >= n");
            prob_of[idx] = 1.0;
        }
    }
    for (const auto& frag : fragments) {
        if (frag.deterministic()) continue;
        if (frag.indices.size() != frag.probs.size())
            throw ShapeMismatch("sampled fragment indices/probs length mismatch");
        for (std::size_t k = 0; k < frag.indices.size(); ++k) {
            const std::size_t idx = frag.indices[k];
            if (idx >= n) throw IndexOutOfRange("sampled fragment index >= n");
            const double p = frag.probs[k];
            if (!(p > 0.0 && p <= 1.0)) throw InvalidProbability("probability outside (0,1]");
            if (prob_of[idx] == 0.0) prob_of[idx] = p;
        }
    }

    Selection sel;
    sel.n_total = n;
    for (std::size_t i = 0; i < n; ++i)
        if (prob_of[i] == 1.0) {
            sel.indices.push_back(i);
            sel.probs.push_back(1.0);
        }
    sel.n_static = sel.indices.size();
    for (std::size_t i = 0; i < n; ++i)
        if (prob_of[i] != 0.0 && prob_of[i] != 1.0) {
            sel.indices.push_back(i);
            sel.probs.push_back(prob_of[i]);
        }

    if (sel.indices.empty()) throw EmptySelection("composed selection is empty");
    return sel;
}

inline Selection compose(std::initializer_list<SelectionFragment> fragments, std::size_t n) {
    return compose(std::span<const SelectionFragment>(fragments.begin(), fragments.size()), n);
}

}  // namespace vattn
