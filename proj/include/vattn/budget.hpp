// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "vattn/attention.hpp"
#include "vattn/guarantee.hpp"
#include "vattn/kv_cache.hpp"
#include "vattn/rng.hpp"
#include "vattn/selectors.hpp"

namespace vattn {

/// Phi^{-1}(1 - delta/2) for the standard normal CDF Phi.
inline double normal_two_sided_z(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidTolerance("delta must be inside (0,1)");
    return std::numbers::sqrt2 * boost::math::erfc_inv(delta);
}

/// Plug-in statistics of the residual populations, computed from a base
/// sample. Everything lives in the shifted scale exp(logit - shift) with
/// the shift recorded; budget formulas only consume scale-free ratios.
struct SampleStats {
    double trace_cov_hat = 0.0;  // Tr of the covariance of {e^l * V}
    double sigma_hat = 0.0;      // std dev of {e^l}
    double num_norm_hat = 0.0;   // ||N_f + (n_s/|base|) * sum e^l V||_2
    double den_hat = 0.0;        // D_f + (n_s/|base|) * sum e^l
    double range_hat = 0.0;      // max - min of sampled e^l
    std::vector<std::size_t> base_indices;
    double shift = 0.0;
};

/// Sample-size request and how it was resolved.
struct BudgetResult {
    std::uint64_t b = 0;
    std::optional<std::pair<double, double>> eps_split;  // (eps', delta') of the combined grid
    BoundKind kind = BoundKind::Clt;
    bool clamped = false;  // hit n_s or the b_min floor
};

/// Residual-population statistics from a base sample drawn outside the
/// static set. The shift is the max logit over static + base.
inline SampleStats compute_stats(const KVCache& cache, std::span<const double> q,
                                 std::span<const std::size_t> static_set,
                                 std::span<const std::size_t> base_sample, bool scale_flag) {
    detail::check_query(cache, q);
    if (base_sample.empty()) throw EmptyBaseSample("base sample must be nonempty");

    std::vector<bool> is_static(cache.n(), false);
    std::size_t n_static = 0;
    for (std::size_t i : static_set) {
        if (i >= cache.n()) throw IndexOutOfRange("static index >= n");
        if (!is_static[i]) ++n_static;
        is_static[i] = true;
    }
    for (std::size_t i : base_sample) {
        if (i >= cache.n()) throw IndexOutOfRange("base-sample index >= n");
        if (is_static[i]) throw IndexOutOfRange("base sample overlaps the static set");
    }
    const std::size_t n_s = cache.n() - n_static;
    const double scale = detail::logit_scale(cache, scale_flag);
    const std::size_t d = cache.d();

    double shift = -std::numeric_limits<double>::infinity();
    std::vector<double> static_logits(static_set.size());
    for (std::size_t k = 0; k < static_set.size(); ++k) {
        static_logits[k] = scale * dot(cache.keys.row(static_set[k]), q);
        shift = std::max(shift, static_logits[k]);
    }
    std::vector<double> base_logits(base_sample.size());
    for (std::size_t k = 0; k < base_sample.size(); ++k) {
        base_logits[k] = scale * dot(cache.keys.row(base_sample[k]), q);
        shift = std::max(shift, base_logits[k]);
    }

    SampleStats st;
    st.shift = shift;
    st.base_indices.assign(base_sample.begin(), base_sample.end());

    double den_f = 0.0;
    std::vector<double> num_f(d, 0.0);
    for (std::size_t k = 0; k < static_set.size(); ++k) {
        const double w = std::exp(static_logits[k] - shift);
        den_f += w;
        const auto v = cache.values.row(static_set[k]);
        for (std::size_t j = 0; j < d; ++j) num_f[j] += w * v[j];
    }

    const std::size_t nb = base_sample.size();
    std::vector<double> x(nb);
    double x_sum = 0.0, x_min = std::numeric_limits<double>::infinity(), x_max = 0.0;
    std::vector<double> y_sum(d, 0.0);
    for (std::size_t k = 0; k < nb; ++k) {
        x[k] = std::exp(base_logits[k] - shift);
        x_sum += x[k];
        x_min = std::min(x_min, x[k]);
        x_max = std::max(x_max, x[k]);
        const auto v = cache.values.row(base_sample[k]);
        for (std::size_t j = 0; j < d; ++j) y_sum[j] += x[k] * v[j];
    }
    const double x_mean = x_sum / static_cast<double>(nb);

    double var_x = 0.0;
    std::vector<double> y_sq(d, 0.0);
    for (std::size_t k = 0; k < nb; ++k) {
        var_x += (x[k] - x_mean) * (x[k] - x_mean);
        const auto v = cache.values.row(base_sample[k]);
        for (std::size_t j = 0; j < d; ++j) {
            const double dy = x[k] * v[j] - y_sum[j] / static_cast<double>(nb);
            y_sq[j] += dy * dy;
        }
    }
    st.sigma_hat = std::sqrt(var_x / static_cast<double>(nb));
    st.range_hat = x_max - x_min;
    double trace = 0.0;
    for (std::size_t j = 0; j < d; ++j) trace += y_sq[j] / static_cast<double>(nb);
    st.trace_cov_hat = trace;

    const double lift = static_cast<double>(n_s) / static_cast<double>(nb);
    st.den_hat = den_f + lift * x_sum;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double c = num_f[j] + lift * y_sum[j];
        norm2 += c * c;
    }
    st.num_norm_hat = std::sqrt(norm2);
    return st;
}

namespace detail {

inline std::uint64_t ceil_to_u64(double raw) {
    const double c = std::ceil(raw);
    if (!(c >= 0.0)) return 0;
    if (c >= 1.8446744073709552e19) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(c);
}

inline std::pair<std::uint64_t, bool> clamp_budget(std::uint64_t b, std::size_t b_min,
                                                   std::size_t n_s,
                                                   BudgetFloorRule rule = BudgetFloorRule::ClampToMin) {
    const std::uint64_t floor_value = rule == BudgetFloorRule::ClampToMin ? b_min : 1;
    bool clamped = false;
    if (b < floor_value) {
        b = floor_value;
        clamped = true;
    }
    if (b > n_s) {
        b = n_s;
        clamped = true;
    }
    return {b, clamped};
}

}  // namespace detail

/// CLT (normal-approximation) sample size for estimating a sum of n_s
/// terms to absolute tolerance tau with failure probability delta:
/// ceil((z * n_s * spread / tau)^2), z = Phi^{-1}(1 - delta/2).
/// spread is sqrt(Tr Sigma) for vector populations, sigma for scalars.
/// Returned unclamped.
inline std::uint64_t clt_budget(double tau, double delta, std::size_t n_s, double spread) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidTolerance("tau must be positive");
    const double z = normal_two_sided_z(delta);
    if (spread < 0.0) throw InvalidTolerance("spread must be nonnegative");
    const double root = z * static_cast<double>(n_s) * spread / tau;
    return detail::ceil_to_u64(root * root);
}

/// Unclamped Hoeffding sample size:
/// ceil(n_s^2 * range^2 * ln(2/delta) / (2 tau^2)).
inline std::uint64_t hoeffding_budget_raw(double tau, double delta, std::size_t n_s,
                                          double range_hat) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidTolerance("tau must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidTolerance("delta must be inside (0,1)");
    if (range_hat < 0.0) throw InvalidTolerance("range must be nonnegative");
    const double ns = static_cast<double>(n_s);
    const double raw = ns * ns * range_hat * range_hat * std::log(2.0 / delta) / (2.0 * tau * tau);
    return detail::ceil_to_u64(raw);
}

/// Distribution-free Hoeffding sample size, clamped to [b_min, n_s].
inline std::uint64_t hoeffding_budget(double tau, double delta, std::size_t n_s, double range_hat,
                                      std::size_t b_min = 32,
                                      BudgetFloorRule rule = BudgetFloorRule::ClampToMin) {
    return detail::clamp_budget(hoeffding_budget_raw(tau, delta, n_s, range_hat), b_min, n_s, rule)
        .first;
}

/// Denominator budget (scalar corollary): tau = eps * D_hat, spread =
/// sigma_hat, clamped to [b_min, n_s].
inline std::uint64_t budget_denominator(double eps, double delta, const SampleStats& stats,
                                        std::size_t n_s, std::size_t b_min = 32,
                                        BudgetFloorRule rule = BudgetFloorRule::ClampToMin) {
    const std::uint64_t raw = clt_budget(eps * stats.den_hat, delta, n_s, stats.sigma_hat);
    return detail::clamp_budget(raw, b_min, n_s, rule).first;
}

/// Numerator budget (vector corollary): tau = eps * ||N_hat||_2, spread =
/// sqrt(Tr Sigma_hat), clamped to [b_min, n_s].
inline std::uint64_t budget_numerator(double eps, double delta, const SampleStats& stats,
                                      std::size_t n_s, std::size_t b_min = 32,
                                      BudgetFloorRule rule = BudgetFloorRule::ClampToMin) {
    const std::uint64_t raw =
        clt_budget(eps * stats.num_norm_hat, delta, n_s, std::sqrt(stats.trace_cov_hat));
    return detail::clamp_budget(raw, b_min, n_s, rule).first;
}

namespace detail {

/// eps' lattice: mirrored geometric points inside (0, eps) including
/// eps/2; resolves the steep b ~ eps'^-2 region near both endpoints.
inline std::vector<double> eps_grid(double eps, std::size_t points) {
    const std::size_t low = (points - 1) / 2;
    const std::size_t high = points - 1 - low;
    std::vector<double> g;
    g.reserve(points);
    for (std::size_t k = low; k >= 1; --k) g.push_back(eps * std::ldexp(1.0, -static_cast<int>(k + 1)));
    g.push_back(eps * 0.5);
    for (std::size_t k = 1; k <= high; ++k)
        g.push_back(eps * (1.0 - std::ldexp(1.0, -static_cast<int>(k + 1))));
    return g;
}

/// delta' lattice: linear from delta/G to delta*(1-1/G) inclusive, so
/// neither side of the split receives zero failure probability.
inline std::vector<double> delta_grid(double delta, std::size_t points) {
    std::vector<double> g;
    g.reserve(points);
    const double lo = delta / static_cast<double>(points);
    const double hi = delta * (1.0 - 1.0 / static_cast<double>(points));
    for (std::size_t k = 0; k < points; ++k) {
        const double t = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
        g.push_back(lo + t * (hi - lo));
    }
    return g;
}

inline std::uint64_t side_budget(double tau, double delta, std::size_t n_s, double spread,
                                 BoundKind kind, double range_for_hoeffding) {
    if (spread == 0.0 && kind == BoundKind::Clt) return 0;
    if (kind == BoundKind::Hoeffding && range_for_hoeffding == 0.0) return 0;
    if (kind == BoundKind::Hoeffding) {
        const double ns = static_cast<double>(n_s);
        if (!(tau > 0.0)) throw InvalidTolerance("tau must be positive");
        const double raw =
            ns * ns * range_for_hoeffding * range_for_hoeffding * std::log(2.0 / delta) /
            (2.0 * tau * tau);
        return ceil_to_u64(raw);
    }
    return clt_budget(tau, delta, n_s, spread);
}

}  // namespace detail

/// Combined budget for a joint (eps, delta) guarantee on the attention
/// output: minimizes max(b_D(eps'/2, delta'), b_N((eps-eps')/2,
/// delta-delta')) over an interior lattice of splits.
///
/// With kind=Hoeffding the denominator side uses the range bound; the
/// numerator side always uses the CLT vector bound (there is no scalar
/// range for a vector population).
inline BudgetResult budget_combined(double eps, double delta, const SampleStats& stats,
                                    std::size_t n_s, std::size_t grid_points,
                                    std::size_t b_min = 32, BoundKind kind = BoundKind::Clt,
                                    double range_inflation = 1.0,
                                    BudgetFloorRule rule = BudgetFloorRule::ClampToMin) {
    if (grid_points < 2) throw InvalidSpec("grid_points must be >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidTolerance("eps must be inside (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidTolerance("delta must be inside (0,1)");

    const std::vector<double> eps_pts = detail::eps_grid(eps, grid_points);
    const std::vector<double> delta_pts = detail::delta_grid(delta, grid_points);
    const double spread_n = std::sqrt(stats.trace_cov_hat);
    const double range = stats.range_hat * range_inflation;

    // A vanishing plug-in norm with nonzero spread makes the relative
    // target unreachable; treat that side as "sample everything".
    auto side = [&](double tau, double dp, double spread, BoundKind k, double rng_hat) {
        if (spread == 0.0 && (k == BoundKind::Clt || rng_hat == 0.0)) return std::uint64_t{0};
        if (!(tau > 0.0)) return std::numeric_limits<std::uint64_t>::max();
        return detail::side_budget(tau, dp, n_s, spread, k, rng_hat);
    };

    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    std::pair<double, double> best_split{eps_pts.front(), delta_pts.front()};
    for (double ep : eps_pts) {
        for (double dp : delta_pts) {
            const std::uint64_t b_d =
                side(0.5 * ep * stats.den_hat, dp, stats.sigma_hat, kind, range);
            const std::uint64_t b_n = side(0.5 * (eps - ep) * stats.num_norm_hat, delta - dp,
                                           spread_n, BoundKind::Clt, 0.0);
            const std::uint64_t b = std::max(b_d, b_n);
            if (b < best) {
                best = b;
                best_split = {ep, dp};
            }
        }
    }

    auto [b, clamped] = detail::clamp_budget(best, b_min, n_s, rule);
    BudgetResult res;
    res.b = b;
    res.eps_split = best_split;
    res.kind = kind;
    res.clamped = clamped;
    return res;
}

/// Everything one verified evaluation produces. rows_read counts the
/// distinct KV rows touched (static set, base sample, residual draw) and
/// is the honest density numerator.
struct VAttentionResult {
    AttentionOutput output;
    Selection selection;
    BudgetResult budget;
    std::vector<std::size_t> base_indices;
    std::size_t rows_read = 0;

    double read_density() const {
        return selection.n_total == 0
                   ? 0.0
                   : static_cast<double>(rows_read) / static_cast<double>(selection.n_total);
    }
};

/// Verified sparse attention for one query: deterministic sink/local/top-k
/// selection, base-sample statistics, adaptive residual sample size per
/// the configured bound and relaxation, then importance-weighted sparse
/// attention over the composed selection.
inline VAttentionResult vattention(const KVCache& cache, std::span<const double> q,
                                   const GuaranteeParams& params, RngStream rng,
                                   bool scale_flag = true) {
    params.validate();
    detail::check_query(cache, q);
    const std::size_t n = cache.n();

    auto frac_count = [n](double f) {
        return static_cast<std::size_t>(std::floor(f * static_cast<double>(n)));
    };
    const std::size_t c_s = std::min(n, params.sink_abs.value_or(frac_count(params.f_s)));
    const std::size_t c_l = std::min(n, params.local_abs.value_or(frac_count(params.f_l)));

    std::vector<bool> picked(n, false);
    for (std::size_t i : sink_indices(n, c_s)) picked[i] = true;
    for (std::size_t i : local_indices(n, c_l)) picked[i] = true;
    std::vector<std::size_t> sink_local;
    for (std::size_t i = 0; i < n; ++i)
        if (picked[i]) sink_local.push_back(i);

    const std::size_t c_t = std::min(frac_count(params.f_t), n - sink_local.size());
    for (std::size_t i : oracle_topk(cache, q, c_t, sink_local)) picked[i] = true;

    std::vector<std::size_t> static_set;
    for (std::size_t i = 0; i < n; ++i)
        if (picked[i]) static_set.push_back(i);
    const std::size_t n_s = n - static_set.size();

    VAttentionResult res;
    if (n_s == 0) {
        res.selection = compose({SelectionFragment::fixed(static_set)}, n);
        res.output = sdpa_selected(cache, q, res.selection, scale_flag);
        res.budget = BudgetResult{0, std::nullopt, params.bound_kind, false};
        res.rows_read = static_set.size();
        return res;
    }

    const std::size_t c_b = std::min(
        n_s, std::max(params.base_min, static_cast<std::size_t>(std::ceil(
                                           params.f_b * static_cast<double>(n_s)))));
    SelectionFragment base = uniform_residual(n, static_set, c_b, derive(rng, 0));
    const SampleStats stats = compute_stats(cache, q, static_set, base.indices, scale_flag);

    BudgetResult budget;
    if (params.relaxation == Relaxation::Full) {
        budget = budget_combined(params.eps, params.delta, stats, n_s, params.grid_points,
                                 params.b_min, params.bound_kind, params.range_inflation,
                                 params.b_floor_rule);
    } else {
        const double tau = params.eps * stats.den_hat;
        std::uint64_t raw;
        if (params.bound_kind == BoundKind::Hoeffding) {
            raw = stats.range_hat == 0.0
                      ? 0
                      : detail::side_budget(tau, params.delta, n_s, stats.sigma_hat,
                                            BoundKind::Hoeffding,
                                            stats.range_hat * params.range_inflation);
        } else {
            raw = stats.sigma_hat == 0.0 ? 0 : clt_budget(tau, params.delta, n_s, stats.sigma_hat);
        }
        auto [b, clamped] = detail::clamp_budget(raw, params.b_min, n_s, params.b_floor_rule);
        budget = BudgetResult{b, std::nullopt, params.bound_kind, clamped};
    }

    SelectionFragment dyn;
    std::size_t residual_rows_read;
    if (params.reuse_base) {
        // Extending a without-replacement draw from the remaining pool keeps
        // the union a uniform sample at the combined size.
        std::vector<std::size_t> merged = base.indices;
        if (budget.b > merged.size()) {
            std::vector<std::size_t> excl = static_set;
            excl.insert(excl.end(), merged.begin(), merged.end());
            SelectionFragment extra =
                uniform_residual(n, excl, static_cast<std::size_t>(budget.b) - merged.size(),
                                 derive(rng, 1));
            merged.insert(merged.end(), extra.indices.begin(), extra.indices.end());
        }
        std::sort(merged.begin(), merged.end());
        const double prob = static_cast<double>(merged.size()) / static_cast<double>(n_s);
        residual_rows_read = merged.size();
        dyn = SelectionFragment::sampled(std::move(merged), prob);
    } else {
        dyn = uniform_residual(n, static_set, static_cast<std::size_t>(budget.b), derive(rng, 1));
        std::vector<std::size_t> uni;
        std::set_union(base.indices.begin(), base.indices.end(), dyn.indices.begin(),
                       dyn.indices.end(), std::back_inserter(uni));
        residual_rows_read = uni.size();
    }

    res.selection = compose({SelectionFragment::fixed(static_set), dyn}, n);
    res.output = sdpa_selected(cache, q, res.selection, scale_flag);
    res.budget = budget;
    res.base_indices = std::move(base.indices);
    res.rows_read = static_set.size() + residual_rows_read;
    return res;
}

}  // namespace vattn
