// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vattn/budget.hpp"
#include "vattn/csv.hpp"
#include "vattn/workload.hpp"

namespace vattn {

/// Runs fn(0..count-1) on up to `threads` workers. Each index owns its
/// output slot, so results do not depend on the worker count.
template <typename Fn>
inline void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(threads, count);
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline double pearson_corr(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw InvalidSpec("pearson needs two equal series of length >= 2");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline double percentile_nearest_rank(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[rank == 0 ? 0 : rank - 1];
}

// ---------------------------------------------------------------------------
// Method sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::vector<std::string> methods{"vattention"};
    std::vector<double> eps_list{0.1};
    double delta = 0.1;
    double fs = 0.01, fl = 0.01, ft = 0.05, fb = 0.05;
    BoundKind bound = BoundKind::Clt;
    Relaxation relaxation = Relaxation::DenominatorOnly;
    bool reuse_base = false;
    std::uint64_t seed = 0;
    bool scale = true;
    std::size_t threads = 1;
    std::size_t lsh_bits = 4;
    std::size_t lsh_tables = 8;
};

namespace detail {

inline GuaranteeParams sweep_params(const SweepConfig& cfg, double eps) {
    GuaranteeParams p;
    p.eps = eps;
    p.delta = cfg.delta;
    p.f_s = cfg.fs;
    p.f_l = cfg.fl;
    p.f_t = cfg.ft;
    p.f_b = cfg.fb;
    p.bound_kind = cfg.bound;
    p.relaxation = cfg.relaxation;
    p.reuse_base = cfg.reuse_base;
    return p;
}

/// Evaluate one (method, eps, query) cell against a precomputed full
/// reference. All stochastic methods draw from `stream`, which is shared
/// across methods of the same cell (paired draws).
inline TrialRecord eval_method(const KVCache& cache, std::span<const double> q,
                               const AttentionOutput& ref, const std::string& method, double eps,
                               const SweepConfig& cfg, std::size_t query_index, RngStream stream) {
    const std::size_t n = cache.n();
    TrialRecord rec;
    rec.method = method;
    rec.eps = eps;
    rec.delta = cfg.delta;
    rec.fs = cfg.fs;
    rec.fl = cfg.fl;
    rec.ft = cfg.ft;
    rec.fb = cfg.fb;
    rec.bound = to_string(cfg.bound);
    rec.relaxation = to_string(cfg.relaxation);
    rec.query = query_index;
    rec.seed = stream.stream_id;

    const double f_total = cfg.fs + cfg.fl + cfg.ft + cfg.fb;
    const std::size_t flat_budget =
        std::min(n, std::max<std::size_t>(1, static_cast<std::size_t>(
                                                 std::floor(f_total * static_cast<double>(n)))));

    AttentionOutput est;
    if (method == "vattention") {
        const VAttentionResult r = vattention(cache, q, sweep_params(cfg, eps), stream, cfg.scale);
        est = r.output;
        rec.density = r.read_density();
        rec.budget = r.budget.b;
    } else if (method == "oracle-top-k") {
        auto idx = oracle_topk(cache, q, flat_budget);
        const Selection sel = compose({SelectionFragment::fixed(std::move(idx))}, n);
        est = sdpa_selected(cache, q, sel, cfg.scale);
        rec.density = sel.density();
    } else if (method == "oracle-top-p") {
        const double p = std::clamp(1.0 - eps, 1e-9, 1.0 - 1e-12);
        auto idx = oracle_topp(cache, q, p, cfg.scale);
        const Selection sel = compose({SelectionFragment::fixed(std::move(idx))}, n);
        est = sdpa_selected(cache, q, sel, cfg.scale);
        rec.density = sel.density();
    } else if (method == "uniform") {
        SelectionFragment frag = uniform_residual(n, {}, flat_budget, stream);
        const Selection sel = compose({frag}, n);
        est = sdpa_selected(cache, q, sel, cfg.scale);
        rec.density = sel.density();
        rec.budget = flat_budget;
    } else if (method == "hybrid") {
        const std::size_t top_half = flat_budget / 2;
        auto top = oracle_topk(cache, q, top_half);
        const std::size_t sample_half = std::min(flat_budget - top_half, n - top_half);
        SelectionFragment frag = uniform_residual(n, top, sample_half, stream);
        const Selection sel = compose({SelectionFragment::fixed(std::move(top)), frag}, n);
        est = sdpa_selected(cache, q, sel, cfg.scale);
        rec.density = sel.density();
        rec.budget = sample_half;
    } else if (method == "lsh") {
        LshSpec spec{cfg.lsh_bits, cfg.lsh_tables, stream.stream_id};
        const Selection sel = lsh_selection(cache, q, spec);
        est = sdpa_selected(cache, q, sel, cfg.scale);
        rec.density = sel.density();
        rec.budget = sel.size() - sel.n_static;
    } else {
        throw InvalidSpec("unknown method '" + method + "'");
    }

    rec.rel_err_out = rel_error(est.out, ref.out);
    rec.rel_err_den = denom_rel_error(est, ref);
    return rec;
}

inline std::vector<AttentionOutput> reference_outputs(const KVCache& cache,
                                                      const QueryBatch& queries, bool scale,
                                                      std::size_t threads) {
    std::vector<AttentionOutput> refs(queries.m());
    parallel_for(queries.m(), threads,
                 [&](std::size_t j) { refs[j] = full_sdpa(cache, queries.queries.row(j), scale); });
    return refs;
}

}  // namespace detail

/// One TrialRecord per (method, eps, query); rows in that nesting order.
inline std::vector<TrialRecord> run_sweep(const KVCache& cache, const QueryBatch& queries,
                                          const SweepConfig& cfg) {
    validate_cache(cache, queries);
    if (cfg.methods.empty() || cfg.eps_list.empty())
        throw InvalidSpec("sweep needs at least one method and one eps");
    const auto refs = detail::reference_outputs(cache, queries, cfg.scale, cfg.threads);

    const std::size_t m = queries.m();
    const std::size_t cells = cfg.methods.size() * cfg.eps_list.size() * m;
    std::vector<TrialRecord> records(cells);
    parallel_for(cells, cfg.threads, [&](std::size_t cell) {
        const std::size_t q = cell % m;
        const std::size_t e = (cell / m) % cfg.eps_list.size();
        const std::size_t mi = cell / (m * cfg.eps_list.size());
        // Stream keyed by (eps, query) only: methods of the same cell see
        // paired draws.
        const RngStream stream =
            derive(RngStream{cfg.seed, 0}, e * 0x10001ULL + q * 0x2ULL + 1ULL);
        records[cell] =
            detail::eval_method(cache, queries.queries.row(q), refs[q], cfg.methods[mi],
                                cfg.eps_list[e], cfg, q, stream);
    });
    return records;
}

inline std::vector<TrialRecord> run_sweep(const KVCache& cache, const QueryBatch& queries,
                                          const SweepConfig& cfg, const std::string& out_path) {
    auto records = run_sweep(cache, queries, cfg);
    emit_csv(records, out_path);
    return records;
}

// ---------------------------------------------------------------------------
// Guarantee verification
// ---------------------------------------------------------------------------

struct VerifyConfig {
    std::vector<double> eps_grid{0.1};
    double delta = 0.1;
    std::size_t trials = 1;  // per (eps, query)
    std::uint64_t seed = 0;
    GuaranteeParams params;  // eps is overwritten from the grid
    bool scale = true;
    std::size_t threads = 1;
};

struct EpsSummary {
    double eps = 0.0;
    double mean_err = 0.0;     // guaranteed quantity (denominator under DenominatorOnly)
    double p95_err = 0.0;
    double mean_err_out = 0.0;
    double p95_err_out = 0.0;
    double fail_rate = 0.0;    // fraction of trials with guaranteed error > eps
    double mean_density = 0.0;
    double mean_budget = 0.0;
};

struct VerificationReport {
    std::vector<double> eps_grid;
    std::vector<EpsSummary> per_eps;
    double pearson_corr = 0.0;  // eps vs mean guaranteed error
    std::vector<TrialRecord> trials;
};

inline VerificationReport verify_guarantee(const KVCache& cache, const QueryBatch& queries,
                                           const VerifyConfig& cfg) {
    validate_cache(cache, queries);
    if (cfg.eps_grid.empty()) throw InvalidSpec("verify needs a nonempty eps grid");
    if (cfg.trials == 0) throw InvalidSpec("verify needs trials >= 1");

    VerificationReport report;
    report.eps_grid = cfg.eps_grid;
    std::sort(report.eps_grid.begin(), report.eps_grid.end());

    const auto refs = detail::reference_outputs(cache, queries, cfg.scale, cfg.threads);
    const std::size_t m = queries.m();
    const std::size_t per_eps = m * cfg.trials;
    const std::size_t total = report.eps_grid.size() * per_eps;
    const bool den_is_target = cfg.params.relaxation == Relaxation::DenominatorOnly;

    report.trials.resize(total);
    parallel_for(total, cfg.threads, [&](std::size_t row) {
        const std::size_t e = row / per_eps;
        const std::size_t q = (row % per_eps) / cfg.trials;
        const std::size_t t = row % cfg.trials;
        const double eps = report.eps_grid[e];

        GuaranteeParams params = cfg.params;
        params.eps = eps;
        params.delta = cfg.delta;
        const RngStream stream =
            derive(RngStream{cfg.seed, 0}, (e * m + q) * 0x9E37ULL + t + 1ULL);
        const VAttentionResult r = vattention(cache, queries.queries.row(q), params, stream,
                                              cfg.scale);

        TrialRecord rec;
        rec.method = "vattention";
        rec.eps = eps;
        rec.delta = cfg.delta;
        rec.fs = params.f_s;
        rec.fl = params.f_l;
        rec.ft = params.f_t;
        rec.fb = params.f_b;
        rec.bound = to_string(params.bound_kind);
        rec.relaxation = to_string(params.relaxation);
        rec.query = q;
        rec.density = r.read_density();
        rec.budget = r.budget.b;
        rec.rel_err_out = rel_error(r.output.out, refs[q].out);
        rec.rel_err_den = denom_rel_error(r.output, refs[q]);
        rec.seed = stream.stream_id;
        report.trials[row] = std::move(rec);
    });

    std::vector<double> mean_errors;
    for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
        EpsSummary s;
        s.eps = report.eps_grid[e];
        std::vector<double> errs, errs_out;
        errs.reserve(per_eps);
        errs_out.reserve(per_eps);
        std::size_t fails = 0;
        for (std::size_t k = 0; k < per_eps; ++k) {
            const TrialRecord& rec = report.trials[e * per_eps + k];
            const double err = den_is_target ? rec.rel_err_den : rec.rel_err_out;
            errs.push_back(err);
            errs_out.push_back(rec.rel_err_out);
            if (err > s.eps) ++fails;
            s.mean_density += rec.density;
            s.mean_budget += static_cast<double>(rec.budget);
        }
        const double count = static_cast<double>(per_eps);
        for (double x : errs) s.mean_err += x;
        for (double x : errs_out) s.mean_err_out += x;
        s.mean_err /= count;
        s.mean_err_out /= count;
        s.p95_err = percentile_nearest_rank(errs, 0.95);
        s.p95_err_out = percentile_nearest_rank(errs_out, 0.95);
        s.fail_rate = static_cast<double>(fails) / count;
        s.mean_density /= count;
        s.mean_budget /= count;
        report.per_eps.push_back(s);
        mean_errors.push_back(s.mean_err);
    }
    report.pearson_corr = report.eps_grid.size() >= 2
                              ? pearson_corr(report.eps_grid, mean_errors)
                              : 0.0;
    return report;
}

// ---------------------------------------------------------------------------
// Score-regime ablation (oracle-top vs random-sample vs hybrid)
// ---------------------------------------------------------------------------

struct AblationRow {
    std::string dist;
    double budget_frac = 0.0;
    std::string method;
    std::size_t trials = 0;
    double mean_rel_err = 0.0;
};

namespace detail {

inline std::variant<ZipfScores, FlatScores, GaussianKeys, OutlierMix> parse_dist(
    const std::string& token) {
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : token.substr(colon + 1);
    auto num = [&](double fallback) { return arg.empty() ? fallback : std::stod(arg); };
    if (name == "zipf") return ZipfScores{num(2.0)};
    if (name == "flat") return FlatScores{num(0.1)};
    if (name == "gauss") return GaussianKeys{static_cast<std::size_t>(num(1.0))};
    if (name == "outlier") return OutlierMix{num(0.05), 4.0};
    throw InvalidSpec("unknown distribution '" + token + "'");
}

}  // namespace detail

/// For each (distribution, budget fraction) evaluates oracle-top,
/// random-sample and the 50/50 hybrid on freshly drawn caches with paired
/// sampling streams, and reports mean relative attention error.
inline std::vector<AblationRow> ablation_fig2(std::size_t n, std::span<const double> budget_fracs,
                                              std::span<const std::string> dists,
                                              std::uint64_t seed, std::size_t trials = 96,
                                              bool scale = true) {
    if (n == 0 || trials == 0) throw InvalidSpec("ablation needs n >= 1 and trials >= 1");
    for (double f : budget_fracs)
        if (!(f > 0.0 && f <= 1.0)) throw InvalidSpec("budget fractions must lie in (0,1]");

    const std::vector<std::string> methods{"oracle-top", "random-sample", "hybrid"};
    std::vector<AblationRow> rows;
    for (std::size_t di = 0; di < dists.size(); ++di) {
        const auto dist = detail::parse_dist(dists[di]);
        for (double frac : budget_fracs) {
            const std::size_t b =
                std::min(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(
                                                         frac * static_cast<double>(n)))));
            std::vector<double> sums(methods.size(), 0.0);
            for (std::size_t t = 0; t < trials; ++t) {
                WorkloadSpec spec;
                spec.dist = dist;
                spec.n = n;
                spec.d = std::holds_alternative<GaussianKeys>(dist) ||
                                 std::holds_alternative<OutlierMix>(dist)
                             ? 16
                             : 1;
                spec.m = 1;
                spec.seed = splitmix64(seed ^ splitmix64(di * 1000003ULL + t));
                const auto [cache, queries] = gen_workload(spec);
                const auto q = queries.queries.row(0);
                const AttentionOutput ref = full_sdpa(cache, q, scale);
                const RngStream stream = derive(RngStream{seed, 1}, di * 65537ULL + t);

                auto top = oracle_topk(cache, q, b);
                const Selection top_sel = compose({SelectionFragment::fixed(top)}, n);
                sums[0] += rel_error(sdpa_selected(cache, q, top_sel, scale).out, ref.out);

                SelectionFragment rand_frag = uniform_residual(n, {}, b, stream);
                const Selection rand_sel = compose({rand_frag}, n);
                sums[1] += rel_error(sdpa_selected(cache, q, rand_sel, scale).out, ref.out);

                auto top_half = oracle_topk(cache, q, b / 2);
                SelectionFragment half_frag = uniform_residual(n, top_half, b - b / 2, stream);
                const Selection hyb_sel =
                    compose({SelectionFragment::fixed(std::move(top_half)), half_frag}, n);
                sums[2] += rel_error(sdpa_selected(cache, q, hyb_sel, scale).out, ref.out);
            }
            for (std::size_t mi = 0; mi < methods.size(); ++mi)
                rows.push_back({dists[di], frac, methods[mi], trials,
                                sums[mi] / static_cast<double>(trials)});
        }
    }
    return rows;
}

inline void write_ablation_csv(std::span<const AblationRow> rows, const std::string& path) {
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows)
        table.push_back({r.dist, format_double(r.budget_frac), r.method, std::to_string(r.trials),
                         format_double(r.mean_rel_err)});
    emit_csv_table("dist,budget_frac,method,trials,mean_rel_err", table, path);
}

// ---------------------------------------------------------------------------
// CLT vs Hoeffding tightness study
// ---------------------------------------------------------------------------

/// A synthetic residual population given directly as logits; the study
/// estimates its sum-of-exponentials to (eps, delta).
struct TightnessPopulation {
    std::string name;
    std::vector<double> logits;
};

inline std::vector<TightnessPopulation> default_tightness_populations(std::size_t n_s,
                                                                      std::uint64_t seed) {
    std::vector<TightnessPopulation> pops;
    {
        TightnessPopulation p{"two-point", std::vector<double>(n_s)};
        for (std::size_t i = 0; i < n_s; ++i) p.logits[i] = i % 2 == 0 ? 0.0 : std::log(3.0);
        pops.push_back(std::move(p));
    }
    {
        Rng gen(RngStream{seed, 0x41ULL});
        TightnessPopulation p{"uniform-logits", std::vector<double>(n_s)};
        for (double& l : p.logits) l = gen.uniform01();
        pops.push_back(std::move(p));
    }
    {
        Rng gen(RngStream{seed, 0x42ULL});
        TightnessPopulation p{"gaussian-logits", std::vector<double>(n_s)};
        for (double& l : p.logits) l = 0.5 * gen.normal();
        pops.push_back(std::move(p));
    }
    {
        TightnessPopulation p{"zipf-tail", std::vector<double>(n_s)};
        for (std::size_t i = 0; i < n_s; ++i)
            p.logits[i] = -1.5 * std::log(static_cast<double>(i + 64));
        pops.push_back(std::move(p));
    }
    return pops;
}

struct TightnessRow {
    std::string population;
    std::string bound;
    double eps = 0.0;
    double delta = 0.0;
    std::size_t trials = 0;
    double mean_budget = 0.0;
    double delta_hat = 0.0;
    double mean_err = 0.0;
    double p95_err = 0.0;
};

/// Per trial: estimate the population statistics from a fresh base sample
/// (10% of the population, honest range, no inflation), size the sample
/// under each bound, draw it, and measure the relative error of the
/// estimated sum. delta_hat is the fraction of trials beyond eps.
inline std::vector<TightnessRow> tightness_study(const TightnessPopulation& pop, double eps,
                                                 double delta, std::size_t trials,
                                                 std::uint64_t seed, std::size_t b_min = 32) {
    const std::size_t n_s = pop.logits.size();
    if (n_s < 4) throw InvalidSpec("population too small");
    if (trials == 0) throw InvalidSpec("trials must be >= 1");

    const double shift = *std::max_element(pop.logits.begin(), pop.logits.end());
    std::vector<double> x(n_s);
    double exact_sum = 0.0;
    for (std::size_t i = 0; i < n_s; ++i) {
        x[i] = std::exp(pop.logits[i] - shift);
        exact_sum += x[i];
    }

    const std::size_t base_size =
        std::min(n_s, std::max<std::size_t>(64, n_s / 10));

    auto sample_sum_err = [&](std::size_t b, RngStream stream) {
        SelectionFragment frag = uniform_residual(n_s, {}, b, stream);
        double s = 0.0;
        for (std::size_t i : frag.indices) s += x[i];
        const double est = s * static_cast<double>(n_s) / static_cast<double>(b);
        return std::abs(est - exact_sum) / exact_sum;
    };

    std::vector<double> errs_clt, errs_hoe, budgets_clt, budgets_hoe;
    errs_clt.reserve(trials);
    errs_hoe.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        const RngStream trial_stream = derive(RngStream{seed, 2}, t);
        SelectionFragment base = uniform_residual(n_s, {}, base_size, derive(trial_stream, 0));
        double sum = 0.0, mn = x[base.indices[0]], mx = mn;
        for (std::size_t i : base.indices) {
            sum += x[i];
            mn = std::min(mn, x[i]);
            mx = std::max(mx, x[i]);
        }
        const double mean = sum / static_cast<double>(base.indices.size());
        double var = 0.0;
        for (std::size_t i : base.indices) var += (x[i] - mean) * (x[i] - mean);
        const double sigma_hat = std::sqrt(var / static_cast<double>(base.indices.size()));
        const double range_hat = mx - mn;
        const double den_hat = mean * static_cast<double>(n_s);
        const double tau = eps * den_hat;

        const std::uint64_t b_clt =
            detail::clamp_budget(sigma_hat == 0.0 ? 0 : clt_budget(tau, delta, n_s, sigma_hat),
                                 b_min, n_s)
                .first;
        const std::uint64_t b_hoe = hoeffding_budget(tau, delta, n_s, range_hat, b_min);
        budgets_clt.push_back(static_cast<double>(b_clt));
        budgets_hoe.push_back(static_cast<double>(b_hoe));
        errs_clt.push_back(sample_sum_err(b_clt, derive(trial_stream, 1)));
        errs_hoe.push_back(sample_sum_err(b_hoe, derive(trial_stream, 2)));
    }

    auto summarize = [&](const char* bound, const std::vector<double>& errs,
                         const std::vector<double>& budgets) {
        TightnessRow row;
        row.population = pop.name;
        row.bound = bound;
        row.eps = eps;
        row.delta = delta;
        row.trials = trials;
        for (double b : budgets) row.mean_budget += b;
        row.mean_budget /= static_cast<double>(trials);
        std::size_t fails = 0;
        for (double e : errs) {
            row.mean_err += e;
            if (e > eps) ++fails;
        }
        row.mean_err /= static_cast<double>(trials);
        row.delta_hat = static_cast<double>(fails) / static_cast<double>(trials);
        row.p95_err = percentile_nearest_rank(errs, 0.95);
        return row;
    };
    return {summarize("clt", errs_clt, budgets_clt), summarize("hoeffding", errs_hoe, budgets_hoe)};
}

inline void write_tightness_csv(std::span<const TightnessRow> rows, const std::string& path) {
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows)
        table.push_back({r.population, r.bound, format_double(r.eps), format_double(r.delta),
                         std::to_string(r.trials), format_double(r.mean_budget),
                         format_double(r.delta_hat), format_double(r.mean_err),
                         format_double(r.p95_err)});
    emit_csv_table("population,bound,eps,delta,trials,mean_budget,delta_hat,mean_err,p95_err",
                   table, path);
}

// ---------------------------------------------------------------------------
// Bias-vs-variance random walk
// ---------------------------------------------------------------------------

/// Simulates `trials` random walks of `steps` i.i.d. N(mu, sigma^2)
/// increments. Returns (empirical mean squared terminal displacement,
/// analytic n^2 mu^2 + n sigma^2).
inline std::pair<double, double> random_walk_mse(double mu, double sigma, std::size_t steps,
                                                 std::size_t trials, std::uint64_t seed) {
    if (steps == 0 || trials == 0) throw InvalidSpec("walk needs steps >= 1 and trials >= 1");
    if (sigma < 0.0) throw InvalidSpec("sigma must be >= 0");
    Rng gen(RngStream{seed, 0x57414C4BULL});
    double mse = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        double pos = 0.0;
        for (std::size_t s = 0; s < steps; ++s) pos += sigma == 0.0 ? mu : gen.normal(mu, sigma);
        mse += pos * pos;
    }
    mse /= static_cast<double>(trials);
    const double n = static_cast<double>(steps);
    return {mse, n * n * mu * mu + n * sigma * sigma};
}

}  // namespace vattn
