// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one verdict line per criterion, nonzero exit when any
// criterion fails. Expected values and tolerances are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vattn/vattn.hpp"

using namespace vattn;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

KVCache random_cache(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng gen(RngStream{seed, 3});
    KVCache cache;
    cache.keys = RowMatrix(n, d);
    cache.values = RowMatrix(n, d);
    for (double& x : cache.keys.data()) x = gen.normal();
    for (double& x : cache.values.data()) x = gen.normal();
    return cache;
}

std::vector<double> random_query(std::size_t d, std::uint64_t seed) {
    Rng gen(RngStream{seed, 4});
    std::vector<double> q(d);
    for (double& x : q) x = gen.normal();
    return q;
}

std::string fmt(double x) { return format_double(x); }

// Exact sums via an independent dense pass.
struct ExactSums {
    std::vector<double> num;
    double den = 0.0;
};

ExactSums exact_sums(const KVCache& cache, const std::vector<double>& q, bool scale) {
    const double s = scale ? 1.0 / std::sqrt(static_cast<double>(cache.d())) : 1.0;
    std::vector<double> logits(cache.n());
    double m = -1e308;
    for (std::size_t i = 0; i < cache.n(); ++i) {
        double l = 0.0;
        for (std::size_t j = 0; j < cache.d(); ++j) l += cache.keys(i, j) * q[j];
        logits[i] = s * l;
        m = std::max(m, logits[i]);
    }
    ExactSums res;
    res.num.assign(cache.d(), 0.0);
    for (std::size_t i = 0; i < cache.n(); ++i) {
        const double w = std::exp(logits[i] - m);
        res.den += w;
        for (std::size_t j = 0; j < cache.d(); ++j) res.num[j] += w * cache.values(i, j);
    }
    const double lift = std::exp(m);
    res.den *= lift;
    for (double& x : res.num) x *= lift;
    return res;
}

// Criterion 1: enumerating every C(6,3) residual sample, the estimator
// means reproduce the exact numerator and denominator to 1e-9 relative,
// in under a second.
Verdict criterion1() {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = 10, b = 3;
    const KVCache cache = random_cache(n, 4, 2026);
    const std::vector<double> q = random_query(4, 2026);
    const std::vector<std::size_t> det{0, 1, 2, 3};
    const std::vector<std::size_t> residual{4, 5, 6, 7, 8, 9};
    const ExactSums exact = exact_sums(cache, q, false);

    double mean_den = 0.0;
    std::vector<double> mean_num(cache.d(), 0.0);
    std::size_t count = 0;
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t c = a + 1; c < 6; ++c)
            for (std::size_t e = c + 1; e < 6; ++e) {
                Selection sel;
                sel.n_total = n;
                sel.n_static = det.size();
                sel.indices = det;
                sel.probs.assign(det.size(), 1.0);
                for (std::size_t k : {a, c, e}) {
                    sel.indices.push_back(residual[k]);
                    sel.probs.push_back(static_cast<double>(b) / 6.0);
                }
                const AttentionOutput out = sdpa_selected(cache, q, sel, false);
                const double den = out.denom();
                mean_den += den;
                for (std::size_t j = 0; j < cache.d(); ++j) mean_num[j] += out.out[j] * den;
                ++count;
            }
    mean_den /= static_cast<double>(count);
    for (double& x : mean_num) x /= static_cast<double>(count);

    const double den_err = std::abs(mean_den - exact.den) / exact.den;
    double num_err = 0.0;
    for (std::size_t j = 0; j < cache.d(); ++j)
        num_err = std::max(num_err, std::abs(mean_num[j] - exact.num[j]) /
                                        std::max(1e-300, std::abs(exact.num[j])));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Verdict v;
    v.pass = count == 20 && den_err <= 1e-9 && num_err <= 1e-9 && secs < 1.0;
    v.detail = "subsets=" + std::to_string(count) + " den_err=" + fmt(den_err) +
               " num_err=" + fmt(num_err) + " secs=" + fmt(secs);
    return v;
}

// Criterion 2: every method driven to density 1 reproduces full_sdpa
// within 1e-10 relative on 100 seeded caches with n <= 256.
Verdict criterion2() {
    double worst = 0.0;
    std::size_t density_misses = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng gen(RngStream{seed, 300});
        const std::size_t n = 1 + static_cast<std::size_t>(gen.below(256));
        const std::size_t d = 1 + static_cast<std::size_t>(gen.below(16));
        const KVCache cache = random_cache(n, d, seed + 5000);
        const std::vector<double> q = random_query(d, seed + 5000);
        const AttentionOutput full = full_sdpa(cache, q, true);

        std::vector<std::pair<std::string, Selection>> selections;

        GuaranteeParams params;
        params.eps = 0.1;
        params.delta = 0.1;
        params.sink_abs = n;
        const VAttentionResult va = vattention(cache, q, params, RngStream{seed, 1});
        selections.emplace_back("vattention", va.selection);

        selections.emplace_back(
            "oracle-top-k", compose({SelectionFragment::fixed(oracle_topk(cache, q, n))}, n));
        selections.emplace_back(
            "oracle-top-p",
            compose({SelectionFragment::fixed(oracle_topp(cache, q, 1.0 - 1e-12, true))}, n));
        selections.emplace_back("uniform",
                                compose({uniform_residual(n, {}, n, RngStream{seed, 2})}, n));
        auto top_half = oracle_topk(cache, q, n / 2);
        selections.emplace_back(
            "hybrid", compose({SelectionFragment::fixed(top_half),
                               uniform_residual(n, top_half, n - n / 2, RngStream{seed, 3})},
                              n));

        for (const auto& [name, sel] : selections) {
            if (sel.density() != 1.0) {
                ++density_misses;
                continue;
            }
            const AttentionOutput est = sdpa_selected(cache, q, sel, true);
            worst = std::max(worst, rel_error(est.out, full.out));
        }
    }
    Verdict v;
    v.pass = density_misses == 0 && worst <= 1e-10;
    v.detail = "caches=100 methods=5 worst_rel_err=" + fmt(worst) +
               " density_misses=" + std::to_string(density_misses);
    return v;
}

VerifyConfig gauss_verify_config(std::vector<double> grid, double delta, BoundKind bound) {
    VerifyConfig cfg;
    cfg.eps_grid = std::move(grid);
    cfg.delta = delta;
    cfg.trials = 1;
    cfg.seed = 7;
    cfg.params.f_s = 0.01;
    cfg.params.f_l = 0.01;
    cfg.params.f_t = 0.05;
    cfg.params.f_b = 0.05;
    cfg.params.bound_kind = bound;
    cfg.params.relaxation = Relaxation::DenominatorOnly;
    cfg.threads = 1;
    return cfg;
}

std::pair<KVCache, QueryBatch> gauss_workload() {
    WorkloadSpec spec;
    spec.dist = GaussianKeys{1};
    spec.n = 4096;
    spec.d = 64;
    spec.m = 512;
    spec.seed = 42;
    return gen_workload(spec);
}

// Criterion 3: CLT denominator guarantee at eps=0.1, delta=0.1 over 512
// queries: observed failure rate <= 0.15, single-threaded under 2 min.
Verdict criterion3(const KVCache& cache, const QueryBatch& queries) {
    const auto start = std::chrono::steady_clock::now();
    const VerificationReport report =
        verify_guarantee(cache, queries, gauss_verify_config({0.1}, 0.1, BoundKind::Clt));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double delta_hat = report.per_eps[0].fail_rate;
    Verdict v;
    v.pass = delta_hat <= 0.15 && secs < 120.0;
    v.detail = "delta_hat=" + fmt(delta_hat) + " (limit 0.15) mean_budget=" +
               fmt(report.per_eps[0].mean_budget) + " secs=" + fmt(secs);
    return v;
}

// Criterion 4: Hoeffding denominator guarantee at delta=0.2: failure rate
// <= 0.02.
Verdict criterion4(const KVCache& cache, const QueryBatch& queries) {
    const VerificationReport report =
        verify_guarantee(cache, queries, gauss_verify_config({0.1}, 0.2, BoundKind::Hoeffding));
    const double delta_hat = report.per_eps[0].fail_rate;
    Verdict v;
    v.pass = delta_hat <= 0.02;
    v.detail = "delta_hat=" + fmt(delta_hat) + " (limit 0.02) mean_budget=" +
               fmt(report.per_eps[0].mean_budget);
    return v;
}

// Criterion 5: Hoeffding/CLT budget ratio on the balanced two-point
// population is 2.80 +- 0.1, and the Hoeffding mean exceeds the CLT mean
// on every population in the battery.
Verdict criterion5() {
    const auto pops = default_tightness_populations(2000, 5);
    double two_point_ratio = 0.0;
    bool dominance = true;
    std::string worst_pop;
    for (const auto& pop : pops) {
        const auto rows = tightness_study(pop, 0.1, 0.2, 256, 5);
        const double ratio = rows[1].mean_budget / rows[0].mean_budget;
        if (pop.name == "two-point") two_point_ratio = ratio;
        if (!(rows[1].mean_budget > rows[0].mean_budget)) {
            dominance = false;
            worst_pop = pop.name;
        }
    }
    Verdict v;
    v.pass = std::abs(two_point_ratio - 2.80) <= 0.1 && dominance;
    v.detail = "two_point_ratio=" + fmt(two_point_ratio) + " (target 2.80 +- 0.1) dominance=" +
               (dominance ? "yes" : ("violated at " + worst_pop));
    return v;
}

// Criterion 6: Pearson correlation between eps and the mean denominator
// error over the grid {0.01..0.3} is at least 0.9.
Verdict criterion6(const KVCache& cache, const QueryBatch& queries) {
    const VerificationReport report = verify_guarantee(
        cache, queries,
        gauss_verify_config({0.01, 0.02, 0.05, 0.1, 0.2, 0.3}, 0.1, BoundKind::Clt));
    Verdict v;
    v.pass = report.pearson_corr >= 0.9;
    v.detail = "pearson=" + fmt(report.pearson_corr) + " (limit 0.9)";
    return v;
}

// Criterion 7: score-regime orderings at 10% budget with paired seeds.
Verdict criterion7() {
    const std::vector<double> budgets{0.1};
    const std::vector<std::string> dists{"zipf:2", "flat:0.1"};
    const auto rows = ablation_fig2(1024, budgets, dists, 17, 256);
    auto err = [&](const std::string& dist, const std::string& method) {
        for (const auto& r : rows)
            if (r.dist == dist && r.method == method) return r.mean_rel_err;
        throw std::logic_error("missing ablation row");
    };
    const double zipf_top = err("zipf:2", "oracle-top");
    const double zipf_rand = err("zipf:2", "random-sample");
    const double zipf_hyb = err("zipf:2", "hybrid");
    const double flat_top = err("flat:0.1", "oracle-top");
    const double flat_rand = err("flat:0.1", "random-sample");
    const double flat_hyb = err("flat:0.1", "hybrid");

    const bool sharp_order = zipf_top < zipf_rand;
    const bool flat_order = flat_rand < flat_top;
    const bool hybrid_ok = zipf_hyb <= 1.5 * std::min(zipf_top, zipf_rand) &&
                           flat_hyb <= 1.5 * std::min(flat_top, flat_rand);
    Verdict v;
    v.pass = sharp_order && flat_order && hybrid_ok;
    v.detail = "zipf(top=" + fmt(zipf_top) + " rand=" + fmt(zipf_rand) + " hyb=" + fmt(zipf_hyb) +
               ") flat(top=" + fmt(flat_top) + " rand=" + fmt(flat_rand) + " hyb=" +
               fmt(flat_hyb) + ")";
    return v;
}

// Criterion 8: whenever both component bounds hold with eps2 < 0.5, the
// combined output bound holds deterministically; 1e5 trials, zero
// violations.
Verdict criterion8() {
    Rng gen(RngStream{88, 1});
    const std::size_t d = 8;
    std::size_t violations = 0;
    const std::size_t trials = 100000;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::vector<double> num(d);
        for (double& x : num) x = gen.normal();
        const double num_norm = l2_norm(num);
        if (num_norm == 0.0) continue;
        const double den = std::exp(gen.normal(0.5, 1.0));
        const double eps1 = 0.999 * gen.uniform01();
        const double eps2 = 0.4999 * gen.uniform01();

        std::vector<double> dir(d);
        for (double& x : dir) x = gen.normal();
        const double dir_norm = l2_norm(dir);
        std::vector<double> num_hat = num;
        const double bump = eps1 * num_norm * gen.uniform01();
        for (std::size_t j = 0; j < d; ++j) num_hat[j] += dir[j] / dir_norm * bump;
        const double den_hat = den * (1.0 + eps2 * (2.0 * gen.uniform01() - 1.0));

        double lhs2 = 0.0, exact2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double exact = num[j] / den;
            const double diff = num_hat[j] / den_hat - exact;
            lhs2 += diff * diff;
            exact2 += exact * exact;
        }
        if (std::sqrt(lhs2) > 2.0 * (eps1 + eps2) * std::sqrt(exact2) + 1e-12) ++violations;
    }
    Verdict v;
    v.pass = violations == 0;
    v.detail = "trials=" + std::to_string(trials) + " violations=" + std::to_string(violations);
    return v;
}

// Criterion 9: random-walk MSE matches n^2 mu^2 + n sigma^2 within 5% at
// 1e5 trials for all (mu, sigma, n) combinations bar the all-zero one.
Verdict criterion9() {
    double worst = 0.0;
    std::string worst_case;
    std::uint64_t seed = 900;
    for (double mu : {0.0, 0.1})
        for (double sigma : {0.0, 1.0}) {
            if (mu == 0.0 && sigma == 0.0) continue;
            for (std::size_t steps : {std::size_t{10}, std::size_t{100}}) {
                const auto [empirical, analytic] =
                    random_walk_mse(mu, sigma, steps, 100000, seed++);
                const double ratio_err = std::abs(empirical / analytic - 1.0);
                if (ratio_err > worst) {
                    worst = ratio_err;
                    worst_case = "mu=" + fmt(mu) + " sigma=" + fmt(sigma) +
                                 " n=" + std::to_string(steps);
                }
            }
        }
    Verdict v;
    v.pass = worst <= 0.05;
    v.detail = "worst |emp/analytic - 1| = " + fmt(worst) + " at " + worst_case + " (limit 0.05)";
    return v;
}

// Criterion 10: the verifier is byte-deterministic in its master seed,
// including across worker counts.
Verdict criterion10() {
    WorkloadSpec spec;
    spec.dist = GaussianKeys{1};
    spec.n = 1024;
    spec.d = 32;
    spec.m = 64;
    spec.seed = 9;
    const auto [cache, queries] = gen_workload(spec);

    VerifyConfig cfg = gauss_verify_config({0.05, 0.1, 0.2}, 0.1, BoundKind::Clt);
    cfg.trials = 2;
    cfg.seed = 31;

    const auto csv_bytes = [&](std::size_t threads) {
        VerifyConfig run = cfg;
        run.threads = threads;
        const VerificationReport report = verify_guarantee(cache, queries, run);
        std::string bytes = kTrialHeader;
        bytes += '\n';
        for (const auto& rec : report.trials) {
            bytes += to_csv_row(rec);
            bytes += '\n';
        }
        return bytes;
    };

    const std::string serial_a = csv_bytes(1);
    const std::string serial_b = csv_bytes(1);
    const std::string parallel = csv_bytes(4);
    Verdict v;
    v.pass = serial_a == serial_b && serial_a == parallel;
    v.detail = std::string("repeat=") + (serial_a == serial_b ? "identical" : "DIFFERS") +
               " threads1vs4=" + (serial_a == parallel ? "identical" : "DIFFERS") +
               " bytes=" + std::to_string(serial_a.size());
    return v;
}

}  // namespace

int main() {
    const auto [gauss_cache, gauss_queries] = gauss_workload();

    std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;
    criteria.emplace_back("1 estimator exactness over exhaustive C(6,3) enumeration",
                          [] { return criterion1(); });
    criteria.emplace_back("2 full-budget identity for every method on 100 caches",
                          [] { return criterion2(); });
    criteria.emplace_back("3 CLT denominator guarantee (eps=0.1, delta=0.1, delta_hat<=0.15)",
                          [&] { return criterion3(gauss_cache, gauss_queries); });
    criteria.emplace_back("4 Hoeffding denominator guarantee (delta=0.2, delta_hat<=0.02)",
                          [&] { return criterion4(gauss_cache, gauss_queries); });
    criteria.emplace_back("5 Hoeffding/CLT tightness ratio 2.80 +- 0.1 with dominance",
                          [] { return criterion5(); });
    criteria.emplace_back("6 eps vs mean denominator error correlation >= 0.9",
                          [&] { return criterion6(gauss_cache, gauss_queries); });
    criteria.emplace_back("7 score-regime ablation orderings at 10% budget",
                          [] { return criterion7(); });
    criteria.emplace_back("8 combination bound, 1e5 trials, zero violations",
                          [] { return criterion8(); });
    criteria.emplace_back("9 random-walk MSE within 5% of n^2 mu^2 + n sigma^2",
                          [] { return criterion9(); });
    criteria.emplace_back("10 verifier byte-determinism across runs and worker counts",
                          [] { return criterion10(); });

    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Verdict verdict;
        try {
            verdict = run();
        } catch (const std::exception& e) {
            verdict.pass = false;
            verdict.detail = std::string("exception: ") + e.what();
        }
        std::cout << (verdict.pass ? "[PASS] " : "[FAIL] ") << "criterion " << name << " — "
                  << verdict.detail << '\n';
        if (!verdict.pass) ++failures;
    }
    if (failures) std::cout << failures << " criterion(s) failed\n";
    return failures == 0 ? 0 : 1;
}
