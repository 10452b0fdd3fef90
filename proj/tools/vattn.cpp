// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vattn/vattn.hpp"

namespace {

int run_gen(const std::string& dist, std::size_t n, std::size_t d, std::size_t m,
            std::uint64_t seed, double s, double jitter, std::size_t clusters,
            double outlier_frac, double outlier_gain, const std::string& out) {
    vattn::WorkloadSpec spec;
    if (dist == "zipf")
        spec.dist = vattn::ZipfScores{s};
    else if (dist == "flat")
        spec.dist = vattn::FlatScores{jitter};
    else if (dist == "gauss")
        spec.dist = vattn::GaussianKeys{clusters};
    else if (dist == "outlier")
        spec.dist = vattn::OutlierMix{outlier_frac, outlier_gain};
    else
        throw vattn::InvalidSpec("unknown distribution '" + dist + "'");
    spec.n = n;
    spec.d = d;
    spec.m = m;
    spec.seed = seed;
    const auto [cache, queries] = vattn::gen_workload(spec);
    vattn::write_cache(out, cache, queries);
    std::cout << "wrote " << out << " (n=" << cache.n() << " d=" << cache.d()
              << " m=" << queries.m() << ")\n";
    return 0;
}

vattn::BoundKind parse_bound(const std::string& s) {
    if (s == "clt") return vattn::BoundKind::Clt;
    if (s == "hoeffding") return vattn::BoundKind::Hoeffding;
    throw vattn::InvalidSpec("unknown bound '" + s + "'");
}

vattn::Relaxation parse_relaxation(const std::string& s) {
    if (s == "den") return vattn::Relaxation::DenominatorOnly;
    if (s == "full") return vattn::Relaxation::Full;
    throw vattn::InvalidSpec("unknown relaxation '" + s + "'");
}

void print_report(const vattn::VerificationReport& report) {
    std::cout << "eps,mean_err,p95_err,mean_err_out,fail_rate,mean_density,mean_budget\n";
    for (const auto& row : report.per_eps) {
        std::cout << vattn::format_double(row.eps) << ',' << vattn::format_double(row.mean_err)
                  << ',' << vattn::format_double(row.p95_err) << ','
                  << vattn::format_double(row.mean_err_out) << ','
                  << vattn::format_double(row.fail_rate) << ','
                  << vattn::format_double(row.mean_density) << ','
                  << vattn::format_double(row.mean_budget) << '\n';
    }
    std::cout << "pearson(eps, mean_err) = " << vattn::format_double(report.pearson_corr) << '\n';
}

void write_report_csv(const vattn::VerificationReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.per_eps)
        rows.push_back({vattn::format_double(r.eps), vattn::format_double(r.mean_err),
                        vattn::format_double(r.p95_err), vattn::format_double(r.mean_err_out),
                        vattn::format_double(r.p95_err_out), vattn::format_double(r.fail_rate),
                        vattn::format_double(r.mean_density), vattn::format_double(r.mean_budget),
                        vattn::format_double(report.pearson_corr)});
    vattn::emit_csv_table(
        "eps,mean_err,p95_err,mean_err_out,p95_err_out,fail_rate,mean_density,mean_budget,pearson",
        rows, path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vattn: verified sparse attention workbench"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic workload");
    std::string gen_dist;
    std::size_t gen_n = 1024, gen_d = 64, gen_m = 16, gen_clusters = 1;
    std::uint64_t gen_seed = 0;
    double gen_s = 1.0, gen_jitter = 0.1, gen_ofrac = 0.05, gen_ogain = 4.0;
    std::string gen_out;
    gen->add_option("--dist", gen_dist, "zipf|flat|gauss|outlier")->required();
    gen->add_option("--n", gen_n)->required();
    gen->add_option("--d", gen_d)->required();
    gen->add_option("--m", gen_m)->required();
    gen->add_option("--seed", gen_seed)->required();
    gen->add_option("--s", gen_s, "zipf exponent");
    gen->add_option("--jitter", gen_jitter, "flat logit jitter");
    gen->add_option("--clusters", gen_clusters, "gauss cluster count");
    gen->add_option("--outlier-frac", gen_ofrac);
    gen->add_option("--outlier-gain", gen_ogain);
    gen->add_option("--out", gen_out)->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "method sweep over a cache");
    std::string sweep_cache, sweep_out, sweep_bound = "clt", sweep_relax = "den";
    std::vector<std::string> sweep_methods;
    std::vector<double> sweep_eps;
    double sw_delta = 0.1, sw_fs = 0.01, sw_fl = 0.01, sw_ft = 0.05, sw_fb = 0.05;
    std::uint64_t sweep_seed = 0;
    bool sweep_reuse = false, sweep_noscale = false;
    std::size_t sweep_threads = 1, sweep_lsh_bits = 4, sweep_lsh_tables = 8;
    sweep->add_option("--cache", sweep_cache)->required();
    sweep->add_option("--methods", sweep_methods,
                      "vattention,oracle-top-k,oracle-top-p,uniform,hybrid,lsh")
        ->required()
        ->delimiter(',');
    sweep->add_option("--eps", sweep_eps)->required()->delimiter(',');
    sweep->add_option("--delta", sw_delta)->required();
    sweep->add_option("--fs", sw_fs)->required();
    sweep->add_option("--fl", sw_fl)->required();
    sweep->add_option("--ft", sw_ft)->required();
    sweep->add_option("--fb", sw_fb)->required();
    sweep->add_option("--bound", sweep_bound, "clt|hoeffding");
    sweep->add_option("--relaxation", sweep_relax, "den|full");
    sweep->add_flag("--reuse-base", sweep_reuse);
    sweep->add_option("--seed", sweep_seed)->required();
    sweep->add_option("--out", sweep_out)->required();
    sweep->add_option("--threads", sweep_threads);
    sweep->add_flag("--no-scale", sweep_noscale, "use raw inner products as logits");
    sweep->add_option("--lsh-bits", sweep_lsh_bits);
    sweep->add_option("--lsh-tables", sweep_lsh_tables);

    // verify
    auto* verify = app.add_subcommand("verify", "empirical guarantee verification");
    std::string ver_cache, ver_out, ver_report, ver_bound = "clt", ver_relax = "den";
    std::vector<double> ver_grid;
    double ver_delta = 0.1, ver_fs = 0.01, ver_fl = 0.01, ver_ft = 0.05, ver_fb = 0.05;
    std::size_t ver_trials = 1, ver_threads = 1;
    std::uint64_t ver_seed = 0;
    bool ver_reuse = false, ver_noscale = false;
    verify->add_option("--cache", ver_cache)->required();
    verify->add_option("--eps-grid", ver_grid)->required()->delimiter(',');
    verify->add_option("--delta", ver_delta)->required();
    verify->add_option("--trials", ver_trials)->required();
    verify->add_option("--seed", ver_seed)->required();
    verify->add_option("--out", ver_out)->required();
    verify->add_option("--report", ver_report, "also write the per-eps summary CSV");
    verify->add_option("--fs", ver_fs);
    verify->add_option("--fl", ver_fl);
    verify->add_option("--ft", ver_ft);
    verify->add_option("--fb", ver_fb);
    verify->add_option("--bound", ver_bound);
    verify->add_option("--relaxation", ver_relax);
    verify->add_flag("--reuse-base", ver_reuse);
    verify->add_option("--threads", ver_threads);
    verify->add_flag("--no-scale", ver_noscale);

    // ablate
    auto* ablate = app.add_subcommand("ablate", "oracle-top vs random-sample vs hybrid");
    std::size_t ab_n = 1024, ab_trials = 96;
    std::vector<double> ab_budgets;
    std::vector<std::string> ab_dists;
    std::uint64_t ab_seed = 0;
    std::string ab_out;
    ablate->add_option("--n", ab_n)->required();
    ablate->add_option("--budgets", ab_budgets)->required()->delimiter(',');
    ablate->add_option("--dists", ab_dists, "e.g. zipf:2,flat:0.1")->required()->delimiter(',');
    ablate->add_option("--seed", ab_seed)->required();
    ablate->add_option("--out", ab_out)->required();
    ablate->add_option("--trials", ab_trials);

    // tightness
    auto* tight = app.add_subcommand("tightness", "CLT vs Hoeffding budget study");
    double ti_eps = 0.1, ti_delta = 0.2;
    std::size_t ti_trials = 256, ti_ns = 2000;
    std::uint64_t ti_seed = 0;
    std::string ti_out;
    tight->add_option("--eps", ti_eps)->required();
    tight->add_option("--delta", ti_delta)->required();
    tight->add_option("--trials", ti_trials)->required();
    tight->add_option("--seed", ti_seed)->required();
    tight->add_option("--out", ti_out)->required();
    tight->add_option("--ns", ti_ns, "residual population size");

    // walk
    auto* walk = app.add_subcommand("walk", "random-walk MSE (bias vs variance)");
    double wa_mu = 0.0, wa_sigma = 1.0;
    std::size_t wa_steps = 100, wa_trials = 100000;
    std::uint64_t wa_seed = 0;
    walk->add_option("--mu", wa_mu)->required();
    walk->add_option("--sigma", wa_sigma)->required();
    walk->add_option("--steps", wa_steps)->required();
    walk->add_option("--trials", wa_trials)->required();
    walk->add_option("--seed", wa_seed)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen)
            return run_gen(gen_dist, gen_n, gen_d, gen_m, gen_seed, gen_s, gen_jitter,
                           gen_clusters, gen_ofrac, gen_ogain, gen_out);

        if (*sweep) {
            const auto [cache, queries] = vattn::read_cache(sweep_cache);
            vattn::SweepConfig cfg;
            cfg.methods = sweep_methods;
            cfg.eps_list = sweep_eps;
            cfg.delta = sw_delta;
            cfg.fs = sw_fs;
            cfg.fl = sw_fl;
            cfg.ft = sw_ft;
            cfg.fb = sw_fb;
            cfg.bound = parse_bound(sweep_bound);
            cfg.relaxation = parse_relaxation(sweep_relax);
            cfg.reuse_base = sweep_reuse;
            cfg.seed = sweep_seed;
            cfg.scale = !sweep_noscale;
            cfg.threads = sweep_threads;
            cfg.lsh_bits = sweep_lsh_bits;
            cfg.lsh_tables = sweep_lsh_tables;
            const auto records = vattn::run_sweep(cache, queries, cfg, sweep_out);
            std::cout << "wrote " << records.size() << " rows to " << sweep_out << '\n';
            return 0;
        }

        if (*verify) {
            const auto [cache, queries] = vattn::read_cache(ver_cache);
            vattn::VerifyConfig cfg;
            cfg.eps_grid = ver_grid;
            cfg.delta = ver_delta;
            cfg.trials = ver_trials;
            cfg.seed = ver_seed;
            cfg.params.f_s = ver_fs;
            cfg.params.f_l = ver_fl;
            cfg.params.f_t = ver_ft;
            cfg.params.f_b = ver_fb;
            cfg.params.bound_kind = parse_bound(ver_bound);
            cfg.params.relaxation = parse_relaxation(ver_relax);
            cfg.params.reuse_base = ver_reuse;
            cfg.scale = !ver_noscale;
            cfg.threads = ver_threads;
            const auto report = vattn::verify_guarantee(cache, queries, cfg);
            vattn::emit_csv(report.trials, ver_out);
            if (!ver_report.empty()) write_report_csv(report, ver_report);
            print_report(report);
            return 0;
        }

        if (*ablate) {
            const auto rows = vattn::ablation_fig2(ab_n, ab_budgets, ab_dists, ab_seed, ab_trials);
            vattn::write_ablation_csv(rows, ab_out);
            std::cout << "wrote " << rows.size() << " rows to " << ab_out << '\n';
            return 0;
        }

        if (*tight) {
            std::vector<vattn::TightnessRow> rows;
            for (const auto& pop : vattn::default_tightness_populations(ti_ns, ti_seed))
                for (auto& row : vattn::tightness_study(pop, ti_eps, ti_delta, ti_trials, ti_seed))
                    rows.push_back(std::move(row));
            vattn::write_tightness_csv(rows, ti_out);
            std::cout << "wrote " << rows.size() << " rows to " << ti_out << '\n';
            return 0;
        }

        if (*walk) {
            const auto [empirical, analytic] =
                vattn::random_walk_mse(wa_mu, wa_sigma, wa_steps, wa_trials, wa_seed);
            std::cout << "empirical_mse=" << vattn::format_double(empirical)
                      << " analytic_mse=" << vattn::format_double(analytic) << '\n';
            return 0;
        }
    } catch (const vattn::IoFailure& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const vattn::BadMagic& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const vattn::UnsupportedVersion& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const vattn::TruncatedFile& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const vattn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
