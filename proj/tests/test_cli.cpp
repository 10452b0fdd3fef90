// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef VATTN_CLI_PATH
#error "VATTN_CLI_PATH must point at the built CLI binary"
#endif

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(VATTN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string tmp(const char* stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli end-to-end: gen, sweep, verify, ablate, tightness, walk", "[cli]") {
    const std::string cache = tmp("vattn_cli_cache.vatn");
    const std::string csv = tmp("vattn_cli_out.csv");

    REQUIRE(run("gen --dist gauss --n 256 --d 16 --m 8 --seed 3 --out " + cache) == 0);

    REQUIRE(run("sweep --cache " + cache +
                " --methods vattention,oracle-top-k,oracle-top-p,uniform,hybrid,lsh"
                " --eps 0.1,0.2 --delta 0.1 --fs 0.01 --fl 0.01 --ft 0.05 --fb 0.05"
                " --seed 4 --out " + csv) == 0);
    {
        const std::string body = slurp(csv);
        CHECK(body.rfind("method,eps,delta,fs,fl,ft,fb,bound,relaxation,query,density,budget,"
                         "rel_err_out,rel_err_den,seed\n", 0) == 0);
        // 6 methods x 2 eps x 8 queries + header
        CHECK(std::count(body.begin(), body.end(), '\n') == 97);
    }

    REQUIRE(run("verify --cache " + cache +
                " --eps-grid 0.05,0.1 --delta 0.2 --trials 2 --seed 5 --out " + csv) == 0);
    REQUIRE(run("verify --cache " + cache +
                " --eps-grid 0.1 --delta 0.2 --bound hoeffding --relaxation full --reuse-base"
                " --trials 1 --seed 5 --threads 2 --out " + csv) == 0);

    REQUIRE(run("ablate --n 128 --budgets 0.1,0.3 --dists zipf:2,flat:0.1 --seed 6 --trials 4"
                " --out " + csv) == 0);
    REQUIRE(run("tightness --eps 0.1 --delta 0.2 --trials 8 --seed 7 --ns 500 --out " + csv) == 0);
    REQUIRE(run("walk --mu 0.1 --sigma 1 --steps 10 --trials 1000 --seed 8") == 0);

    std::remove(cache.c_str());
    std::remove(csv.c_str());
}

TEST_CASE("cli exit codes distinguish validation and io failures", "[cli]") {
    const std::string cache = tmp("vattn_cli_codes.vatn");
    REQUIRE(run("gen --dist gauss --n 64 --d 8 --m 2 --seed 1 --out " + cache) == 0);

    SECTION("unknown flag is a validation error") {
        CHECK(run("gen --dist gauss --n 64 --d 8 --m 2 --seed 1 --bogus x --out " + cache) == 1);
    }
    SECTION("invalid spec is a validation error") {
        CHECK(run("gen --dist zipf --n 64 --d 8 --m 2 --seed 1 --out " + cache) == 1);
        CHECK(run("sweep --cache " + cache +
                  " --methods vattention --eps 0.1 --delta 0.1 --fs 0.5 --fl 0.5 --ft 0 --fb 0"
                  " --seed 1 --out /tmp/x.csv") == 1);
    }
    SECTION("missing cache file is an io error") {
        CHECK(run("sweep --cache /nonexistent.vatn --methods uniform --eps 0.1 --delta 0.1"
                  " --fs 0 --fl 0 --ft 0 --fb 0.1 --seed 1 --out /tmp/x.csv") == 2);
    }
    SECTION("unwritable output is an io error") {
        CHECK(run("gen --dist gauss --n 64 --d 8 --m 2 --seed 1 --out /nonexistent-dir/x.vatn") ==
              2);
    }
    SECTION("damaged cache is an io error") {
        std::ofstream os(cache, std::ios::binary | std::ios::trunc);
        os << "XXXX";
        os.close();
        CHECK(run("verify --cache " + cache +
                  " --eps-grid 0.1 --delta 0.1 --trials 1 --seed 1 --out /tmp/x.csv") == 2);
    }
    std::remove(cache.c_str());
}

TEST_CASE("cli verify output is byte-identical for a fixed master seed", "[cli]") {
    const std::string cache = tmp("vattn_cli_det.vatn");
    const std::string out1 = tmp("vattn_cli_det1.csv");
    const std::string out2 = tmp("vattn_cli_det2.csv");
    REQUIRE(run("gen --dist gauss --n 512 --d 16 --m 16 --seed 12 --out " + cache) == 0);
    REQUIRE(run("verify --cache " + cache +
                " --eps-grid 0.05,0.2 --delta 0.1 --trials 2 --seed 99 --threads 1 --out " +
                out1) == 0);
    REQUIRE(run("verify --cache " + cache +
                " --eps-grid 0.05,0.2 --delta 0.1 --trials 2 --seed 99 --threads 4 --out " +
                out2) == 0);
    CHECK(slurp(out1) == slurp(out2));
    std::remove(cache.c_str());
    std::remove(out1.c_str());
    std::remove(out2.c_str());
}
