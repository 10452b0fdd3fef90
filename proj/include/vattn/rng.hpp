// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vattn {

/// Identity of a reproducible random stream. Identical (seed, stream_id)
/// pairs replay identical draw sequences; concurrent consumers must use
/// distinct stream ids.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive a child stream; used to split one logical stream into
/// independent per-purpose streams (base sample vs. residual draw, per
/// query, per trial).
inline RngStream derive(RngStream s, std::uint64_t lane) {
    return RngStream{s.seed, splitmix64(s.stream_id ^ splitmix64(lane + 0x51F3C6B7ULL))};
}

/// Draw engine over an RngStream. mt19937_64 output is pinned by the
/// standard; the distribution transforms below are hand-rolled because
/// <random> distributions are implementation-defined and would break the
/// cross-platform reproducibility contract.
class Rng {
public:
    explicit Rng(RngStream s)
        : eng_(splitmix64(splitmix64(s.seed) ^ splitmix64(s.stream_id ^ 0xA02BDBF7BB3C0A7ULL))) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); bound must be nonzero. Rejection
    /// sampling keeps the draw exactly uniform.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

    /// Standard normal via the Marsaglia polar method (no trig, spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace vattn
