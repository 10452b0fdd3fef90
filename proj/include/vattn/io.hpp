// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "vattn/kv_cache.hpp"

// "VATN" binary cache container, version 1.
//
// Layout, little-endian, no padding, no checksum:
//   magic   4 bytes  0x56 0x41 0x54 0x4E
//   version u32      1
//   n, d, m u64 each
//   K       n*d f32 row-major
//   V       n*d f32 row-major
//   Q       m*d f32 row-major
//
// Matrices are held as f64 in memory; persistence is f32. Generated
// workloads are quantized to f32 at creation so write/read is the
// identity on them.

namespace vattn {

inline constexpr std::array<unsigned char, 4> kCacheMagic = {0x56, 0x41, 0x54, 0x4E};
inline constexpr std::uint32_t kCacheVersion = 1;

namespace detail {

// Serialize integers byte-by-byte so the on-disk layout does not depend
// on host endianness.
template <typename T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_unsigned_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
bool get_le(std::istream& is, T& value) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
    value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(buf[i]) << (8 * i);
    return true;
}

inline void put_f32(std::ostream& os, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    put_le(os, bits);
}

inline bool get_f32(std::istream& is, float& f) {
    std::uint32_t bits;
    if (!get_le(is, bits)) return false;
    std::memcpy(&f, &bits, sizeof(bits));
    return true;
}

inline void write_matrix_f32(std::ostream& os, const RowMatrix& m) {
    for (double x : m.data()) put_f32(os, static_cast<float>(x));
}

inline RowMatrix read_matrix_f32(std::istream& is, std::size_t rows, std::size_t cols) {
    RowMatrix m(rows, cols);
    for (double& x : m.data()) {
        float f;
        if (!get_f32(is, f)) throw TruncatedFile("payload ends before the declared matrix sizes");
        x = static_cast<double>(f);
    }
    return m;
}

}  // namespace detail

inline void write_cache(const std::string& path, const KVCache& cache, const QueryBatch& queries) {
    validate_cache(cache, queries);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(kCacheMagic.data()), kCacheMagic.size());
    detail::put_le(os, kCacheVersion);
    detail::put_le(os, static_cast<std::uint64_t>(cache.n()));
    detail::put_le(os, static_cast<std::uint64_t>(cache.d()));
    detail::put_le(os, static_cast<std::uint64_t>(queries.m()));
    detail::write_matrix_f32(os, cache.keys);
    detail::write_matrix_f32(os, cache.values);
    detail::write_matrix_f32(os, queries.queries);
    os.flush();
    if (!os) throw IoFailure("write to '" + path + "' failed");
}

inline std::pair<KVCache, QueryBatch> read_cache(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoFailure("cannot open '" + path + "' for reading");
    std::array<unsigned char, 4> magic{};
    if (!is.read(reinterpret_cast<char*>(magic.data()), magic.size()))
        throw TruncatedFile("file shorter than the magic");
    if (magic != kCacheMagic) throw BadMagic("not a VATN cache container");
    std::uint32_t version;
    if (!detail::get_le(is, version)) throw TruncatedFile("file ends inside the header");
    if (version != kCacheVersion)
        throw UnsupportedVersion("container version " + std::to_string(version));
    std::uint64_t n, d, m;
    if (!detail::get_le(is, n) || !detail::get_le(is, d) || !detail::get_le(is, m))
        throw TruncatedFile("file ends inside the header");
    // Check the declared payload against the real file size before
    // allocating anything; a corrupt header must not drive allocation.
    constexpr std::uint64_t kHeaderBytes = 4 + 4 + 3 * 8;
    const std::uint64_t file_bytes = std::filesystem::file_size(path);
    if (d != 0 && (n > (UINT64_MAX / 8) / d || m > (UINT64_MAX / 4) / d))
        throw TruncatedFile("header sizes overflow the payload computation");
    const std::uint64_t payload = (2 * n * d + m * d) * 4;
    if (file_bytes < kHeaderBytes + payload)
        throw TruncatedFile("payload ends before the declared matrix sizes");
    KVCache cache;
    cache.keys = detail::read_matrix_f32(is, n, d);
    cache.values = detail::read_matrix_f32(is, n, d);
    QueryBatch queries;
    queries.queries = detail::read_matrix_f32(is, m, d);
    return {std::move(cache), std::move(queries)};
}

}  // namespace vattn
