// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "vattn/errors.hpp"

namespace vattn {

/// Shortest round-trip decimal form, locale-independent.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// RFC-4180 quoting: fields holding separators, quotes or newlines are
/// quoted with embedded quotes doubled.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// One measurement row of a sweep or verification run.
struct TrialRecord {
    std::string method;
    double eps = 0.0;
    double delta = 0.0;
    double fs = 0.0, fl = 0.0, ft = 0.0, fb = 0.0;
    std::string bound;
    std::string relaxation;
    std::size_t query = 0;
    double density = 0.0;
    std::uint64_t budget = 0;
    double rel_err_out = 0.0;
    double rel_err_den = 0.0;
    std::uint64_t seed = 0;
};

inline constexpr const char* kTrialHeader =
    "method,eps,delta,fs,fl,ft,fb,bound,relaxation,query,density,budget,rel_err_out,rel_err_den,"
    "seed";

inline std::string to_csv_row(const TrialRecord& r) {
    std::string row;
    row += csv_escape(r.method);
    row += ',';
    row += format_double(r.eps);
    row += ',';
    row += format_double(r.delta);
    row += ',';
    row += format_double(r.fs);
    row += ',';
    row += format_double(r.fl);
    row += ',';
    row += format_double(r.ft);
    row += ',';
    row += format_double(r.fb);
    row += ',';
    row += csv_escape(r.bound);
    row += ',';
    row += csv_escape(r.relaxation);
    row += ',';
    row += std::to_string(r.query);
    row += ',';
    row += format_double(r.density);
    row += ',';
    row += std::to_string(r.budget);
    row += ',';
    row += format_double(r.rel_err_out);
    row += ',';
    row += format_double(r.rel_err_den);
    row += ',';
    row += std::to_string(r.seed);
    return row;
}

inline void emit_csv(std::span<const TrialRecord> records, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open '" + path + "' for writing");
    os << kTrialHeader << '\n';
    for (const auto& r : records) os << to_csv_row(r) << '\n';
    os.flush();
    if (!os) throw IoFailure("write to '" + path + "' failed");
}

/// Generic table writer for the ablation/tightness reports.
inline void emit_csv_table(const std::string& header,
                           std::span<const std::vector<std::string>> rows,
                           const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open '" + path + "' for writing");
    os << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << csv_escape(row[i]);
        }
        os << '\n';
    }
    os.flush();
    if (!os) throw IoFailure("write to '" + path + "' failed");
}

}  // namespace vattn
