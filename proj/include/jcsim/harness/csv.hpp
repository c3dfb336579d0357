#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "jcsim/error.hpp"
#include "jcsim/harness/config.hpp"

namespace jcsim::harness {

/// Time grid with one column per requested measure, in config order.
struct CorrelationSeries {
    std::vector<double> tau;
    std::vector<Measure> measures;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(Measure m) const {
        for (std::size_t i = 0; i < measures.size(); ++i)
            if (measures[i] == m) return columns[i];
        throw ConfigInvalid("series has no column '" + std::string(to_string(m)) + "'");
    }

    void validate() const {
        if (columns.size() != measures.size()) throw ConfigInvalid("series: one column per measure required");
        for (const auto& c : columns)
            if (c.size() != tau.size()) throw ConfigInvalid("series: column length differs from tau");
        for (std::size_t i = 1; i < tau.size(); ++i)
            if (!(tau[i] > tau[i - 1])) throw ConfigInvalid("series: tau must be strictly ascending");
    }
};

/// Fixed 9 decimals; negative zero prints as zero.
inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

/// Header `tau,<measure>,...`, one LF-terminated row per sample.
inline void write_csv(std::ostream& out, const CorrelationSeries& series) {
    series.validate();
    out << "tau";
    for (auto m : series.measures) out << ',' << to_string(m);
    out << '\n';
    for (std::size_t i = 0; i < series.tau.size(); ++i) {
        out << format_value(series.tau[i]);
        for (const auto& c : series.columns) out << ',' << format_value(c[i]);
        out << '\n';
    }
}

inline void emit_csv(const CorrelationSeries& series, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_csv(out, series);
    finish_output(out, path);
}

/// Long format for a sweep: `<axis>,tau,<measure>,...`, points in sweep order.
inline void emit_long_csv(const std::string& axis, const std::vector<std::pair<std::string, CorrelationSeries>>& points,
                          const std::filesystem::path& path) {
    auto out = open_output(path);
    if (!points.empty()) {
        out << axis << ",tau";
        for (auto m : points.front().second.measures) out << ',' << to_string(m);
        out << '\n';
        for (const auto& [value, series] : points) {
            series.validate();
            for (std::size_t i = 0; i < series.tau.size(); ++i) {
                out << value << ',' << format_value(series.tau[i]);
                for (const auto& c : series.columns) out << ',' << format_value(c[i]);
                out << '\n';
            }
        }
    }
    finish_output(out, path);
}

using Manifest = std::vector<std::pair<std::string, std::string>>;

inline void emit_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& [k, v] : manifest) out << k << " = " << v << '\n';
    finish_output(out, path);
}

} // namespace jcsim::harness
