#pragma once

// Convergence reports over a PartialSumSeries: per-checkpoint errors,
// decade-over-decade decay ratios, and a least-squares fit of
// log|error| against (log x)^(1/3). CSV output uses 17 significant digits
// so every double survives a text round trip.

#include "alladi/series.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace alladi {

/// Errors below this are treated as exact zeros and left out of the fit.
inline constexpr double kFitErrorFloor = 1e-14;

struct ReportRow {
    std::uint64_t x;
    double value;
    std::optional<double> target;
    std::optional<double> abs_error;
    std::optional<double> decay_ratio; // abs_error / previous abs_error
};

struct ConvergenceReport {
    SeriesSpec spec;
    std::vector<ReportRow> rows;
    /// c in |error| ~ A exp(-c (log x)^(1/3)); present only when at least
    /// three rows have error >= kFitErrorFloor.
    std::optional<double> fitted_c;
    /// Root-mean-square residual of the fit in log space.
    std::optional<double> fit_residual;
    std::string fit_note;
};

inline ConvergenceReport build_report(const PartialSumSeries& series) {
    if (series.rows.empty())
        throw std::invalid_argument("cannot build a report from an empty series");
    ConvergenceReport r{series.spec, {}, std::nullopt, std::nullopt, {}};
    std::vector<double> zs, ys;
    for (const auto& row : series.rows) {
        ReportRow out{row.x, row.value, series.spec.target, std::nullopt, std::nullopt};
        if (series.spec.target) {
            out.abs_error = std::abs(row.value - *series.spec.target);
            if (!r.rows.empty() && r.rows.back().abs_error && *r.rows.back().abs_error > 0.0)
                out.decay_ratio = *out.abs_error / *r.rows.back().abs_error;
            if (*out.abs_error >= kFitErrorFloor) {
                zs.push_back(std::cbrt(std::log(static_cast<double>(row.x))));
                ys.push_back(std::log(*out.abs_error));
            }
        }
        r.rows.push_back(out);
    }
    if (!series.spec.target) {
        r.fit_note = "skipped: no target";
        return r;
    }
    if (zs.size() < 3) {
        r.fit_note = "skipped: fewer than 3 rows with error >= 1e-14";
        return r;
    }
    const double n = static_cast<double>(zs.size());
    double mz = 0, my = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        mz += zs[i];
        my += ys[i];
    }
    mz /= n;
    my /= n;
    double szz = 0, szy = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        szz += (zs[i] - mz) * (zs[i] - mz);
        szy += (zs[i] - mz) * (ys[i] - my);
    }
    if (szz == 0.0) {
        r.fit_note = "skipped: degenerate regressor";
        return r;
    }
    const double slope = szy / szz;
    const double intercept = my - slope * mz;
    double ss = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double e = ys[i] - (intercept + slope * zs[i]);
        ss += e * e;
    }
    r.fitted_c = -slope;
    r.fit_residual = std::sqrt(ss / n);
    r.fit_note = "ok";
    return r;
}

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string join_checkpoints(const std::vector<std::uint64_t>& cps) {
    std::string s;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (i)
            s += ',';
        s += std::to_string(cps[i]);
    }
    return s;
}

} // namespace detail

inline constexpr const char* kReportHeader = "x,value,target,abs_error,decay_ratio";

/// Header, one row per checkpoint, then '#' metadata lines.
inline void emit_csv(const ConvergenceReport& r, std::ostream& out) {
    out << kReportHeader << '\n';
    for (const auto& row : r.rows) {
        out << row.x << ',' << detail::format_double(row.value) << ',' << detail::cell(row.target) << ','
            << detail::cell(row.abs_error) << ',' << detail::cell(row.decay_ratio) << '\n';
    }
    out << "# spec: " << r.spec.describe() << '\n';
    out << "# checkpoints: " << detail::join_checkpoints(r.spec.checkpoints) << '\n';
    out << "# target: " << (r.spec.target ? detail::format_double(*r.spec.target) : "none") << '\n';
    out << "# fitted_c: " << (r.fitted_c ? detail::format_double(*r.fitted_c) : "none") << '\n';
    out << "# fit_residual: " << (r.fit_residual ? detail::format_double(*r.fit_residual) : "none") << '\n';
    out << "# fit: " << r.fit_note << '\n';
}

inline void emit_csv(const ConvergenceReport& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    emit_csv(r, out);
    out.flush();
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

inline std::string to_csv(const ConvergenceReport& r) {
    std::ostringstream os;
    emit_csv(r, os);
    return os.str();
}

struct ParsedReport {
    std::vector<ReportRow> rows;
    std::map<std::string, std::string> metadata;
};

/// Reads back what emit_csv wrote.
inline ParsedReport parse_report_csv(std::istream& in) {
    ParsedReport out;
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader)
        throw std::runtime_error("missing report header");
    auto opt_real = [](std::string_view s) -> std::optional<double> {
        if (s.empty())
            return std::nullopt;
        return detail::parse_real(s);
    };
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            auto colon = line.find(':');
            if (colon != std::string::npos && line.size() > 2)
                out.metadata[line.substr(2, colon - 2)] = line.size() > colon + 2 ? line.substr(colon + 2) : "";
            continue;
        }
        auto cells = detail::split(line, ',');
        if (cells.size() != 5)
            throw std::runtime_error("malformed report row: " + line);
        out.rows.push_back({detail::parse_int<std::uint64_t>(cells[0]), detail::parse_real(cells[1]),
                            opt_real(cells[2]), opt_real(cells[3]), opt_real(cells[4])});
    }
    return out;
}

} // namespace alladi
