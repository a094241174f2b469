#include "alladi/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

using namespace alladi;

namespace {

PartialSumSeries synthetic(std::vector<std::pair<std::uint64_t, double>> rows, std::optional<double> target) {
    PartialSumSeries s;
    s.spec.kind = SeriesKind::alladi;
    s.spec.k = 4;
    s.spec.target = target;
    for (auto [x, v] : rows) {
        s.spec.checkpoints.push_back(x);
        s.rows.push_back({x, v, target ? std::optional(std::abs(v - *target)) : std::nullopt, std::nullopt});
    }
    return s;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST(Report, SingleRowHasNoFit) {
    auto r = build_report(synthetic({{10000, 0.4}}, 0.5));
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_FALSE(r.fitted_c);
    EXPECT_FALSE(r.rows[0].decay_ratio);
    EXPECT_NE(r.fit_note.find("skipped"), std::string::npos);
}

TEST(Report, DecayRatios) {
    auto r = build_report(synthetic({{10000, 0.6}, {100000, 0.55}, {1000000, 0.525}}, 0.5));
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_FALSE(r.rows[0].decay_ratio);
    EXPECT_NEAR(*r.rows[1].decay_ratio, 0.5, 1e-12);
    EXPECT_NEAR(*r.rows[2].decay_ratio, 0.5, 1e-12);
}

TEST(Report, FitRecoversSyntheticConstant) {
    const double c = 1.7, a = 3.0;
    std::vector<std::pair<std::uint64_t, double>> rows;
    for (std::uint64_t x : {10000ull, 100000ull, 1000000ull, 10000000ull})
        rows.push_back({x, 0.25 + a * std::exp(-c * std::cbrt(std::log(static_cast<double>(x))))});
    auto r = build_report(synthetic(rows, 0.25));
    ASSERT_TRUE(r.fitted_c);
    EXPECT_NEAR(*r.fitted_c, c, 1e-6);
    EXPECT_NEAR(*r.fit_residual, 0.0, 1e-6);
    EXPECT_EQ(r.fit_note, "ok");
}

TEST(Report, TinyErrorsExcludedFromFit) {
    auto r = build_report(synthetic({{10, 0.5}, {100, 0.5}, {1000, 0.4}, {10000, 0.45}}, 0.5));
    EXPECT_FALSE(r.fitted_c);
    EXPECT_NE(r.fit_note.find("fewer than 3"), std::string::npos);
}

TEST(Report, NoTarget) {
    auto r = build_report(synthetic({{10, 0.1}, {100, 0.2}, {1000, 0.3}}, std::nullopt));
    EXPECT_FALSE(r.rows[0].abs_error);
    EXPECT_FALSE(r.fitted_c);
    auto csv = to_csv(r);
    EXPECT_NE(csv.find("\n10,0.10000000000000001,,,\n"), std::string::npos) << csv;
}

TEST(Report, EmptySeriesRejected) { EXPECT_THROW(build_report(PartialSumSeries{}), std::invalid_argument); }

TEST(ReportCsv, Layout) {
    auto r = build_report(synthetic({{10000, 0.6}, {100000, 0.55}, {1000000, 0.525}, {10000000, 0.51}}, 0.5));
    auto csv = to_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,value,target,abs_error,decay_ratio");
    int data = 0, comments = 0;
    while (std::getline(in, line))
        (line.starts_with("#") ? comments : data)++;
    EXPECT_EQ(data, 4);
    EXPECT_GE(comments, 2);
    EXPECT_NE(csv.find("# spec: kind=alladi"), std::string::npos);
    EXPECT_NE(csv.find("# fitted_c: "), std::string::npos);
}

TEST(ReportCsv, RoundTripIsBitExact) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<std::uint64_t, double>> rows;
        std::uint64_t x = 1;
        for (int i = 0; i < 6; ++i) {
            x = x * 7 + rng() % 100;
            rows.push_back({x, dist(rng)});
        }
        auto r = build_report(synthetic(rows, dist(rng)));
        std::istringstream in(to_csv(r));
        auto parsed = parse_report_csv(in);
        ASSERT_EQ(parsed.rows.size(), r.rows.size());
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            const auto& a = r.rows[i];
            const auto& b = parsed.rows[i];
            ASSERT_EQ(a.x, b.x);
            ASSERT_TRUE(bit_equal(a.value, b.value));
            ASSERT_TRUE(bit_equal(*a.target, *b.target));
            ASSERT_TRUE(bit_equal(*a.abs_error, *b.abs_error));
            ASSERT_EQ(a.decay_ratio.has_value(), b.decay_ratio.has_value());
            if (a.decay_ratio) {
                ASSERT_TRUE(bit_equal(*a.decay_ratio, *b.decay_ratio));
            }
        }
        if (r.fitted_c) {
            ASSERT_TRUE(bit_equal(*r.fitted_c, detail::parse_real(parsed.metadata.at("fitted_c"))));
        }
    }
}

TEST(ReportCsv, DeterministicBytes) {
    auto s = synthetic({{10, 0.3}, {100, 0.2}, {1000, 0.1}}, 0.0);
    EXPECT_EQ(to_csv(build_report(s)), to_csv(build_report(s)));
}

TEST(ReportCsv, UnwritablePathNamesDestination) {
    auto r = build_report(synthetic({{10, 0.3}}, 0.0));
    try {
        emit_csv(r, std::filesystem::path("/nonexistent-dir/report.csv"));
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/report.csv"), std::string::npos);
    }
}
