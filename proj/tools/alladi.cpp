// Command-line front end: sieve caches, Ramanujan sum tables, series
// verification reports and the difference-term identity check.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage, 3 oracle mismatch,
// 4 tolerance breach, 5 identity breach.

#include "alladi/exact.hpp"
#include "alladi/numeric_text.hpp"
#include "alladi/report.hpp"
#include "alladi/series.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace alladi;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kOracleMismatch = 3,
    kToleranceBreach = 4,
    kIdentityBreach = 5,
};

constexpr const char* kCacheEnv = "ALLADI_CACHE_DIR";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

unsigned parse_workers(const std::string& text) {
    if (text == "auto")
        return resolve_workers(kAutoWorkers);
    auto w = parse_count(text);
    if (w < 1 || w > 4096)
        throw UsageError("--workers must be 'auto' or in [1, 4096]");
    return static_cast<unsigned>(w);
}

std::uint64_t parse_limit(const std::string& text) {
    auto v = parse_count(text);
    if (v < 2)
        throw UsageError("--limit must be >= 2, got " + text);
    return v;
}

std::optional<std::filesystem::path> cache_path(const std::string& flag, std::uint64_t limit) {
    if (!flag.empty())
        return std::filesystem::path(flag);
    if (const char* dir = std::getenv(kCacheEnv); dir && *dir)
        return std::filesystem::path(dir) / ("spf-" + std::to_string(limit) + ".bin");
    return std::nullopt;
}

/// Loads the cache when present, otherwise sieves (and stores the result
/// when a cache location is configured).
SpfTable obtain_table(std::uint64_t limit, unsigned workers, const std::string& cache_flag) {
    auto path = cache_path(cache_flag, limit);
    if (path && std::filesystem::exists(*path))
        return load_spf_cache(*path, limit);
    auto t = build_spf_table(limit, {.workers = workers});
    if (path)
        save_spf_cache(t, *path);
    return t;
}

struct SieveArgs {
    std::string limit;
    std::string out;
    std::string workers = "1";
};

int cmd_sieve(const SieveArgs& a) {
    const auto limit = parse_limit(a.limit);
    auto path = cache_path(a.out, limit);
    if (!path)
        throw UsageError(std::string("sieve needs --out or ") + kCacheEnv);
    const auto start = std::chrono::steady_clock::now();
    auto t = build_spf_table(limit, {.workers = parse_workers(a.workers)});
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    save_spf_cache(t, *path);
    std::cout << "limit=" << limit << " build_seconds=" << elapsed.count() << " out=" << path->string() << '\n';
    return kOk;
}

struct CsumArgs {
    std::string n;
    std::string m = "1";
    std::string g;
    std::uint32_t s = 1;
    std::string g_table;
    bool check_oracle = false;
};

WeightFunctionSpec parse_generalized(const CsumArgs& a) {
    if (a.g == "identity")
        return WeightFunctionSpec::identity(a.s);
    if (a.g == "power")
        return WeightFunctionSpec::power(a.s);
    if (a.g == "unit")
        return WeightFunctionSpec::unit(a.s);
    if (a.g == "table") {
        std::map<std::uint64_t, std::int64_t> values;
        for (auto item : detail::split(a.g_table, ',')) {
            auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw UsageError("--g-table expects D=V pairs");
            values[parse_count(item.substr(0, eq))] = detail::parse_int<std::int64_t>(item.substr(eq + 1));
        }
        return WeightFunctionSpec::table(std::move(values), a.s);
    }
    throw UsageError("--g must be identity, power, unit or table");
}

int cmd_csum(const CsumArgs& a) {
    auto [n_lo, n_hi] = parse_range(a.n);
    auto [m_lo, m_hi] = parse_range(a.m);
    if (n_lo < 1 || m_lo < 1)
        throw UsageError("n and m must be >= 1");
    std::optional<WeightFunctionSpec> g;
    if (!a.g.empty())
        g = parse_generalized(a);
    const bool classical = !g || (g->kind == WeightFunctionSpec::Kind::identity && g->s == 1);
    if (a.check_oracle && !classical)
        throw UsageError("--check-oracle applies to classical sums only");
    auto t = build_spf_table(std::max<std::uint64_t>(n_hi, 2));
    std::cout << "n,m,c\n";
    for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
        for (std::uint64_t m = m_lo; m <= m_hi; ++m) {
            const std::int64_t c = g ? generalized_ramanujan_sum(t, n, m, *g) : ramanujan_sum(t, n, m);
            if (a.check_oracle && n <= kDirectCap) {
                const std::int64_t direct = ramanujan_sum_direct(n, m);
                if (direct != c) {
                    std::cout.flush();
                    std::cerr << "oracle mismatch at n=" << n << " m=" << m << ": divisor sum " << c
                              << ", exponential sum " << direct << '\n';
                    return kOracleMismatch;
                }
            }
            std::cout << n << ',' << m << ',' << c << '\n';
        }
    }
    return kOk;
}

struct VerifyArgs {
    std::string kind;
    std::uint64_t m = 1;
    std::uint64_t k = 1;
    std::int64_t l = 1;
    std::uint64_t y = 1;
    std::string weight;
    std::optional<double> target;
    std::string limit;
    std::string checkpoints;
    std::string geometric;
    std::string out;
    std::string workers = "1";
    std::string cache;
    std::optional<double> assert_tol;
};

std::vector<std::uint64_t> resolve_checkpoints(const VerifyArgs& a, std::optional<std::uint64_t> limit) {
    if (!a.checkpoints.empty() && !a.geometric.empty())
        throw UsageError("--checkpoints and --geometric are mutually exclusive");
    if (!a.checkpoints.empty()) {
        std::vector<std::uint64_t> out;
        for (auto item : detail::split(a.checkpoints, ','))
            out.push_back(parse_count(item));
        return out;
    }
    if (!a.geometric.empty()) {
        auto parts = detail::split(a.geometric, ',');
        if (parts.size() != 3)
            throw UsageError("--geometric expects START,FACTOR,COUNT");
        return geometric_checkpoints(parse_count(parts[0]), parse_count(parts[1]), parse_count(parts[2]));
    }
    return decade_checkpoints(limit.value_or(1000000));
}

int cmd_verify(const VerifyArgs& a) {
    auto kind = parse_series_kind(a.kind);
    if (!kind)
        throw UsageError("unknown series kind '" + a.kind + "'");
    std::optional<std::uint64_t> limit;
    if (!a.limit.empty())
        limit = parse_limit(a.limit);
    SeriesSpec spec;
    spec.kind = *kind;
    spec.m = a.m;
    spec.k = a.k;
    spec.l = a.l;
    spec.y = a.y;
    spec.target = a.target;
    spec.checkpoints = resolve_checkpoints(a, limit);
    if (spec.checkpoints.empty())
        throw UsageError("no checkpoints");
    if (!limit)
        limit = std::max<std::uint64_t>(spec.checkpoints.back(), 2);
    if (!a.weight.empty())
        spec.weight = parse_prime_weight(a.weight);
    else if (*kind == SeriesKind::weighted_lhs || *kind == SeriesKind::lpf_density ||
             *kind == SeriesKind::difference_term)
        spec.weight = PrimeWeight::residue(a.k, a.l);
    // Validate (k, l) before paying for the sieve.
    if (*kind == SeriesKind::alladi || *kind == SeriesKind::ramanujan_alladi || *kind == SeriesKind::mu_mn)
        (void)PrimeWeight::residue(a.k, a.l);
    if (a.assert_tol && *a.assert_tol < 0)
        throw UsageError("--assert-tol must be >= 0");

    const unsigned workers = parse_workers(a.workers);
    auto t = obtain_table(*limit, workers, a.cache);
    auto series = run_series(t, spec, {.workers = workers});
    auto report = build_report(series);
    if (a.out.empty())
        emit_csv(report, std::cout);
    else
        emit_csv(report, std::filesystem::path(a.out));

    if (a.assert_tol) {
        const auto& last = report.rows.back();
        if (!last.abs_error)
            throw UsageError("--assert-tol needs a target for series kind " + a.kind);
        if (*last.abs_error > *a.assert_tol) {
            std::cerr << "tolerance breach: |error| = " << detail::format_double(*last.abs_error) << " at x=" << last.x
                      << " exceeds " << detail::format_double(*a.assert_tol) << '\n';
            return kToleranceBreach;
        }
    }
    return kOk;
}

struct IdentityArgs {
    std::uint64_t m = 1;
    std::string weight = "one";
    std::string x;
    bool exact = false;
    std::string workers = "1";
    std::string cache;
};

int cmd_identity(const IdentityArgs& a) {
    const auto x = parse_count(a.x);
    if (x < 1)
        throw UsageError("--x must be >= 1");
    if (a.m < 1)
        throw UsageError("--m must be >= 1");
    auto f = parse_prime_weight(a.weight);
    const unsigned workers = parse_workers(a.workers);
    auto t = obtain_table(std::max<std::uint64_t>({x, a.m, 2}), workers, a.cache);

    std::cout << "m=" << a.m << " weight=" << f.describe() << " x=" << x << '\n';
    if (a.exact) {
        auto d = difference_term_exact(t, a.m, f, x);
        mpq_class diff = d.lhs - d.rhs;
        mpq_class diff_split = d.lhs - d.split_rhs;
        std::cout << "lhs=" << detail::format_double(d.lhs.get_d()) << '\n'
                  << "rhs=" << detail::format_double(d.rhs.get_d()) << '\n'
                  << "split_rhs=" << detail::format_double(d.split_rhs.get_d()) << '\n'
                  << "difference=" << diff.get_str() << '\n'
                  << "split_difference=" << diff_split.get_str() << '\n';
        if (diff != 0 || diff_split != 0) {
            std::cerr << "identity breach in exact mode\n";
            return kIdentityBreach;
        }
        return kOk;
    }
    auto d = difference_term(t, a.m, f, x, {.workers = workers});
    const double diff = d.lhs - d.rhs;
    const double diff_split = d.lhs - d.split_rhs;
    std::cout << "lhs=" << detail::format_double(d.lhs) << '\n'
              << "rhs=" << detail::format_double(d.rhs) << '\n'
              << "split_rhs=" << detail::format_double(d.split_rhs) << '\n'
              << "difference=" << detail::format_double(diff) << '\n'
              << "split_difference=" << detail::format_double(diff_split) << '\n';
    if (std::abs(diff) > 1e-9 || std::abs(diff_split) > 1e-9) {
        std::cerr << "identity breach: |lhs - rhs| exceeds 1e-9\n";
        return kIdentityBreach;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ramanujan-sum analogues of Alladi's formula: sieves, sums and convergence reports"};
    app.require_subcommand(1);

    SieveArgs sieve;
    auto* sieve_cmd = app.add_subcommand("sieve", "build a smallest-prime-factor table and write its cache file");
    sieve_cmd->add_option("--limit", sieve.limit, "inclusive upper bound (1e7, 10^7, 10_000_000)")->required();
    sieve_cmd->add_option("--out", sieve.out, std::string("cache file (default: $") + kCacheEnv + "/spf-LIMIT.bin)");
    sieve_cmd->add_option("--workers", sieve.workers, "thread count or 'auto'");

    CsumArgs csum;
    auto* csum_cmd = app.add_subcommand("csum", "print c_n(m) as CSV n,m,c");
    csum_cmd->add_option("--n", csum.n, "n or A..B")->required();
    csum_cmd->add_option("--m", csum.m, "m or A..B");
    csum_cmd->add_option("--g", csum.g, "generalized weight: identity, power, unit, table");
    csum_cmd->add_option("--s", csum.s, "exponent s in d^s | m");
    csum_cmd->add_option("--g-table", csum.g_table, "table weight values, e.g. 1=1,2=4");
    csum_cmd->add_flag("--check-oracle", csum.check_oracle, "compare against the exponential-sum definition");

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "run a series and emit its convergence report as CSV");
    verify_cmd->add_option("kind", verify.kind, "series kind")->required();
    verify_cmd->add_option("--m", verify.m);
    verify_cmd->add_option("--k", verify.k, "modulus");
    verify_cmd->add_option("--l", verify.l, "residue class, coprime to k");
    verify_cmd->add_option("--y", verify.y, "smallest-prime-factor threshold");
    verify_cmd->add_option("--weight", verify.weight, "one | residue:K:L | table:P=V,... [;inf=V]");
    verify_cmd->add_option("--target", verify.target, "override the target value");
    verify_cmd->add_option("--limit", verify.limit, "sieve limit");
    verify_cmd->add_option("--checkpoints", verify.checkpoints, "comma-separated ascending x values");
    verify_cmd->add_option("--geometric", verify.geometric, "START,FACTOR,COUNT");
    verify_cmd->add_option("--out", verify.out, "CSV destination (default stdout)");
    verify_cmd->add_option("--workers", verify.workers, "thread count or 'auto'");
    verify_cmd->add_option("--cache", verify.cache, "spf cache file");
    verify_cmd->add_option("--assert-tol", verify.assert_tol, "fail when the final |error| exceeds this");

    IdentityArgs identity;
    auto* identity_cmd = app.add_subcommand("identity", "check the finite-x rearrangement of the difference term");
    identity_cmd->add_option("--m", identity.m)->required();
    identity_cmd->add_option("--weight", identity.weight, "one | residue:K:L | table:P=V,... [;inf=V]");
    identity_cmd->add_option("--x", identity.x)->required();
    identity_cmd->add_flag("--exact", identity.exact, "rational arithmetic");
    identity_cmd->add_option("--workers", identity.workers, "thread count or 'auto'");
    identity_cmd->add_option("--cache", identity.cache, "spf cache file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*sieve_cmd)
            return cmd_sieve(sieve);
        if (*csum_cmd)
            return cmd_csum(csum);
        if (*verify_cmd)
            return cmd_verify(verify);
        if (*identity_cmd)
            return cmd_identity(identity);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
