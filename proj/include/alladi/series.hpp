#pragma once

// Partial sums of the Moebius/Ramanujan series restricted by the smallest
// prime factor, restricted Mertens sums, largest-prime-factor densities, and
// the exact finite-x rearrangement of the c_n(m) - mu(n) difference series.

#include "alladi/parallel.hpp"
#include "alladi/ramanujan.hpp"
#include "alladi/sieve.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace alladi {

/// Neumaier's variant of Kahan summation.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    /// Folds another partial in, high part first.
    void merge(const CompensatedSum& other) {
        add(other.sum);
        add(other.comp);
    }
    double value() const { return sum + comp; }
};

/// Exact integer accumulator with the same interface, for integer series.
struct IntegerSum {
    std::int64_t sum = 0;

    void add(std::int64_t x) { sum += x; }
    void merge(const IntegerSum& other) { sum += other.sum; }
    double value() const { return static_cast<double>(sum); }
};

struct EvalOptions {
    unsigned workers = 1;
    /// Width of the fixed index grid the sum is chunked on. Results depend
    /// on this (through rounding) but never on the worker count.
    std::uint64_t chunk_size = std::uint64_t{1} << 16;
};

/// Sums term(n) for n = first, first+1, ... and reports the running total at
/// every checkpoint. [first, last checkpoint] is cut at multiples of
/// chunk_size and at every checkpoint; each piece is summed on its own (in
/// parallel when asked) and the pieces are merged in ascending order, so the
/// result is bit-identical for any worker count. Checkpoints below first
/// report the empty sum.
template <typename Acc, typename Term>
std::vector<Acc> checkpoint_sums(std::uint64_t first, std::span<const std::uint64_t> checkpoints, Term&& term,
                                 const EvalOptions& opt = {}) {
    struct Piece {
        std::uint64_t lo, hi;
        std::optional<std::size_t> checkpoint; // index of the checkpoint this piece ends on
    };
    const std::uint64_t chunk = std::max<std::uint64_t>(opt.chunk_size, 1);
    std::vector<Piece> pieces;
    std::uint64_t lo = first;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const std::uint64_t x = checkpoints[i];
        while (lo <= x) {
            const std::uint64_t grid_end = (lo / chunk + 1) * chunk - 1;
            const std::uint64_t hi = std::min(grid_end, x);
            pieces.push_back({lo, hi, hi == x ? std::optional<std::size_t>(i) : std::nullopt});
            lo = hi + 1;
        }
    }
    std::vector<Acc> partial(pieces.size());
    parallel_for(pieces.size(), opt.workers, [&](std::size_t i) {
        Acc acc;
        for (std::uint64_t n = pieces[i].lo; n <= pieces[i].hi; ++n)
            acc.add(term(n));
        partial[i] = acc;
    });
    std::vector<Acc> out(checkpoints.size());
    Acc running;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        running.merge(partial[i]);
        if (pieces[i].checkpoint)
            out[*pieces[i].checkpoint] = running;
    }
    return out;
}

namespace detail {

inline std::uint64_t totient_trial(std::uint64_t k) {
    std::uint64_t phi = k;
    for (std::uint64_t p = 2; p * p <= k; ++p) {
        if (k % p != 0)
            continue;
        phi = phi / p * (p - 1);
        while (k % p == 0)
            k /= p;
    }
    if (k > 1)
        phi = phi / k * (k - 1);
    return phi;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t normalize_residue(std::uint64_t k, std::int64_t l) {
    if (k < 1)
        throw std::invalid_argument("modulus k must be >= 1");
    const auto sk = static_cast<std::int64_t>(k);
    const auto r = static_cast<std::uint64_t>(((l % sk) + sk) % sk);
    if (std::gcd(r, k) != 1)
        throw std::invalid_argument("residue l=" + std::to_string(l) + " is not coprime to k=" + std::to_string(k));
    return r;
}

} // namespace detail

/// Stand-in for p(1) = inf.
inline constexpr std::uint64_t kPrimeInfinity = std::numeric_limits<std::uint64_t>::max();

/// A bounded weight f on primes. at_infinity is f at the sentinel p(1) = inf.
class PrimeWeight {
  public:
    enum class Kind { residue, constant_one, table };

    /// Indicator of p = l (mod k); requires gcd(l, k) = 1.
    static PrimeWeight residue(std::uint64_t k, std::int64_t l, double at_infinity = 0.0) {
        PrimeWeight w(Kind::residue, at_infinity);
        w.residue_ = detail::normalize_residue(k, l);
        w.modulus_ = k;
        w.bound_ = std::max(1.0, std::abs(at_infinity));
        return w;
    }
    static PrimeWeight constant_one(double at_infinity = 0.0) {
        PrimeWeight w(Kind::constant_one, at_infinity);
        w.bound_ = std::max(1.0, std::abs(at_infinity));
        return w;
    }
    /// Explicit values; primes absent from the table weigh 0.
    static PrimeWeight table(std::map<std::uint64_t, double> values, double at_infinity = 0.0) {
        PrimeWeight w(Kind::table, at_infinity);
        w.bound_ = std::abs(at_infinity);
        for (auto [p, v] : values) {
            if (!std::isfinite(v))
                throw std::invalid_argument("weight value for p=" + std::to_string(p) + " is not finite");
            w.bound_ = std::max(w.bound_, std::abs(v));
        }
        w.values_ = std::move(values);
        return w;
    }

    Kind kind() const { return kind_; }
    std::uint64_t modulus() const { return modulus_; }
    std::uint64_t residue_class() const { return residue_; }
    double at_infinity() const { return at_infinity_; }
    /// B with |f(p)| <= B for every p, including the sentinel.
    double bound() const { return bound_; }
    const std::map<std::uint64_t, double>& values() const { return values_; }

    double operator()(std::uint64_t p) const {
        if (p == kPrimeInfinity)
            return at_infinity_;
        switch (kind_) {
        case Kind::residue:
            return p % modulus_ == residue_ ? 1.0 : 0.0;
        case Kind::constant_one:
            return 1.0;
        case Kind::table:
            break;
        }
        auto it = values_.find(p);
        return it == values_.end() ? 0.0 : it->second;
    }

    /// Density of primes carrying weight 1 when the weight is a residue
    /// indicator (1/phi(k)) or constant (1); none for tables.
    std::optional<double> natural_density() const {
        switch (kind_) {
        case Kind::residue:
            return 1.0 / static_cast<double>(detail::totient_trial(modulus_));
        case Kind::constant_one:
            return 1.0;
        case Kind::table:
            break;
        }
        return std::nullopt;
    }

    /// Text form accepted by parse_prime_weight.
    std::string describe() const {
        std::string s;
        switch (kind_) {
        case Kind::residue:
            s = "residue:" + std::to_string(modulus_) + ":" + std::to_string(residue_);
            break;
        case Kind::constant_one:
            s = "one";
            break;
        case Kind::table:
            s = "table:";
            for (auto it = values_.begin(); it != values_.end(); ++it) {
                if (it != values_.begin())
                    s += ',';
                s += std::to_string(it->first) + "=" + detail::format_double(it->second);
            }
            break;
        }
        if (at_infinity_ != 0.0)
            s += ";inf=" + detail::format_double(at_infinity_);
        return s;
    }

  private:
    PrimeWeight(Kind k, double at_infinity) : kind_(k), at_infinity_(at_infinity) {
        if (!std::isfinite(at_infinity))
            throw std::invalid_argument("value at infinity must be finite");
    }

    Kind kind_;
    std::uint64_t modulus_ = 1;
    std::uint64_t residue_ = 0;
    double at_infinity_ = 0.0;
    double bound_ = 0.0;
    std::map<std::uint64_t, double> values_;
};

namespace detail {

inline double parse_real(std::string_view s) {
    std::string str(s);
    char* end = nullptr;
    double v = std::strtod(str.c_str(), &end);
    if (str.empty() || end != str.c_str() + str.size())
        throw std::invalid_argument("not a number: '" + str + "'");
    return v;
}

template <typename Int>
Int parse_int(std::string_view s) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

} // namespace detail

/// Parses "one", "residue:K:L" or "table:P=V,P=V", each optionally followed
/// by ";inf=V".
inline PrimeWeight parse_prime_weight(std::string_view text) {
    double at_infinity = 0.0;
    if (auto semi = text.find(';'); semi != std::string_view::npos) {
        auto tail = text.substr(semi + 1);
        if (tail.substr(0, 4) != "inf=")
            throw std::invalid_argument("expected ';inf=VALUE' in weight '" + std::string(text) + "'");
        at_infinity = detail::parse_real(tail.substr(4));
        text = text.substr(0, semi);
    }
    if (text == "one")
        return PrimeWeight::constant_one(at_infinity);
    if (text.starts_with("residue:")) {
        auto parts = detail::split(text.substr(8), ':');
        if (parts.size() != 2)
            throw std::invalid_argument("expected residue:K:L");
        return PrimeWeight::residue(detail::parse_int<std::uint64_t>(parts[0]),
                                    detail::parse_int<std::int64_t>(parts[1]), at_infinity);
    }
    if (text.starts_with("table:")) {
        std::map<std::uint64_t, double> values;
        auto body = text.substr(6);
        if (!body.empty()) {
            for (auto item : detail::split(body, ',')) {
                auto eq = item.find('=');
                if (eq == std::string_view::npos)
                    throw std::invalid_argument("expected P=V in weight table, got '" + std::string(item) + "'");
                values[detail::parse_int<std::uint64_t>(item.substr(0, eq))] = detail::parse_real(item.substr(eq + 1));
            }
        }
        return PrimeWeight::table(std::move(values), at_infinity);
    }
    throw std::invalid_argument("unknown weight '" + std::string(text) + "'");
}

enum class SeriesKind {
    mu_baseline,
    alladi,
    ramanujan_alladi,
    mu_mn,
    mertens_restricted,
    mu_over_n_restricted,
    weighted_lhs,
    lpf_density,
    difference_term,
};

inline constexpr std::pair<SeriesKind, std::string_view> kSeriesKindNames[] = {
    {SeriesKind::mu_baseline, "mu-baseline"},
    {SeriesKind::alladi, "alladi"},
    {SeriesKind::ramanujan_alladi, "ramanujan-alladi"},
    {SeriesKind::mu_mn, "mu-mn"},
    {SeriesKind::mertens_restricted, "mertens-restricted"},
    {SeriesKind::mu_over_n_restricted, "mu-over-n-restricted"},
    {SeriesKind::weighted_lhs, "weighted-lhs"},
    {SeriesKind::lpf_density, "lpf-density"},
    {SeriesKind::difference_term, "difference-term"},
};

inline std::string_view to_string(SeriesKind k) {
    for (auto [kind, name] : kSeriesKindNames)
        if (kind == k)
            return name;
    return "unknown";
}

inline std::optional<SeriesKind> parse_series_kind(std::string_view name) {
    for (auto [kind, n] : kSeriesKindNames)
        if (n == name)
            return kind;
    return std::nullopt;
}

/// Parameters of one partial-sum experiment. Fields a kind does not use are
/// ignored. target is filled in by the evaluators where the kind implies one.
struct SeriesSpec {
    SeriesKind kind = SeriesKind::mu_baseline;
    std::uint64_t m = 1;
    std::uint64_t k = 1;
    std::int64_t l = 1;
    std::uint64_t y = 1;
    std::optional<PrimeWeight> weight;
    std::vector<std::uint64_t> checkpoints;
    std::optional<double> target;

    std::string describe() const {
        std::ostringstream os;
        os << "kind=" << to_string(kind) << " m=" << m << " k=" << k << " l=" << l << " y=" << y;
        if (weight)
            os << " weight=" << weight->describe();
        return os.str();
    }
};

struct SeriesRow {
    std::uint64_t x;
    double value;
    std::optional<double> error;
    /// Unnormalized sum behind a density row (lpf-density only).
    std::optional<double> count;
};

struct PartialSumSeries {
    SeriesSpec spec;
    std::vector<SeriesRow> rows;
};

/// 10^4, 10^5, ... up to limit, plus limit itself when it is not a power of
/// ten. Limits below 10^4 give the single checkpoint {limit}.
inline std::vector<std::uint64_t> decade_checkpoints(std::uint64_t limit, std::uint64_t start = 10000) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t x = start; x <= limit; x *= 10) {
        out.push_back(x);
        if (x > std::numeric_limits<std::uint64_t>::max() / 10)
            break;
    }
    if (out.empty() || out.back() != limit)
        out.push_back(limit);
    return out;
}

/// start, start*factor, ... (count terms).
inline std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t start, std::uint64_t factor, std::size_t count) {
    if (start < 1 || factor < 2)
        throw std::invalid_argument("geometric checkpoints need start >= 1 and factor >= 2");
    std::vector<std::uint64_t> out;
    std::uint64_t x = start;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(x);
        if (i + 1 < count && __builtin_mul_overflow(x, factor, &x))
            throw std::invalid_argument("geometric checkpoints overflow");
    }
    return out;
}

namespace detail {

inline void check_checkpoints(const SpfTable& t, std::span<const std::uint64_t> cps) {
    if (cps.empty())
        throw std::invalid_argument("at least one checkpoint is required");
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] < 1)
            throw std::invalid_argument("checkpoints must be >= 1");
        if (i > 0 && cps[i] <= cps[i - 1])
            throw std::invalid_argument("checkpoints must be strictly ascending");
    }
    if (cps.back() > t.limit())
        throw std::invalid_argument("checkpoint " + std::to_string(cps.back()) + " exceeds sieve limit " +
                                    std::to_string(t.limit()));
}

inline int mu_of_parameter(const SpfTable& t, std::uint64_t m) {
    if (m < 1 || m > t.limit())
        throw std::invalid_argument("m=" + std::to_string(m) + " must lie in [1, sieve limit]");
    return t.mu(m);
}

template <typename Acc>
PartialSumSeries to_series(SeriesSpec spec, const std::vector<Acc>& sums) {
    PartialSumSeries out{std::move(spec), {}};
    for (std::size_t i = 0; i < sums.size(); ++i) {
        SeriesRow row{out.spec.checkpoints[i], sums[i].value(), std::nullopt, std::nullopt};
        if (out.spec.target)
            row.error = std::abs(row.value - *out.spec.target);
        out.rows.push_back(row);
    }
    return out;
}

// -sum_{2 <= n <= x} coef(n) f(p(n)) / n. Every smallest-prime-restricted
// series goes through this one expression so that specializations agree
// bit for bit.
template <typename Coef>
std::vector<CompensatedSum> signed_weighted_sums(const SpfTable& t, const PrimeWeight& f, Coef&& coef,
                                                 std::span<const std::uint64_t> cps, const EvalOptions& opt) {
    return checkpoint_sums<CompensatedSum>(
        2, cps,
        [&](std::uint64_t n) {
            const double w = f(t.spf(n));
            if (w == 0.0)
                return 0.0;
            const std::int64_t c = coef(n);
            if (c == 0)
                return 0.0;
            return -(static_cast<double>(c) * w) / static_cast<double>(n);
        },
        opt);
}

} // namespace detail

/// -sum_{2 <= n <= x, f} c_n(m) f(p(n)) / n; target taken from spec.target.
inline PartialSumSeries weighted_lhs(const SpfTable& t, std::uint64_t m, const PrimeWeight& f,
                                     std::vector<std::uint64_t> checkpoints, std::optional<double> target = std::nullopt,
                                     const EvalOptions& opt = {}) {
    detail::check_checkpoints(t, checkpoints);
    RamanujanEvaluator c(t, m);
    SeriesSpec spec{SeriesKind::weighted_lhs, m, 1, 1, 1, f, std::move(checkpoints), target};
    auto sums = detail::signed_weighted_sums(t, f, c, spec.checkpoints, opt);
    return detail::to_series(std::move(spec), sums);
}

/// -sum_{2 <= n <= x} mu(n) / n, target 1.
inline PartialSumSeries mu_baseline(const SpfTable& t, std::vector<std::uint64_t> checkpoints,
                                    const EvalOptions& opt = {}) {
    auto s = weighted_lhs(t, 1, PrimeWeight::constant_one(), std::move(checkpoints), 1.0, opt);
    s.spec.kind = SeriesKind::mu_baseline;
    s.spec.weight.reset();
    return s;
}

/// -sum_{2 <= n <= x, p(n) = l mod k} c_n(m) / n, target 1/phi(k).
inline PartialSumSeries ramanujan_alladi_partial_sum(const SpfTable& t, std::uint64_t m, std::uint64_t k,
                                                     std::int64_t l, std::vector<std::uint64_t> checkpoints,
                                                     const EvalOptions& opt = {}) {
    auto f = PrimeWeight::residue(k, l);
    auto s = weighted_lhs(t, m, f, std::move(checkpoints), f.natural_density(), opt);
    s.spec.kind = SeriesKind::ramanujan_alladi;
    s.spec.k = k;
    s.spec.l = l;
    return s;
}

/// -sum_{2 <= n <= x, p(n) = l mod k} mu(n) / n, target 1/phi(k).
inline PartialSumSeries alladi_partial_sum(const SpfTable& t, std::uint64_t k, std::int64_t l,
                                           std::vector<std::uint64_t> checkpoints, const EvalOptions& opt = {}) {
    auto s = ramanujan_alladi_partial_sum(t, 1, k, l, std::move(checkpoints), opt);
    s.spec.kind = SeriesKind::alladi;
    return s;
}

/// -sum_{2 <= n <= x, p(n) = l mod k} mu(mn) / n, target mu(m)/phi(k).
/// mu(mn) is 0 when m and n share a prime and mu(m) mu(n) otherwise, so the
/// table only needs to reach max(m, x).
inline PartialSumSeries mu_mn_partial_sum(const SpfTable& t, std::uint64_t m, std::uint64_t k, std::int64_t l,
                                          std::vector<std::uint64_t> checkpoints, const EvalOptions& opt = {}) {
    detail::check_checkpoints(t, checkpoints);
    const int mu_m = detail::mu_of_parameter(t, m);
    auto f = PrimeWeight::residue(k, l);
    SeriesSpec spec{SeriesKind::mu_mn, m, k, l, 1, f, std::move(checkpoints),
                    mu_m * *f.natural_density()};
    auto coef = [&](std::uint64_t n) -> std::int64_t {
        if (mu_m == 0 || std::gcd(m, n) != 1)
            return 0;
        return mu_m * t.mu(n);
    };
    auto sums = detail::signed_weighted_sums(t, f, coef, spec.checkpoints, opt);
    return detail::to_series(std::move(spec), sums);
}

/// M(x, y) = sum_{1 <= n <= x, p(n) > y} mu(n), with p(1) = inf so n = 1
/// always counts. Exact integers.
inline PartialSumSeries mertens_restricted(const SpfTable& t, std::uint64_t y, std::vector<std::uint64_t> checkpoints,
                                           const EvalOptions& opt = {}) {
    detail::check_checkpoints(t, checkpoints);
    if (y < 1)
        throw std::invalid_argument("threshold y must be >= 1");
    SeriesSpec spec{SeriesKind::mertens_restricted, 1, 1, 1, y, std::nullopt, std::move(checkpoints), std::nullopt};
    auto sums = checkpoint_sums<IntegerSum>(
        1, spec.checkpoints,
        [&](std::uint64_t n) -> std::int64_t { return (n == 1 || t.spf(n) > y) ? t.mu(n) : 0; }, opt);
    return detail::to_series(std::move(spec), sums);
}

/// sum_{1 <= n <= x, p(n) > y} mu(n) / n, target 0.
inline PartialSumSeries mu_over_n_restricted(const SpfTable& t, std::uint64_t y, std::vector<std::uint64_t> checkpoints,
                                             const EvalOptions& opt = {}) {
    detail::check_checkpoints(t, checkpoints);
    if (y < 1)
        throw std::invalid_argument("threshold y must be >= 1");
    SeriesSpec spec{SeriesKind::mu_over_n_restricted, 1, 1, 1, y, std::nullopt, std::move(checkpoints), 0.0};
    auto sums = checkpoint_sums<CompensatedSum>(
        1, spec.checkpoints,
        [&](std::uint64_t n) {
            if (n != 1 && t.spf(n) <= y)
                return 0.0;
            const int mu = t.mu(n);
            return mu == 0 ? 0.0 : static_cast<double>(mu) / static_cast<double>(n);
        },
        opt);
    return detail::to_series(std::move(spec), sums);
}

/// (1/x) sum_{2 <= n <= x} f(P(n)); the row's count holds the unnormalized
/// sum. Residue and constant weights imply their natural density as target.
inline PartialSumSeries lpf_density(const SpfTable& t, const PrimeWeight& f, std::vector<std::uint64_t> checkpoints,
                                    std::optional<double> target = std::nullopt, const EvalOptions& opt = {}) {
    detail::check_checkpoints(t, checkpoints);
    if (!target)
        target = f.natural_density();
    SeriesSpec spec{SeriesKind::lpf_density, 1, f.modulus(), static_cast<std::int64_t>(f.residue_class()), 1, f,
                    std::move(checkpoints), target};
    auto sums = checkpoint_sums<CompensatedSum>(2, spec.checkpoints, [&](std::uint64_t n) { return f(t.lpf(n)); }, opt);
    PartialSumSeries out{std::move(spec), {}};
    for (std::size_t i = 0; i < sums.size(); ++i) {
        const double count = sums[i].value();
        const auto x = out.spec.checkpoints[i];
        SeriesRow row{x, count / static_cast<double>(x), std::nullopt, count};
        if (out.spec.target)
            row.error = std::abs(row.value - *out.spec.target);
        out.rows.push_back(row);
    }
    return out;
}

/// sum_{2 <= n <= x} (c_n(m) - mu(n)) f(p(n)) / n at every checkpoint,
/// target 0: the difference between the Ramanujan and Moebius series.
inline PartialSumSeries difference_series(const SpfTable& t, std::uint64_t m, const PrimeWeight& f,
                                          std::vector<std::uint64_t> checkpoints, const EvalOptions& opt = {}) {
    detail::check_checkpoints(t, checkpoints);
    RamanujanEvaluator c(t, m);
    SeriesSpec spec{SeriesKind::difference_term, m, 1, 1, 1, f, std::move(checkpoints), 0.0};
    auto sums = checkpoint_sums<CompensatedSum>(
        2, spec.checkpoints,
        [&](std::uint64_t n) {
            const std::int64_t diff = c(n) - t.mu(n);
            if (diff == 0)
                return 0.0;
            return static_cast<double>(diff) * f(t.spf(n)) / static_cast<double>(n);
        },
        opt);
    return detail::to_series(std::move(spec), sums);
}

/// Both sides of the finite-x rearrangement
///   sum_{2<=n<=x} (c_n(m)-mu(n)) f(p(n))/n
///     = sum_{d|m, d>1} sum_{1<=n<=x/d} mu(n)/n f(p(dn)),
/// plus the further split of each inner sum by whether p(n) >= p(d):
///   f(p(d)) sum_{n<=x/d, p(n)>=p(d)} mu(n)/n
///     - sum_{p<p(d)} f(p)/p sum_{n<=x/(dp), p(n)>p} mu(n)/n.
/// All three agree exactly for every x; in doubles up to rounding.
struct DifferenceTerm {
    double lhs;
    double rhs;
    double split_rhs;
};

namespace detail {

// p(n) with the sentinel p(1) = inf.
inline std::uint64_t spf_or_infinity(const SpfTable& t, std::uint64_t n) {
    return n == 1 ? kPrimeInfinity : t.spf(n);
}

inline std::vector<std::uint64_t> nontrivial_divisors(const SpfTable& t, std::uint64_t m) {
    if (m < 1 || m > t.limit())
        throw std::invalid_argument("m=" + std::to_string(m) + " must lie in [1, sieve limit]");
    auto ds = divisors(factorize(t, m));
    ds.erase(ds.begin()); // d = 1
    return ds;
}

inline std::vector<std::uint64_t> primes_below(const SpfTable& t, std::uint64_t bound) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p < bound && p <= t.limit(); ++p)
        if (t.spf(p) == p)
            out.push_back(p);
    return out;
}

} // namespace detail

inline DifferenceTerm difference_term(const SpfTable& t, std::uint64_t m, const PrimeWeight& f, std::uint64_t x,
                                      const EvalOptions& opt = {}) {
    if (x < 1 || x > t.limit())
        throw std::invalid_argument("x=" + std::to_string(x) + " outside [1, sieve limit]");
    const auto ds = detail::nontrivial_divisors(t, m);

    auto lhs = difference_series(t, m, f, {x}, opt).rows.front().value;

    CompensatedSum rhs;
    for (std::uint64_t d : ds) {
        if (d > x)
            break;
        const std::uint64_t pd = t.spf(d);
        const std::uint64_t inner[] = {x / d};
        auto s = checkpoint_sums<CompensatedSum>(
            1, inner,
            [&](std::uint64_t n) {
                const int mu = t.mu(n);
                if (mu == 0)
                    return 0.0;
                const double w = f(std::min(pd, detail::spf_or_infinity(t, n)));
                return static_cast<double>(mu) * w / static_cast<double>(n);
            },
            opt);
        rhs.merge(s.front());
    }

    CompensatedSum split;
    for (std::uint64_t d : ds) {
        if (d > x)
            break;
        const std::uint64_t pd = t.spf(d);
        const std::uint64_t head_x[] = {x / d};
        auto head = checkpoint_sums<CompensatedSum>(
            1, head_x,
            [&](std::uint64_t n) {
                if (detail::spf_or_infinity(t, n) < pd)
                    return 0.0;
                const int mu = t.mu(n);
                return mu == 0 ? 0.0 : static_cast<double>(mu) / static_cast<double>(n);
            },
            opt);
        split.add(f(pd) * head.front().value());
        for (std::uint64_t p : detail::primes_below(t, pd)) {
            const double fp = f(p);
            if (fp == 0.0 || x / d / p < 1)
                continue;
            const std::uint64_t tail_x[] = {x / d / p};
            auto tail = checkpoint_sums<CompensatedSum>(
                1, tail_x,
                [&](std::uint64_t n) {
                    if (detail::spf_or_infinity(t, n) <= p)
                        return 0.0;
                    const int mu = t.mu(n);
                    return mu == 0 ? 0.0 : static_cast<double>(mu) / static_cast<double>(n);
                },
                opt);
            split.add(-fp / static_cast<double>(p) * tail.front().value());
        }
    }
    return {lhs, rhs.value(), split.value()};
}

/// Runs whichever series spec.kind names. spec.target, when set, overrides
/// the kind's implied target (weighted-lhs and table-weight densities have
/// none otherwise).
inline PartialSumSeries run_series(const SpfTable& t, const SeriesSpec& spec, const EvalOptions& opt = {}) {
    auto need_weight = [&]() -> const PrimeWeight& {
        if (!spec.weight)
            throw std::invalid_argument(std::string(to_string(spec.kind)) + " needs a weight");
        return *spec.weight;
    };
    PartialSumSeries out;
    switch (spec.kind) {
    case SeriesKind::mu_baseline:
        out = mu_baseline(t, spec.checkpoints, opt);
        break;
    case SeriesKind::alladi:
        out = alladi_partial_sum(t, spec.k, spec.l, spec.checkpoints, opt);
        break;
    case SeriesKind::ramanujan_alladi:
        out = ramanujan_alladi_partial_sum(t, spec.m, spec.k, spec.l, spec.checkpoints, opt);
        break;
    case SeriesKind::mu_mn:
        out = mu_mn_partial_sum(t, spec.m, spec.k, spec.l, spec.checkpoints, opt);
        break;
    case SeriesKind::mertens_restricted:
        out = mertens_restricted(t, spec.y, spec.checkpoints, opt);
        break;
    case SeriesKind::mu_over_n_restricted:
        out = mu_over_n_restricted(t, spec.y, spec.checkpoints, opt);
        break;
    case SeriesKind::weighted_lhs:
        out = weighted_lhs(t, spec.m, need_weight(), spec.checkpoints, spec.target, opt);
        break;
    case SeriesKind::lpf_density:
        out = lpf_density(t, need_weight(), spec.checkpoints, spec.target, opt);
        break;
    case SeriesKind::difference_term:
        out = difference_series(t, spec.m, need_weight(), spec.checkpoints, opt);
        break;
    }
    if (spec.target && out.spec.target != spec.target) {
        out.spec.target = spec.target;
        for (auto& row : out.rows)
            row.error = std::abs(row.value - *spec.target);
    }
    return out;
}

} // namespace alladi
