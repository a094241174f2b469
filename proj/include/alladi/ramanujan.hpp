#pragma once

// Ramanujan sums c_n(m) = sum_{d | (n,m)} mu(n/d) d, the defining
// exponential sum as an independent oracle, and the generalized sums
// c_n(m; s, g) = sum_{d | n, d^s | m} g(d) mu(n/d).

#include "alladi/sieve.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace alladi {

/// The direct oracle refuses moduli above this; below it double precision
/// reproduces the integer value with a residue far under the check bound.
inline constexpr std::uint64_t kDirectCap = 100000;

/// The direct oracle's rounding residue exceeded its bound.
class NumericalInconsistency : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw std::overflow_error("integer overflow in Ramanujan sum accumulation");
    return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw std::overflow_error("integer overflow in Ramanujan sum term");
    return r;
}

/// d^s, or nullopt when it does not fit in 64 bits.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t d, std::uint32_t s) {
    std::uint64_t r = 1;
    for (std::uint32_t i = 0; i < s; ++i)
        if (__builtin_mul_overflow(r, d, &r))
            return std::nullopt;
    return r;
}

inline void check_m(std::uint64_t m) {
    if (m < 1)
        throw std::invalid_argument("m must be >= 1");
}

inline std::int64_t to_signed(std::uint64_t v) {
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        throw std::overflow_error("value " + std::to_string(v) + " does not fit in int64");
    return static_cast<std::int64_t>(v);
}

} // namespace detail

/// c_n(m) by the divisor-sum identity. The gcd is factored through the
/// table, so m itself may exceed the sieve limit.
inline std::int64_t ramanujan_sum(const SpfTable& t, std::uint64_t n, std::uint64_t m) {
    detail::check_range(t, n, 1, "ramanujan_sum");
    detail::check_m(m);
    const std::uint64_t g = std::gcd(n, m);
    if (g == 1)
        return t.mu(n);
    std::int64_t c = 0;
    for (std::uint64_t d : divisors(factorize(t, g))) {
        int mu = t.mu(n / d);
        if (mu != 0)
            c = detail::checked_add(c, mu * detail::to_signed(d));
    }
    return c;
}

/// c_n(m) straight from the definition: the real part of
/// sum_{q <= n, (q,n)=1} exp(2 pi i q m / n), rounded to the nearest integer.
inline std::int64_t ramanujan_sum_direct(std::uint64_t n, std::uint64_t m) {
    if (n < 1 || n > kDirectCap)
        throw std::invalid_argument("ramanujan_sum_direct: n=" + std::to_string(n) + " outside [1, " +
                                    std::to_string(kDirectCap) + "]");
    detail::check_m(m);
    const std::uint64_t mr = m % n;
    double re = 0.0;
    std::uint64_t units = 0;
    for (std::uint64_t q = 1; q <= n; ++q) {
        if (std::gcd(q, n) != 1)
            continue;
        ++units;
        // Reduce q*m mod n exactly before forming the angle.
        const std::uint64_t r = (q * mr) % n;
        re += std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
    }
    const double rounded = std::nearbyint(re);
    const double residue = std::abs(re - rounded);
    if (residue > 1e-6 * std::max<double>(1.0, static_cast<double>(units)))
        throw NumericalInconsistency("ramanujan_sum_direct(" + std::to_string(n) + ", " + std::to_string(m) +
                                     "): rounding residue " + std::to_string(residue));
    return static_cast<std::int64_t>(rounded);
}

/// The weight g of a generalized Ramanujan sum together with the exponent s
/// in the divisibility condition d^s | m. g(1) = 1 for every kind.
struct WeightFunctionSpec {
    enum class Kind { identity, power, unit, table };

    Kind kind = Kind::identity;
    std::uint32_t s = 1;
    std::map<std::uint64_t, std::int64_t> values; // Kind::table only

    /// g(d) = d (s = 1 gives the classical sum).
    static WeightFunctionSpec identity(std::uint32_t s = 1) { return make(Kind::identity, s); }
    /// g(d) = d^s: the Cohen-Ramanujan sum.
    static WeightFunctionSpec power(std::uint32_t s) { return make(Kind::power, s); }
    /// g(d) = 1.
    static WeightFunctionSpec unit(std::uint32_t s = 1) { return make(Kind::unit, s); }
    static WeightFunctionSpec table(std::map<std::uint64_t, std::int64_t> values, std::uint32_t s = 1) {
        auto w = make(Kind::table, s);
        auto it = values.find(1);
        if (it == values.end() || it->second != 1)
            throw std::invalid_argument("weight table must define g(1) = 1");
        w.values = std::move(values);
        return w;
    }

    /// g(d); d^s is passed in because power weights need it and callers
    /// already have it.
    std::int64_t operator()(std::uint64_t d, std::uint64_t d_pow_s) const {
        switch (kind) {
        case Kind::identity:
            return detail::to_signed(d);
        case Kind::power:
            return detail::to_signed(d_pow_s);
        case Kind::unit:
            return 1;
        case Kind::table:
            break;
        }
        auto it = values.find(d);
        if (it == values.end())
            throw std::invalid_argument("weight table has no value for divisor " + std::to_string(d));
        return it->second;
    }

  private:
    static WeightFunctionSpec make(Kind k, std::uint32_t s) {
        if (s < 1)
            throw std::invalid_argument("weight exponent s must be >= 1");
        WeightFunctionSpec w;
        w.kind = k;
        w.s = s;
        return w;
    }
};

/// c_n(m; s, g). Every admissible d divides gcd(n, m) because d | d^s | m,
/// so the divisors come from factoring the gcd.
inline std::int64_t generalized_ramanujan_sum(const SpfTable& t, std::uint64_t n, std::uint64_t m,
                                              const WeightFunctionSpec& g) {
    detail::check_range(t, n, 1, "generalized_ramanujan_sum");
    detail::check_m(m);
    std::int64_t c = 0;
    for (std::uint64_t d : divisors(factorize(t, std::gcd(n, m)))) {
        auto ds = detail::checked_pow(d, g.s);
        if (!ds || m % *ds != 0)
            continue;
        const std::int64_t gd = g(d, *ds);
        const int mu = t.mu(n / d);
        if (mu != 0)
            c = detail::checked_add(c, detail::checked_mul(gd, mu));
    }
    return c;
}

/// Evaluates c_n(m) for one fixed m across many n. When m is inside the
/// table its divisors are enumerated once and each n only needs
/// divisibility tests; otherwise it defers to ramanujan_sum.
class RamanujanEvaluator {
  public:
    RamanujanEvaluator(const SpfTable& t, std::uint64_t m) : table_(&t), m_(m) {
        detail::check_m(m);
        if (m <= t.limit()) {
            for (std::uint64_t d : divisors(factorize(t, m)))
                divisors_.push_back({d, detail::to_signed(d)});
        }
    }

    std::uint64_t m() const { return m_; }

    std::int64_t operator()(std::uint64_t n) const {
        if (divisors_.empty())
            return ramanujan_sum(*table_, n, m_);
        if (m_ == 1)
            return table_->mu(n);
        std::int64_t c = 0;
        for (auto [d, ds] : divisors_) {
            if (d > n)
                break;
            if (n % d == 0)
                c += table_->mu(n / d) * ds; // |c| <= n, no overflow
        }
        return c;
    }

  private:
    struct Divisor {
        std::uint64_t d;
        std::int64_t value;
    };
    const SpfTable* table_;
    std::uint64_t m_;
    std::vector<Divisor> divisors_;
};

} // namespace alladi
