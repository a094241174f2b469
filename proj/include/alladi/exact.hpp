#pragma once

// Exact rational evaluation of the difference-term rearrangement. Weights
// are doubles, and every finite double is a dyadic rational, so each side
// is computed as an exact element of Q from the very same inputs the
// floating-point path sees.

#include "alladi/series.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace alladi {

/// Largest x accepted by the exact path.
inline constexpr std::uint64_t kExactCap = 1000000;

/// Collects rational terms and sums them by binary splitting on unreduced
/// numerator/denominator pairs; a single gcd reduction happens at the end.
class RationalSum {
  public:
    void add(const mpq_class& term) {
        if (term != 0)
            terms_.push_back(term);
    }

    mpq_class value() const {
        if (terms_.empty())
            return 0;
        mpz_class num, den;
        split(0, terms_.size(), num, den);
        mpq_class out(num, den);
        out.canonicalize();
        return out;
    }

  private:
    void split(std::size_t lo, std::size_t hi, mpz_class& num, mpz_class& den) const {
        if (hi - lo == 1) {
            num = terms_[lo].get_num();
            den = terms_[lo].get_den();
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        mpz_class n2, d2;
        split(lo, mid, num, den);
        split(mid, hi, n2, d2);
        num = num * d2 + n2 * den;
        den *= d2;
    }

    std::vector<mpq_class> terms_;
};

struct ExactDifferenceTerm {
    mpq_class lhs;
    mpq_class rhs;
    mpq_class split_rhs;
};

namespace detail {

inline mpq_class exact_weight(const PrimeWeight& f, std::uint64_t p) {
    return mpq_class(f(p));
}

inline mpq_class exact_mu_over_n(int mu, std::uint64_t n) {
    return mpq_class(mpz_class(mu), mpz_class(static_cast<unsigned long>(n)));
}

} // namespace detail

/// Same three quantities as difference_term, in exact arithmetic.
inline ExactDifferenceTerm difference_term_exact(const SpfTable& t, std::uint64_t m, const PrimeWeight& f,
                                                 std::uint64_t x) {
    if (x < 1 || x > t.limit())
        throw std::invalid_argument("x=" + std::to_string(x) + " outside [1, sieve limit]");
    if (x > kExactCap)
        throw std::invalid_argument("exact mode supports x <= " + std::to_string(kExactCap));
    const auto ds = detail::nontrivial_divisors(t, m);
    RamanujanEvaluator c(t, m);

    RationalSum lhs;
    for (std::uint64_t n = 2; n <= x; ++n) {
        const std::int64_t diff = c(n) - t.mu(n);
        if (diff == 0)
            continue;
        const double w = f(t.spf(n));
        if (w == 0.0)
            continue;
        mpq_class term(mpz_class(static_cast<long>(diff)), mpz_class(static_cast<unsigned long>(n)));
        term.canonicalize();
        lhs.add(term * mpq_class(w));
    }

    RationalSum rhs;
    for (std::uint64_t d : ds) {
        if (d > x)
            break;
        const std::uint64_t pd = t.spf(d);
        for (std::uint64_t n = 1; n <= x / d; ++n) {
            const int mu = t.mu(n);
            if (mu == 0)
                continue;
            const double w = f(std::min(pd, detail::spf_or_infinity(t, n)));
            if (w != 0.0)
                rhs.add(detail::exact_mu_over_n(mu, n) * mpq_class(w));
        }
    }

    RationalSum split;
    for (std::uint64_t d : ds) {
        if (d > x)
            break;
        const std::uint64_t pd = t.spf(d);
        RationalSum head;
        for (std::uint64_t n = 1; n <= x / d; ++n) {
            const int mu = t.mu(n);
            if (mu != 0 && detail::spf_or_infinity(t, n) >= pd)
                head.add(detail::exact_mu_over_n(mu, n));
        }
        split.add(detail::exact_weight(f, pd) * head.value());
        for (std::uint64_t p : detail::primes_below(t, pd)) {
            const double fp = f(p);
            if (fp == 0.0 || x / d / p < 1)
                continue;
            RationalSum tail;
            for (std::uint64_t n = 1; n <= x / d / p; ++n) {
                const int mu = t.mu(n);
                if (mu != 0 && detail::spf_or_infinity(t, n) > p)
                    tail.add(detail::exact_mu_over_n(mu, n));
            }
            mpq_class scale(mpq_class(fp) / mpq_class(mpz_class(static_cast<unsigned long>(p))));
            split.add(-scale * tail.value());
        }
    }
    return {lhs.value(), rhs.value(), split.value()};
}

} // namespace alladi
