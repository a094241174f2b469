#include "alladi/exact.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace alladi;

namespace {

const SpfTable& table() {
    static const SpfTable t = build_spf_table(100000);
    return t;
}

} // namespace

TEST(RationalSum, BinarySplittingIsExact) {
    RationalSum s;
    mpq_class direct = 0;
    for (unsigned long n = 1; n <= 500; ++n) {
        mpq_class term((n % 3 == 0) ? -1 : 1, n);
        term.canonicalize();
        s.add(term);
        direct += term;
    }
    EXPECT_EQ(s.value(), direct);
    EXPECT_EQ(RationalSum{}.value(), 0);
}

TEST(ExactDifference, HandEnumeratedCase) {
    auto d = difference_term_exact(table(), 2, PrimeWeight::constant_one(), 10);
    EXPECT_EQ(d.lhs, mpq_class(-1, 30));
    EXPECT_EQ(d.rhs, mpq_class(-1, 30));
    EXPECT_EQ(d.split_rhs, mpq_class(-1, 30));
}

TEST(ExactDifference, TrivialM) {
    auto d = difference_term_exact(table(), 1, PrimeWeight::residue(3, 1), 1000);
    EXPECT_EQ(d.lhs, 0);
    EXPECT_EQ(d.rhs, 0);
}

TEST(ExactDifference, LhsMatchesIndependentEnumeration) {
    auto f = PrimeWeight::table({{2, 0.5}, {3, -0.25}, {5, 0.125}});
    const std::uint64_t m = 12, x = 600;
    auto d = difference_term_exact(table(), m, f, x);
    // -(-sum) of (c_n(m) - mu(n)) f(p(n)) / n
    mpq_class brute = -oracle::restricted_series(
        x, [&](std::uint64_t n) { return oracle::ramanujan_exponential(n, m) - oracle::mobius(n); },
        [&](std::uint64_t p) { return mpq_class(f(p)); });
    EXPECT_EQ(d.lhs, brute);
    EXPECT_EQ(d.rhs, brute);
    EXPECT_EQ(d.split_rhs, brute);
}

TEST(ExactDifference, AllSidesExactlyEqualAndFloatPathClose) {
    for (std::uint64_t m : {2ull, 6ull, 30ull}) {
        for (const auto& f : {PrimeWeight::constant_one(), PrimeWeight::residue(4, 3),
                              PrimeWeight::table({{2, 0.3}, {7, -1.0 / 3}, {11, 0.9}}, 0.1)}) {
            auto d = difference_term_exact(table(), m, f, 20000);
            EXPECT_EQ(d.lhs, d.rhs) << m << " " << f.describe();
            EXPECT_EQ(d.lhs, d.split_rhs) << m << " " << f.describe();
            auto fl = difference_term(table(), m, f, 20000);
            EXPECT_NEAR(fl.lhs, d.lhs.get_d(), 1e-13);
            EXPECT_NEAR(fl.rhs, d.rhs.get_d(), 1e-13);
        }
    }
}

TEST(ExactDifference, Errors) {
    auto big = build_spf_table(kExactCap + 10);
    EXPECT_THROW(difference_term_exact(big, 2, PrimeWeight::constant_one(), kExactCap + 1), std::invalid_argument);
    EXPECT_THROW(difference_term_exact(table(), 2, PrimeWeight::constant_one(), 0), std::invalid_argument);
}
