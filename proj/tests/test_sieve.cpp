#include "alladi/sieve.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include <unistd.h>

using namespace alladi;

namespace {

const SpfTable& million() {
    static const SpfTable t = build_spf_table(1000000);
    return t;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("alladi_" + std::to_string(::getpid()) + "_" + name);
}

} // namespace

TEST(Sieve, SmallTableMatchesDefinition) {
    auto t = build_spf_table(10);
    const std::uint32_t expected[] = {0, 0, 2, 3, 2, 5, 2, 7, 2, 3, 2};
    ASSERT_EQ(t.entries().size(), 11u);
    for (std::uint64_t n = 2; n <= 10; ++n)
        EXPECT_EQ(smallest_prime_factor(t, n), expected[n]) << n;
}

TEST(Sieve, SmallestValidTable) {
    auto t = build_spf_table(2);
    EXPECT_EQ(t.limit(), 2u);
    EXPECT_EQ(smallest_prime_factor(t, 2), 2u);
}

TEST(Sieve, RejectsTinyLimit) {
    EXPECT_THROW(build_spf_table(1), std::invalid_argument);
    EXPECT_THROW(build_spf_table(0), std::invalid_argument);
}

TEST(Sieve, BudgetViolationEchoesLimit) {
    SieveOptions opt;
    opt.memory_budget = 1000;
    try {
        build_spf_table(5000, opt);
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_NE(std::string(e.what()).find("5000"), std::string::npos);
    }
    EXPECT_THROW(build_spf_table(kMaxLimit + 1), ResourceError);
}

TEST(Sieve, InvariantsHoldUpToMillion) {
    const auto& t = million();
    for (std::uint64_t n = 2; n <= t.limit(); ++n) {
        const std::uint64_t p = t.spf(n);
        ASSERT_EQ(n % p, 0u) << n;
        ASSERT_EQ(t.spf(p), p) << n; // p is prime
        ASSERT_TRUE(p == n || p * p <= n) << n;
    }
}

TEST(Sieve, MillionEdgeValuesAgainstTrialDivision) {
    const auto& t = million();
    ASSERT_TRUE(oracle::is_prime(999983));
    EXPECT_EQ(smallest_prime_factor(t, 999983), 999983u);
    EXPECT_EQ(smallest_prime_factor(t, 10), 2u);
    EXPECT_EQ(smallest_prime_factor(t, 49), 7u);
    EXPECT_EQ(largest_prime_factor(t, 10), 5u);
    EXPECT_EQ(largest_prime_factor(t, 1024), 2u);
    EXPECT_EQ(largest_prime_factor(t, 999966), oracle::largest_prime_factor(999966));
    EXPECT_EQ(largest_prime_factor(t, 999966), 139u);
}

TEST(Sieve, RangeErrors) {
    const auto& t = million();
    EXPECT_THROW(smallest_prime_factor(t, 1), std::invalid_argument);
    EXPECT_THROW(smallest_prime_factor(t, 1000001), std::invalid_argument);
    EXPECT_THROW(largest_prime_factor(t, 0), std::invalid_argument);
    EXPECT_THROW(moebius(t, 0), std::invalid_argument);
    EXPECT_THROW(euler_phi(t, 2000000), std::invalid_argument);
    EXPECT_THROW(factorize(t, 0), std::invalid_argument);
}

TEST(Sieve, MoebiusExamples) {
    const auto& t = million();
    EXPECT_EQ(moebius(t, 1), 1);
    EXPECT_EQ(moebius(t, 12), 0);
    EXPECT_EQ(moebius(t, 30), -1);
}

TEST(Sieve, MoebiusMatchesTrialDivisionOracle) {
    const auto& t = million();
    for (std::uint64_t n = 1; n <= 100000; ++n)
        ASSERT_EQ(moebius(t, n), oracle::mobius(n)) << n;
}

TEST(Sieve, MoebiusTableModeAgrees) {
    SieveOptions opt;
    opt.mobius_table = true;
    auto with = build_spf_table(200000, opt);
    auto without = build_spf_table(200000);
    ASSERT_TRUE(with.has_mobius_table());
    ASSERT_FALSE(without.has_mobius_table());
    for (std::uint64_t n = 1; n <= 200000; ++n)
        ASSERT_EQ(with.mu(n), without.mu(n)) << n;
}

TEST(Sieve, PhiExamples) {
    const auto& t = million();
    EXPECT_EQ(euler_phi(t, 1), 1u);
    EXPECT_EQ(euler_phi(t, 4), 2u);
    EXPECT_EQ(euler_phi(t, 5040), oracle::phi(5040));
    EXPECT_EQ(euler_phi(t, 5040), 1152u);
}

TEST(Sieve, FactorizeExamples) {
    const auto& t = million();
    EXPECT_EQ(factorize(t, 12), (Factorization{{{2, 2}, {3, 1}}}));
    EXPECT_EQ(factorize(t, 97), (Factorization{{{97, 1}}}));
    Factorization f = factorize(t, 720720);
    EXPECT_EQ(f, (Factorization{{{2, 4}, {3, 2}, {5, 1}, {7, 1}, {11, 1}, {13, 1}}}));
    std::vector<std::pair<std::uint64_t, std::uint32_t>> brute;
    for (auto [p, e] : f.factors)
        brute.push_back({p, e});
    EXPECT_EQ(brute, oracle::factorize(720720));
    EXPECT_TRUE(factorize(t, 1).factors.empty());
}

TEST(Sieve, FactorizationInvariants) {
    const auto& t = million();
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> dist(2, t.limit());
    for (int i = 0; i < 20000; ++i) {
        const auto n = dist(rng);
        auto f = factorize(t, n);
        ASSERT_EQ(f.value(), n);
        for (std::size_t j = 0; j < f.factors.size(); ++j) {
            ASSERT_GE(f.factors[j].exponent, 1u);
            if (j) {
                ASSERT_LT(f.factors[j - 1].prime, f.factors[j].prime);
            }
        }
    }
}

TEST(Sieve, SmallestVersusLargestPrimeFactor) {
    const auto& t = million();
    for (std::uint64_t n = 2; n <= t.limit(); ++n) {
        const auto p = t.spf(n);
        const auto big = t.lpf(n);
        ASSERT_LE(p, big);
        bool prime_power = factorize(t, n).factors.size() == 1;
        ASSERT_EQ(p == big, prime_power) << n;
    }
}

TEST(Sieve, DivisorSumIdentities) {
    const auto& t = million();
    for (std::uint64_t n = 1; n <= 10000; ++n) {
        std::int64_t mu_sum = 0;
        std::uint64_t phi_sum = 0;
        for (auto d : divisors(factorize(t, n))) {
            ASSERT_EQ(n % d, 0u);
            mu_sum += moebius(t, d);
            phi_sum += euler_phi(t, d);
        }
        ASSERT_EQ(mu_sum, n == 1 ? 1 : 0) << n;
        ASSERT_EQ(phi_sum, n) << n;
    }
}

TEST(Sieve, MultiplicativityOnRandomCoprimePairs) {
    const auto& t = million();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint64_t> dist(1, 1000);
    int checked = 0;
    while (checked < 10000) {
        const auto a = dist(rng), b = dist(rng);
        if (std::gcd(a, b) != 1 || a * b > t.limit())
            continue;
        ASSERT_EQ(moebius(t, a * b), moebius(t, a) * moebius(t, b));
        ASSERT_EQ(euler_phi(t, a * b), euler_phi(t, a) * euler_phi(t, b));
        ++checked;
    }
}

TEST(Sieve, SegmentedSieveIsBitIdentical) {
    const auto& linear = million();
    for (unsigned workers : {1u, 2u, 4u}) {
        for (std::uint64_t seg : {std::uint64_t{1000}, std::uint64_t{65536}, std::uint64_t{1} << 20}) {
            SieveOptions opt;
            opt.workers = workers;
            opt.force_segmented = true;
            opt.segment_size = seg;
            auto t = build_spf_table(linear.limit(), opt);
            ASSERT_TRUE(std::ranges::equal(t.entries(), linear.entries())) << workers << " " << seg;
        }
    }
}

TEST(SieveCache, RoundTripAndByteIdenticalRebuild) {
    auto t = build_spf_table(100000);
    auto a = temp_path("a.bin"), b = temp_path("b.bin");
    save_spf_cache(t, a);
    save_spf_cache(build_spf_table(100000, {.workers = 3}), b);
    EXPECT_EQ(read_bytes(a), read_bytes(b));

    auto bytes = read_bytes(a);
    ASSERT_EQ(bytes.size(), 4 + 4 + 8 + 1 + (100000 - 1) * 4u);
    EXPECT_EQ(bytes.substr(0, 4), "SPFT");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);  // version, little-endian
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 0xA0); // 100000 = 0x186A0
    EXPECT_EQ(static_cast<unsigned char>(bytes[9]), 0x86);
    EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 4u); // entry width

    auto loaded = load_spf_cache(a, 100000);
    EXPECT_TRUE(std::ranges::equal(loaded.entries(), t.entries()));
    EXPECT_THROW(load_spf_cache(a, 99999), std::runtime_error);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(SieveCache, RejectsCorruptFiles) {
    auto t = build_spf_table(1000);
    auto p = temp_path("bad.bin");
    save_spf_cache(t, p);
    auto bytes = read_bytes(p);

    auto write = [&](const std::string& content) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << content;
    };
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    write(bad_magic);
    EXPECT_THROW(load_spf_cache(p), std::runtime_error);

    std::string bad_version = bytes;
    bad_version[4] = 9;
    write(bad_version);
    EXPECT_THROW(load_spf_cache(p), std::runtime_error);

    write(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(load_spf_cache(p), std::runtime_error);

    write(bytes + "x");
    EXPECT_THROW(load_spf_cache(p), std::runtime_error);

    EXPECT_THROW(load_spf_cache(temp_path("missing.bin")), std::runtime_error);
    std::filesystem::remove(p);
}
