#pragma once

// Smallest-prime-factor tables and the arithmetic functions derived from
// them: p(n), P(n), mu(n), phi(n) and full factorizations.

#include "alladi/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <new>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alladi {

/// Thrown when a request would exceed the configured memory budget or the
/// allocation itself fails.
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PrimePower {
    std::uint64_t prime;
    std::uint32_t exponent;

    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Prime factorization with primes strictly ascending and exponents >= 1.
/// The factorization of 1 is empty.
struct Factorization {
    std::vector<PrimePower> factors;

    std::uint64_t value() const {
        std::uint64_t v = 1;
        for (auto [p, e] : factors)
            for (std::uint32_t i = 0; i < e; ++i)
                v *= p;
        return v;
    }
    bool squarefree() const {
        for (auto f : factors)
            if (f.exponent > 1)
                return false;
        return true;
    }

    friend bool operator==(const Factorization&, const Factorization&) = default;
};

/// All positive divisors in ascending order.
inline std::vector<std::uint64_t> divisors(const Factorization& f) {
    std::vector<std::uint64_t> out{1};
    for (auto [p, e] : f.factors) {
        const std::size_t base = out.size();
        std::uint64_t pk = 1;
        for (std::uint32_t i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < base; ++j)
                out.push_back(out[j] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// 4 GiB covers limit = 10^9 with 32-bit entries.
inline constexpr std::uint64_t kDefaultMemoryBudget = std::uint64_t{4} << 30;
// 32-bit entries; the table stores indices up to limit inclusive.
inline constexpr std::uint64_t kMaxLimit = std::numeric_limits<std::uint32_t>::max() - 1;

struct SieveOptions {
    /// 1 selects the linear sieve; anything else (including kAutoWorkers)
    /// selects the segmented sieve run on that many threads.
    unsigned workers = 1;
    bool force_segmented = false;
    std::uint64_t segment_size = std::uint64_t{1} << 18;
    /// Also store mu(n) for every n as int8, trading limit bytes for
    /// O(1) lookups in series workloads.
    bool mobius_table = false;
    std::uint64_t memory_budget = kDefaultMemoryBudget;
};

/// Immutable after construction; safe to share between threads.
class SpfTable {
  public:
    std::uint64_t limit() const { return limit_; }

    /// Entry n holds the smallest prime dividing n; entries 0 and 1 are 0.
    std::span<const std::uint32_t> entries() const { return spf_; }

    std::uint32_t spf(std::uint64_t n) const { return spf_[n]; }

    bool has_mobius_table() const { return !mu_.empty(); }

    bool contains(std::uint64_t n) const { return n >= 1 && n <= limit_; }

    /// mu(n) for 1 <= n <= limit, no range check.
    int mu(std::uint64_t n) const {
        if (!mu_.empty())
            return mu_[n];
        int sign = 1;
        while (n > 1) {
            std::uint32_t p = spf_[n];
            n /= p;
            if (n % p == 0)
                return 0;
            sign = -sign;
        }
        return sign;
    }

    /// Largest prime factor for 2 <= n <= limit, no range check.
    std::uint64_t lpf(std::uint64_t n) const {
        std::uint64_t p = spf_[n];
        while (n > 1) {
            p = spf_[n];
            n /= p;
        }
        return p;
    }

  private:
    SpfTable(std::uint64_t limit, std::vector<std::uint32_t> spf)
        : limit_(limit), spf_(std::move(spf)) {}

    void fill_mobius() {
        mu_.assign(limit_ + 1, 0);
        mu_[1] = 1;
        for (std::uint64_t n = 2; n <= limit_; ++n) {
            std::uint64_t p = spf_[n];
            std::uint64_t q = n / p;
            mu_[n] = (q % p == 0) ? 0 : static_cast<std::int8_t>(-mu_[q]);
        }
    }

    std::uint64_t limit_;
    std::vector<std::uint32_t> spf_;
    std::vector<std::int8_t> mu_;

    friend SpfTable build_spf_table(std::uint64_t, const SieveOptions&);
    friend SpfTable load_spf_cache(const std::filesystem::path&, std::optional<std::uint64_t>,
                                   const SieveOptions&);
};

namespace detail {

inline void check_budget(std::uint64_t limit, const SieveOptions& opt) {
    if (limit > kMaxLimit)
        throw ResourceError("sieve limit " + std::to_string(limit) +
                            " exceeds the 32-bit entry range (max " + std::to_string(kMaxLimit) + ")");
    std::uint64_t bytes = (limit + 1) * sizeof(std::uint32_t) + (opt.mobius_table ? limit + 1 : 0);
    if (bytes > opt.memory_budget)
        throw ResourceError("sieve limit " + std::to_string(limit) + " needs " + std::to_string(bytes) +
                            " bytes, over the memory budget of " + std::to_string(opt.memory_budget));
}

inline std::vector<std::uint32_t> allocate_entries(std::uint64_t limit) {
    try {
        return std::vector<std::uint32_t>(limit + 1, 0);
    } catch (const std::bad_alloc&) {
        throw ResourceError("cannot allocate spf table for limit " + std::to_string(limit));
    }
}

// Each composite i*p is written exactly once, by its smallest prime p.
inline void linear_sieve(std::vector<std::uint32_t>& spf, std::uint64_t limit) {
    std::vector<std::uint32_t> primes;
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (spf[i] == 0) {
            spf[i] = static_cast<std::uint32_t>(i);
            primes.push_back(static_cast<std::uint32_t>(i));
        }
        const std::uint64_t cap = limit / i;
        const std::uint32_t si = spf[i];
        for (std::uint32_t p : primes) {
            if (p > si || p > cap)
                break;
            spf[i * p] = p;
        }
    }
}

inline std::vector<std::uint32_t> base_primes(std::uint64_t bound) {
    std::vector<char> composite(bound + 1, 0);
    std::vector<std::uint32_t> primes;
    for (std::uint64_t i = 2; i <= bound; ++i) {
        if (composite[i])
            continue;
        primes.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= bound; j += i)
            composite[j] = 1;
    }
    return primes;
}

inline std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n)
        --r;
    while ((r + 1) * (r + 1) <= n)
        ++r;
    return r;
}

// Segments cover disjoint index ranges, so they can be filled concurrently.
inline void segmented_sieve(std::vector<std::uint32_t>& spf, std::uint64_t limit,
                            std::uint64_t segment_size, unsigned workers) {
    const auto primes = base_primes(isqrt(limit));
    segment_size = std::max<std::uint64_t>(segment_size, 1);
    const std::uint64_t span = limit - 1; // indices 2..limit
    const std::size_t segments = (span + segment_size - 1) / segment_size;
    parallel_for(segments, workers, [&](std::size_t s) {
        const std::uint64_t lo = 2 + s * segment_size;
        const std::uint64_t hi = std::min(limit, lo + segment_size - 1);
        for (std::uint32_t p : primes) {
            const std::uint64_t pp = std::uint64_t{p} * p;
            if (pp > hi)
                break;
            std::uint64_t start = std::max(pp, (lo + p - 1) / p * p);
            for (std::uint64_t j = start; j <= hi; j += p)
                if (spf[j] == 0)
                    spf[j] = p;
        }
        for (std::uint64_t j = lo; j <= hi; ++j)
            if (spf[j] == 0)
                spf[j] = static_cast<std::uint32_t>(j);
    });
}

inline void check_range(const SpfTable& t, std::uint64_t n, std::uint64_t lo, const char* what) {
    if (n < lo || n > t.limit())
        throw std::invalid_argument(std::string(what) + ": n=" + std::to_string(n) + " outside [" +
                                    std::to_string(lo) + ", " + std::to_string(t.limit()) + "]");
}

} // namespace detail

/// Builds the table for 2..limit. Linear sieve on one worker, segmented
/// Eratosthenes otherwise; both produce identical entries.
inline SpfTable build_spf_table(std::uint64_t limit, const SieveOptions& opt = {}) {
    if (limit < 2)
        throw std::invalid_argument("sieve limit must be >= 2, got " + std::to_string(limit));
    detail::check_budget(limit, opt);
    auto spf = detail::allocate_entries(limit);
    if (opt.workers == 1 && !opt.force_segmented)
        detail::linear_sieve(spf, limit);
    else
        detail::segmented_sieve(spf, limit, opt.segment_size, opt.workers);
    SpfTable t(limit, std::move(spf));
    if (opt.mobius_table)
        t.fill_mobius();
    return t;
}

inline std::uint64_t smallest_prime_factor(const SpfTable& t, std::uint64_t n) {
    detail::check_range(t, n, 2, "smallest_prime_factor");
    return t.spf(n);
}

inline std::uint64_t largest_prime_factor(const SpfTable& t, std::uint64_t n) {
    detail::check_range(t, n, 2, "largest_prime_factor");
    return t.lpf(n);
}

inline int moebius(const SpfTable& t, std::uint64_t n) {
    detail::check_range(t, n, 1, "moebius");
    return t.mu(n);
}

inline std::uint64_t euler_phi(const SpfTable& t, std::uint64_t n) {
    detail::check_range(t, n, 1, "euler_phi");
    std::uint64_t phi = n;
    while (n > 1) {
        std::uint64_t p = t.spf(n);
        phi = phi / p * (p - 1);
        while (n % p == 0)
            n /= p;
    }
    return phi;
}

/// Factorization by repeated spf division. n = 1 is accepted and yields
/// the empty factorization.
inline Factorization factorize(const SpfTable& t, std::uint64_t n) {
    detail::check_range(t, n, 1, "factorize");
    Factorization f;
    while (n > 1) {
        std::uint64_t p = t.spf(n);
        std::uint32_t e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.factors.push_back({p, e});
    }
    return f;
}

// Binary cache: "SPFT", u32 version, u64 limit, u8 entry width, then the
// entries for n = 2..limit, all little-endian.
inline constexpr char kCacheMagic[4] = {'S', 'P', 'F', 'T'};
inline constexpr std::uint32_t kCacheVersion = 1;

namespace detail {

template <typename T>
void write_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T)))
        throw std::runtime_error("spf cache truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= std::uint64_t{buf[i]} << (8 * i);
    return static_cast<T>(v);
}

} // namespace detail

inline void save_spf_cache(const SpfTable& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kCacheMagic, 4);
    detail::write_le<std::uint32_t>(out, kCacheVersion);
    detail::write_le<std::uint64_t>(out, t.limit());
    detail::write_le<std::uint8_t>(out, sizeof(std::uint32_t));
    auto entries = t.entries().subspan(2);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(entries.data()),
                  static_cast<std::streamsize>(entries.size_bytes()));
    } else {
        for (auto e : entries)
            detail::write_le<std::uint32_t>(out, e);
    }
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

/// Loads a cache written by save_spf_cache. When expected_limit is given the
/// stored limit must match it exactly.
inline SpfTable load_spf_cache(const std::filesystem::path& path,
                               std::optional<std::uint64_t> expected_limit = std::nullopt,
                               const SieveOptions& opt = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open spf cache " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCacheMagic, 4) != 0)
        throw std::runtime_error("bad spf cache magic in " + path.string());
    auto version = detail::read_le<std::uint32_t>(in);
    if (version != kCacheVersion)
        throw std::runtime_error("unsupported spf cache version " + std::to_string(version));
    auto limit = detail::read_le<std::uint64_t>(in);
    auto width = detail::read_le<std::uint8_t>(in);
    if (width != sizeof(std::uint32_t))
        throw std::runtime_error("unsupported spf cache entry width " + std::to_string(width));
    if (limit < 2)
        throw std::runtime_error("spf cache limit " + std::to_string(limit) + " below 2");
    if (expected_limit && *expected_limit != limit)
        throw std::runtime_error("spf cache " + path.string() + " has limit " + std::to_string(limit) +
                                 ", expected " + std::to_string(*expected_limit));
    detail::check_budget(limit, opt);
    auto spf = detail::allocate_entries(limit);
    const auto bytes = static_cast<std::streamsize>((limit - 1) * sizeof(std::uint32_t));
    if (!in.read(reinterpret_cast<char*>(spf.data() + 2), bytes))
        throw std::runtime_error("spf cache truncated: " + path.string());
    if (in.peek() != std::char_traits<char>::eof())
        throw std::runtime_error("trailing bytes in spf cache " + path.string());
    if constexpr (std::endian::native != std::endian::little) {
        for (auto& e : spf)
            e = __builtin_bswap32(e);
    }
    SpfTable t(limit, std::move(spf));
    if (opt.mobius_table)
        t.fill_mobius();
    return t;
}

} // namespace alladi
