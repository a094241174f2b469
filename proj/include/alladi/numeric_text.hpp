#pragma once

// Exact integer parsing for command-line counts: "10000000", "10_000_000",
// "1e7", "2.5e6", "10^7". Anything that is not an exact non-negative
// integer is rejected.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace alladi {

namespace detail {

inline std::uint64_t digits_to_u64(std::string_view s, std::string_view whole) {
    if (s.empty())
        throw std::invalid_argument("malformed count '" + std::string(whole) + "'");
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9')
            throw std::invalid_argument("malformed count '" + std::string(whole) + "'");
        if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, static_cast<unsigned>(c - '0'), &v))
            throw std::invalid_argument("count '" + std::string(whole) + "' overflows 64 bits");
    }
    return v;
}

inline std::uint64_t checked_ipow(std::uint64_t base, std::uint64_t exp, std::string_view whole) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i)
        if (__builtin_mul_overflow(r, base, &r))
            throw std::invalid_argument("count '" + std::string(whole) + "' overflows 64 bits");
    return r;
}

} // namespace detail

inline std::uint64_t parse_count(std::string_view text) {
    std::string s;
    for (char c : text)
        if (c != '_')
            s += c;
    if (auto caret = s.find('^'); caret != std::string::npos) {
        auto base = detail::digits_to_u64(std::string_view(s).substr(0, caret), text);
        auto exp = detail::digits_to_u64(std::string_view(s).substr(caret + 1), text);
        return detail::checked_ipow(base, exp, text);
    }
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
        std::string_view mant = std::string_view(s).substr(0, e);
        auto exp = detail::digits_to_u64(std::string_view(s).substr(e + 1), text);
        std::string digits(mant);
        std::uint64_t frac = 0;
        if (auto dot = mant.find('.'); dot != std::string_view::npos) {
            digits = std::string(mant.substr(0, dot)) + std::string(mant.substr(dot + 1));
            frac = mant.size() - dot - 1;
        }
        // Trailing fractional zeros do not need a power of ten to absorb.
        while (frac > 0 && !digits.empty() && digits.back() == '0') {
            digits.pop_back();
            --frac;
        }
        if (frac > exp)
            throw std::invalid_argument("count '" + std::string(text) + "' is not an integer");
        auto v = detail::digits_to_u64(digits, text);
        auto scale = detail::checked_ipow(10, exp - frac, text);
        std::uint64_t r;
        if (__builtin_mul_overflow(v, scale, &r))
            throw std::invalid_argument("count '" + std::string(text) + "' overflows 64 bits");
        return r;
    }
    return detail::digits_to_u64(s, text);
}

/// "A..B" (inclusive) or a single count "A".
inline std::pair<std::uint64_t, std::uint64_t> parse_range(std::string_view text) {
    if (auto dots = text.find(".."); dots != std::string_view::npos) {
        auto lo = parse_count(text.substr(0, dots));
        auto hi = parse_count(text.substr(dots + 2));
        if (lo > hi)
            throw std::invalid_argument("empty range '" + std::string(text) + "'");
        return {lo, hi};
    }
    auto v = parse_count(text);
    return {v, v};
}

} // namespace alladi
