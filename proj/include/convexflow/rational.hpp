#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace convexflow {

using Rational = mpq_class;

namespace detail {
inline bool all_digits(std::string_view s)
{
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}
}

// Accepts "p", "-p", "p/q" and "-p/q" with q > 0. Result is canonical.
inline Rational parse_rational(std::string_view text)
{
    std::string_view body = text;
    if (!body.empty() && body.front() == '-') body.remove_prefix(1);
    auto slash = body.find('/');
    std::string_view num = body.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den))
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    mpz_class d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational r{mpz_class(std::string(num), 10), d};
    r.canonicalize();
    if (text.front() == '-') r = -r;
    return r;
}

// "num/den" in lowest terms; integers print without a denominator.
inline std::string to_string(const Rational& r)
{
    return r.get_str(10);
}

inline Rational abs_value(const Rational& r) { return r < 0 ? Rational(-r) : r; }

inline Rational max_of(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational min_of(const Rational& a, const Rational& b) { return b < a ? b : a; }

// Smallest k with 2^k >= x, for x >= 1.
inline std::size_t ceil_log2(const Rational& x)
{
    if (x <= 1) return 0;
    mpz_class c = x.get_num() / x.get_den();
    if (c * x.get_den() != x.get_num()) ++c;
    std::size_t k = mpz_sizeinbase(c.get_mpz_t(), 2);
    mpz_class p = 1;
    p <<= static_cast<mp_bitcnt_t>(k - 1);
    return p == c ? k - 1 : k;
}

}
