#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "gfi/error.hpp"

namespace gfi {

// Exact rational scalar. Program literals are parsed into this type and only
// converted to the active numeric kernel at evaluation time.
using Rational = mpq_class;
using BigInt = mpz_class;

inline Rational rat_of(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Parses "123", "0.25" or "3/4" as an exact rational.
inline Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rational q(text, 10);
        q.canonicalize();
        if (q < 0) throw GfiError(ErrKind::Parse, "negative rational literal: " + text);
        return q;
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        return Rational(mpz_class(text, 10));
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    if (digits.empty()) throw GfiError(ErrKind::Parse, "malformed number: " + text);
    mpz_class num(digits, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline bool fits_uint64(const Rational& q) {
    return is_integer(q) && q >= 0 && q.get_num().fits_ulong_p();
}

inline std::uint64_t to_uint64(const Rational& q) { return q.get_num().get_ui(); }

// Renders the shortest exact form: integer, terminating decimal, or "p/q".
inline std::string rational_to_string(const Rational& q) {
    if (is_integer(q)) return q.get_num().get_str();
    mpz_class den = q.get_den();
    int twos = 0, fives = 0;
    mpz_class d = den;
    while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) {
        mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 2);
        ++twos;
    }
    while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) {
        mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 5);
        ++fives;
    }
    if (d != 1) return q.get_num().get_str() + "/" + q.get_den().get_str();
    int digits = twos > fives ? twos : fives;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
    mpz_class scaled = q.get_num() * scale / den;
    bool neg = scaled < 0;
    std::string s = (neg ? mpz_class(-scaled) : scaled).get_str();
    while ((int)s.size() <= digits) s.insert(s.begin(), '0');
    s.insert(s.size() - digits, ".");
    return (neg ? "-" : "") + s;
}

inline double rat_to_double(const Rational& q) { return q.get_d(); }

inline BigInt binomial_big(std::uint64_t n, std::uint64_t k) {
    BigInt r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline BigInt factorial_big(std::uint64_t n) {
    BigInt r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

}  // namespace gfi
