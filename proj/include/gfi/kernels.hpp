#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <type_traits>

#include "gfi/bigfloat.hpp"
#include "gfi/error.hpp"
#include "gfi/interval.hpp"
#include "gfi/rational.hpp"

namespace gfi {

// ---------------------------------------------------------------------------
// Scalar operations shared by the Taylor engine, overloaded per scalar type.
// Field ops come from the types' operators; everything else lives here.
// ---------------------------------------------------------------------------

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static constexpr bool has_exp = true;
};
template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static constexpr bool has_exp = false;
};
template <>
struct ScalarTraits<BigFloat> {
    static constexpr bool exact = false;
    static constexpr bool has_exp = true;
};
template <class T>
struct ScalarTraits<Interval<T>> {
    static constexpr bool exact = false;
    static constexpr bool has_exp = true;
};

// --- exact-zero / sign guards ---

inline bool s_is_zero(double x) { return x == 0.0; }
inline bool s_is_zero(const Rational& x) { return x == 0; }
inline bool s_is_zero(const BigFloat& x) { return x.is_zero(); }
template <class T>
bool s_is_zero(const Interval<T>& x) { return s_is_zero(x.lo) && s_is_zero(x.hi); }

inline bool s_definitely_nonzero(double x) { return x != 0.0; }
inline bool s_definitely_nonzero(const Rational& x) { return x != 0; }
inline bool s_definitely_nonzero(const BigFloat& x) { return !x.is_zero(); }
template <class T>
bool s_definitely_nonzero(const Interval<T>& x) { return !x.contains_zero(); }

inline bool s_definitely_positive(double x) { return x > 0.0; }
inline bool s_definitely_positive(const Rational& x) { return x > 0; }
inline bool s_definitely_positive(const BigFloat& x) { return x.sign() > 0; }
template <class T>
bool s_definitely_positive(const Interval<T>& x) { return s_definitely_positive(x.lo); }

// --- one/zero preserving the value's precision context ---

inline double s_one_like(double) { return 1.0; }
inline Rational s_one_like(const Rational&) { return Rational(1); }
inline BigFloat s_one_like(const BigFloat& x) { return BigFloat(1L, x.precision()); }
template <class T>
Interval<T> s_one_like(const Interval<T>& x) { return Interval<T>(s_one_like(x.lo)); }

// --- integer scaling ---

inline double s_mul_si(double x, long n) { return x * (double)n; }
inline Rational s_mul_si(const Rational& x, long n) { return x * Rational(n); }
inline BigFloat s_mul_si(const BigFloat& x, long n) { return BigFloat::mul_si(x, n, MPFR_RNDN); }
template <class T>
Interval<T> s_mul_si(const Interval<T>& x, long n) { return interval_mul_si(x, n); }

inline double s_div_si(double x, long n) { return x / (double)n; }
inline Rational s_div_si(const Rational& x, long n) {
    if (n == 0) throw GfiError(ErrKind::DivisionByZero, "division by zero");
    Rational r = x / Rational(n);
    r.canonicalize();
    return r;
}
inline BigFloat s_div_si(const BigFloat& x, long n) { return BigFloat::div_si(x, n, MPFR_RNDN); }
template <class T>
Interval<T> s_div_si(const Interval<T>& x, long n) { return interval_div_si(x, n); }

// --- transcendental ops; the rational kernel rejects them ---

inline double s_exp(double x) { return std::exp(x); }
inline BigFloat s_exp(const BigFloat& x) { return BigFloat::exp(x, MPFR_RNDN); }
template <class T>
Interval<T> s_exp(const Interval<T>& x) { return interval_exp(x); }
inline Rational s_exp(const Rational&) {
    throw GfiError(ErrKind::UnsupportedOp, "exp is not available in rational arithmetic");
}

inline double s_ln(double x) {
    if (!(x > 0)) throw GfiError(ErrKind::DomainError, "logarithm of a non-positive value");
    return std::log(x);
}
inline BigFloat s_ln(const BigFloat& x) { return BigFloat::ln(x, MPFR_RNDN); }
template <class T>
Interval<T> s_ln(const Interval<T>& x) { return interval_ln(x); }
inline Rational s_ln(const Rational&) {
    throw GfiError(ErrKind::UnsupportedOp, "ln is not available in rational arithmetic");
}

inline double s_sqrt(double x) {
    if (x < 0) throw GfiError(ErrKind::DomainError, "square root of a negative value");
    return std::sqrt(x);
}
inline BigFloat s_sqrt(const BigFloat& x) { return BigFloat::sqrt(x, MPFR_RNDN); }
template <class T>
Interval<T> s_sqrt(const Interval<T>& x) { return interval_sqrt(x); }
inline Rational s_sqrt(const Rational&) {
    throw GfiError(ErrKind::UnsupportedOp, "sqrt is not available in rational arithmetic");
}

// x^e with natural e, by repeated squaring. Defined for every kernel.
template <class S>
S s_pow_nat(const S& x, std::uint64_t e) {
    S result = s_one_like(x);
    S base = x;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

// x^e with rational e. Integer exponents work in every kernel; fractional
// exponents need exp/ln and are rejected in rational mode.
inline double s_pow_rat(double x, const Rational& e) {
    if (is_integer(e) && e >= 0) return s_pow_nat(x, to_uint64(e));
    return std::pow(x, rat_to_double(e));
}
inline BigFloat s_pow_rat(const BigFloat& x, const Rational& e) {
    if (is_integer(e) && e >= 0) return s_pow_nat(x, to_uint64(e));
    return BigFloat::pow(x, BigFloat(e, x.precision()), MPFR_RNDN);
}
inline Rational s_pow_rat(const Rational& x, const Rational& e) {
    if (!is_integer(e))
        throw GfiError(ErrKind::UnsupportedOp,
                       "fractional power is not available in rational arithmetic");
    if (e >= 0) return s_pow_nat(x, to_uint64(e));
    if (x == 0) throw GfiError(ErrKind::DivisionByZero, "zero to a negative power");
    Rational inv = 1 / x;
    Rational eneg = -e;
    return s_pow_nat(inv, to_uint64(eneg));
}
template <class T>
Interval<T> s_pow_rat(const Interval<T>& x, const Rational& e) {
    if (is_integer(e) && e >= 0) return s_pow_nat(x, to_uint64(e));
    if constexpr (std::is_same_v<T, double>) {
        return interval_pow(x, rat_to_double(e));
    } else {
        return interval_pow(x, BigFloat(e, BigFloat::join(x.lo, x.hi)));
    }
}

// Builds a scalar from an exact rational, inheriting the precision context of
// an existing value (used where no kernel instance is in reach).
inline double s_rat_like(double, const Rational& q) { return rat_to_double(q); }
inline Rational s_rat_like(const Rational&, const Rational& q) { return q; }
inline BigFloat s_rat_like(const BigFloat& like, const Rational& q) {
    return BigFloat(q, like.precision());
}
inline Interval<double> s_rat_like(const Interval<double>&, const Rational& q) {
    double d = rat_to_double(q);
    Rational back(d);
    if (back == q) return Interval<double>(d);
    if (back < q) return Interval<double>(d, RoundedOps<double>::up(d));
    return Interval<double>(RoundedOps<double>::down(d), d);
}
inline Interval<BigFloat> s_rat_like(const Interval<BigFloat>& like, const Rational& q) {
    mpfr_prec_t prec = BigFloat::join(like.lo, like.hi);
    return Interval<BigFloat>(BigFloat::of_rat(q, prec, MPFR_RNDD),
                              BigFloat::of_rat(q, prec, MPFR_RNDU));
}

// --- conversion and formatting ---

inline double s_to_double(double x) { return x; }
inline double s_to_double(const Rational& x) { return rat_to_double(x); }
inline double s_to_double(const BigFloat& x) { return x.to_double(); }
template <class T>
double s_to_double(const Interval<T>& x) {
    return 0.5 * (s_to_double(x.lo) + s_to_double(x.hi));
}

inline std::string s_format(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
inline std::string s_format(const Rational& x) { return rational_to_string(x); }
inline std::string s_format(const BigFloat& x) { return x.str(); }
template <class T>
std::string s_format(const Interval<T>& x) {
    return "[" + s_format(x.lo) + ", " + s_format(x.hi) + "]";
}

// Machine epsilon scale used for the negative-mass clamp.
inline double s_eps(double) { return std::numeric_limits<double>::epsilon(); }
inline double s_eps(const Rational&) { return 0.0; }
inline double s_eps(const BigFloat& x) { return std::ldexp(1.0, 1 - (int)x.precision()); }
template <class T>
double s_eps(const Interval<T>& x) { return s_eps(x.lo); }

// ---------------------------------------------------------------------------
// Kernels: factories that build leaf scalars for a chosen arithmetic.
// ---------------------------------------------------------------------------

struct F64Kernel {
    using Scalar = double;
    static constexpr bool is_interval = false;
    std::string name() const { return "float64"; }
    Scalar rat(const Rational& q) const { return rat_to_double(q); }
    Scalar integer(long n) const { return (double)n; }
};

struct RationalKernel {
    using Scalar = Rational;
    static constexpr bool is_interval = false;
    std::string name() const { return "rational"; }
    Scalar rat(const Rational& q) const { return q; }
    Scalar integer(long n) const { return Rational(n); }
};

struct BigFloatKernel {
    mpfr_prec_t prec = 256;
    using Scalar = BigFloat;
    static constexpr bool is_interval = false;
    std::string name() const { return "bigfloat" + std::to_string(prec); }
    Scalar rat(const Rational& q) const { return BigFloat(q, prec); }
    Scalar integer(long n) const { return BigFloat(n, prec); }
};

template <class Inner>
struct IntervalKernel {
    Inner inner{};
    using Scalar = Interval<typename Inner::Scalar>;
    static constexpr bool is_interval = true;
    std::string name() const { return "interval-" + inner.name(); }
    Scalar rat(const Rational& q) const {
        if constexpr (std::is_same_v<Inner, F64Kernel>) {
            double d = rat_to_double(q);
            Rational back(d);
            if (back == q) return Scalar(d);
            if (back < q) return Scalar(d, RoundedOps<double>::up(d));
            return Scalar(RoundedOps<double>::down(d), d);
        } else {
            return Scalar(BigFloat::of_rat(q, inner.prec, MPFR_RNDD),
                          BigFloat::of_rat(q, inner.prec, MPFR_RNDU));
        }
    }
    Scalar integer(long n) const {
        if constexpr (std::is_same_v<Inner, F64Kernel>) return Scalar((double)n);
        else return Scalar(BigFloat(n, inner.prec));
    }
};

using IntervalF64Kernel = IntervalKernel<F64Kernel>;
using IntervalBigFloatKernel = IntervalKernel<BigFloatKernel>;

}  // namespace gfi
