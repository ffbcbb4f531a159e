#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gfi/bigfloat.hpp"
#include "gfi/error.hpp"

namespace gfi {

// Directed-rounding primitives. The double instantiation nudges results to
// the next representable value instead of switching the FPU rounding mode;
// enclosures stay sound, just one ulp looser. MPFR rounds natively.
template <class T>
struct RoundedOps;

template <>
struct RoundedOps<double> {
    static double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
    static double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
    static double add_down(double a, double b) { return down(a + b); }
    static double add_up(double a, double b) { return up(a + b); }
    static double sub_down(double a, double b) { return down(a - b); }
    static double sub_up(double a, double b) { return up(a - b); }
    static double mul_down(double a, double b) { return down(a * b); }
    static double mul_up(double a, double b) { return up(a * b); }
    static double div_down(double a, double b) { return down(a / b); }
    static double div_up(double a, double b) { return up(a / b); }
    // libm transcendentals are faithful to ~1 ulp; two steps cover that.
    static double exp_down(double a) { return down(down(std::exp(a))); }
    static double exp_up(double a) { return up(up(std::exp(a))); }
    static double ln_down(double a) { return down(down(std::log(a))); }
    static double ln_up(double a) { return up(up(std::log(a))); }
    static double sqrt_down(double a) { return down(std::sqrt(a)); }
    static double sqrt_up(double a) { return up(std::sqrt(a)); }
    static double pow_down(double a, double e) { return down(down(std::pow(a, e))); }
    static double pow_up(double a, double e) { return up(up(std::pow(a, e))); }
    static double mul_si_down(double a, long n) { return down(a * (double)n); }
    static double mul_si_up(double a, long n) { return up(a * (double)n); }
    static double div_si_down(double a, long n) { return down(a / (double)n); }
    static double div_si_up(double a, long n) { return up(a / (double)n); }
};

template <>
struct RoundedOps<BigFloat> {
    static BigFloat add_down(const BigFloat& a, const BigFloat& b) { return BigFloat::add(a, b, MPFR_RNDD); }
    static BigFloat add_up(const BigFloat& a, const BigFloat& b) { return BigFloat::add(a, b, MPFR_RNDU); }
    static BigFloat sub_down(const BigFloat& a, const BigFloat& b) { return BigFloat::sub(a, b, MPFR_RNDD); }
    static BigFloat sub_up(const BigFloat& a, const BigFloat& b) { return BigFloat::sub(a, b, MPFR_RNDU); }
    static BigFloat mul_down(const BigFloat& a, const BigFloat& b) { return BigFloat::mul(a, b, MPFR_RNDD); }
    static BigFloat mul_up(const BigFloat& a, const BigFloat& b) { return BigFloat::mul(a, b, MPFR_RNDU); }
    static BigFloat div_down(const BigFloat& a, const BigFloat& b) { return BigFloat::div(a, b, MPFR_RNDD); }
    static BigFloat div_up(const BigFloat& a, const BigFloat& b) { return BigFloat::div(a, b, MPFR_RNDU); }
    static BigFloat exp_down(const BigFloat& a) { return BigFloat::exp(a, MPFR_RNDD); }
    static BigFloat exp_up(const BigFloat& a) { return BigFloat::exp(a, MPFR_RNDU); }
    static BigFloat ln_down(const BigFloat& a) { return BigFloat::ln(a, MPFR_RNDD); }
    static BigFloat ln_up(const BigFloat& a) { return BigFloat::ln(a, MPFR_RNDU); }
    static BigFloat sqrt_down(const BigFloat& a) { return BigFloat::sqrt(a, MPFR_RNDD); }
    static BigFloat sqrt_up(const BigFloat& a) { return BigFloat::sqrt(a, MPFR_RNDU); }
    static BigFloat pow_down(const BigFloat& a, const BigFloat& e) { return BigFloat::pow(a, e, MPFR_RNDD); }
    static BigFloat pow_up(const BigFloat& a, const BigFloat& e) { return BigFloat::pow(a, e, MPFR_RNDU); }
    static BigFloat mul_si_down(const BigFloat& a, long n) { return BigFloat::mul_si(a, n, MPFR_RNDD); }
    static BigFloat mul_si_up(const BigFloat& a, long n) { return BigFloat::mul_si(a, n, MPFR_RNDU); }
    static BigFloat div_si_down(const BigFloat& a, long n) { return BigFloat::div_si(a, n, MPFR_RNDD); }
    static BigFloat div_si_up(const BigFloat& a, long n) { return BigFloat::div_si(a, n, MPFR_RNDU); }
};

// Enclosure scalar: the true real result of the computation lies in [lo, hi].
template <class T>
struct Interval {
    T lo{};
    T hi{};

    Interval() = default;
    Interval(T point) : lo(point), hi(point) {}
    Interval(T l, T h) : lo(std::move(l)), hi(std::move(h)) {}

    bool contains_zero() const { return !(lo > T(0)) && !(hi < T(0)); }
    bool is_point() const { return lo == hi; }

    friend Interval operator+(const Interval& a, const Interval& b) {
        return {RoundedOps<T>::add_down(a.lo, b.lo), RoundedOps<T>::add_up(a.hi, b.hi)};
    }
    friend Interval operator-(const Interval& a, const Interval& b) {
        return {RoundedOps<T>::sub_down(a.lo, b.hi), RoundedOps<T>::sub_up(a.hi, b.lo)};
    }
    friend Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
    friend Interval operator*(const Interval& a, const Interval& b) {
        using R = RoundedOps<T>;
        T d1 = R::mul_down(a.lo, b.lo), d2 = R::mul_down(a.lo, b.hi);
        T d3 = R::mul_down(a.hi, b.lo), d4 = R::mul_down(a.hi, b.hi);
        T u1 = R::mul_up(a.lo, b.lo), u2 = R::mul_up(a.lo, b.hi);
        T u3 = R::mul_up(a.hi, b.lo), u4 = R::mul_up(a.hi, b.hi);
        return {std::min(std::min(d1, d2), std::min(d3, d4)),
                std::max(std::max(u1, u2), std::max(u3, u4))};
    }
    friend Interval operator/(const Interval& a, const Interval& b) {
        if (b.contains_zero())
            throw GfiError(ErrKind::DivisionByZero, "interval divisor contains zero");
        using R = RoundedOps<T>;
        T d1 = R::div_down(a.lo, b.lo), d2 = R::div_down(a.lo, b.hi);
        T d3 = R::div_down(a.hi, b.lo), d4 = R::div_down(a.hi, b.hi);
        T u1 = R::div_up(a.lo, b.lo), u2 = R::div_up(a.lo, b.hi);
        T u3 = R::div_up(a.hi, b.lo), u4 = R::div_up(a.hi, b.hi);
        return {std::min(std::min(d1, d2), std::min(d3, d4)),
                std::max(std::max(u1, u2), std::max(u3, u4))};
    }
    Interval& operator+=(const Interval& b) { return *this = *this + b; }
    Interval& operator-=(const Interval& b) { return *this = *this - b; }
    Interval& operator*=(const Interval& b) { return *this = *this * b; }
    Interval& operator/=(const Interval& b) { return *this = *this / b; }

    friend bool operator==(const Interval& a, const Interval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
    friend bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }
};

template <class T>
Interval<T> interval_exp(const Interval<T>& a) {
    return {RoundedOps<T>::exp_down(a.lo), RoundedOps<T>::exp_up(a.hi)};
}

template <class T>
Interval<T> interval_ln(const Interval<T>& a) {
    if (!(a.lo > T(0)))
        throw GfiError(ErrKind::DomainError, "logarithm of an interval reaching zero");
    return {RoundedOps<T>::ln_down(a.lo), RoundedOps<T>::ln_up(a.hi)};
}

template <class T>
Interval<T> interval_sqrt(const Interval<T>& a) {
    if (a.lo < T(0))
        throw GfiError(ErrKind::DomainError, "square root of a negative interval");
    return {RoundedOps<T>::sqrt_down(a.lo), RoundedOps<T>::sqrt_up(a.hi)};
}

// a^e for real e; requires a strictly positive base. x^e is monotone in x.
template <class T>
Interval<T> interval_pow(const Interval<T>& a, const T& e) {
    if (!(a.lo > T(0)))
        throw GfiError(ErrKind::DomainError, "real power of an interval reaching zero");
    T p1 = RoundedOps<T>::pow_down(a.lo, e), p2 = RoundedOps<T>::pow_down(a.hi, e);
    T q1 = RoundedOps<T>::pow_up(a.lo, e), q2 = RoundedOps<T>::pow_up(a.hi, e);
    return {std::min(p1, p2), std::max(q1, q2)};
}

template <class T>
Interval<T> interval_mul_si(const Interval<T>& a, long n) {
    T d1 = RoundedOps<T>::mul_si_down(a.lo, n), d2 = RoundedOps<T>::mul_si_down(a.hi, n);
    T u1 = RoundedOps<T>::mul_si_up(a.lo, n), u2 = RoundedOps<T>::mul_si_up(a.hi, n);
    return {std::min(d1, d2), std::max(u1, u2)};
}

template <class T>
Interval<T> interval_div_si(const Interval<T>& a, long n) {
    if (n == 0) throw GfiError(ErrKind::DivisionByZero, "interval division by zero");
    T d1 = RoundedOps<T>::div_si_down(a.lo, n), d2 = RoundedOps<T>::div_si_down(a.hi, n);
    T u1 = RoundedOps<T>::div_si_up(a.lo, n), u2 = RoundedOps<T>::div_si_up(a.hi, n);
    return {std::min(d1, d2), std::max(u1, u2)};
}

struct WidenReport {
    double midpoint = 0;
    double radius = 0;
    // Digits shared by every value in the interval; huge when exact.
    double significant_digits = 0;
    bool exact = false;
};

template <class T>
double interval_to_double(const T& x) {
    if constexpr (std::is_same_v<T, double>) return x;
    else return x.to_double();
}

template <class T>
WidenReport widen_report(const Interval<T>& v) {
    WidenReport r;
    if (v.lo == v.hi) {
        r.midpoint = interval_to_double(v.lo);
        r.exact = true;
        r.significant_digits = std::numeric_limits<double>::infinity();
        return r;
    }
    // Work in the carrier type: midpoint and radius can be far outside
    // double's range even when their ratio is representable.
    T two = T(2);
    T mid = (v.lo + v.hi) / two;
    T rad = (v.hi - v.lo) / two;
    r.midpoint = interval_to_double(mid);
    r.radius = interval_to_double(rad);
    T amid = mid < T(0) ? T(-mid) : mid;
    if (!(amid > T(0))) {
        r.significant_digits = 0;
        return r;
    }
    double rel = interval_to_double(rad / amid);
    r.significant_digits =
        rel > 0 ? std::floor(-std::log10(rel)) : std::numeric_limits<double>::infinity();
    if (r.significant_digits < 0) r.significant_digits = 0;
    return r;
}

}  // namespace gfi
