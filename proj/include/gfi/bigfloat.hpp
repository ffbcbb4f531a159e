#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

#include "gfi/error.hpp"
#include "gfi/rational.hpp"

namespace gfi {

// Arbitrary-precision float backed by MPFR. Precision travels with the value:
// binary operations compute at the larger operand precision, so leaf values
// created at the configured precision propagate it through a computation.
class BigFloat {
public:
    BigFloat() { mpfr_init2(v_, 53); mpfr_set_zero(v_, 1); }

    explicit BigFloat(double d, mpfr_prec_t prec = 53) {
        mpfr_init2(v_, prec);
        mpfr_set_d(v_, d, MPFR_RNDN);
    }

    BigFloat(const Rational& q, mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN);
    }

    BigFloat(long n, mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        mpfr_set_si(v_, n, MPFR_RNDN);
    }

    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }

    BigFloat(BigFloat&& o) noexcept {
        mpfr_init2(v_, 53);
        mpfr_swap(v_, o.v_);
    }

    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }

    BigFloat& operator=(BigFloat&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }

    ~BigFloat() { mpfr_clear(v_); }

    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
    mpfr_srcptr raw() const { return v_; }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    std::string str() const {
        if (mpfr_zero_p(v_)) return "0";
        // Enough decimal digits to reproduce the binary value.
        long digits = (long)(precision() * 0.30103) + 3;
        char* s = nullptr;
        mpfr_asprintf(&s, "%.*Rg", (int)digits, v_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    bool is_nan() const { return mpfr_nan_p(v_) != 0; }

    static mpfr_prec_t join(const BigFloat& a, const BigFloat& b) {
        return a.precision() > b.precision() ? a.precision() : b.precision();
    }

    // Rounded binary ops; rnd selects the rounding direction (interval mode
    // uses RNDD/RNDU, plain bigfloat mode RNDN).
    static BigFloat add(const BigFloat& a, const BigFloat& b, mpfr_rnd_t rnd) {
        BigFloat r = make(join(a, b));
        mpfr_add(r.v_, a.v_, b.v_, rnd);
        return r;
    }
    static BigFloat sub(const BigFloat& a, const BigFloat& b, mpfr_rnd_t rnd) {
        BigFloat r = make(join(a, b));
        mpfr_sub(r.v_, a.v_, b.v_, rnd);
        return r;
    }
    static BigFloat mul(const BigFloat& a, const BigFloat& b, mpfr_rnd_t rnd) {
        BigFloat r = make(join(a, b));
        mpfr_mul(r.v_, a.v_, b.v_, rnd);
        return r;
    }
    static BigFloat div(const BigFloat& a, const BigFloat& b, mpfr_rnd_t rnd) {
        if (b.is_zero()) throw GfiError(ErrKind::DivisionByZero, "bigfloat division by zero");
        BigFloat r = make(join(a, b));
        mpfr_div(r.v_, a.v_, b.v_, rnd);
        return r;
    }
    static BigFloat mul_si(const BigFloat& a, long n, mpfr_rnd_t rnd) {
        BigFloat r = make(a.precision());
        mpfr_mul_si(r.v_, a.v_, n, rnd);
        return r;
    }
    static BigFloat div_si(const BigFloat& a, long n, mpfr_rnd_t rnd) {
        if (n == 0) throw GfiError(ErrKind::DivisionByZero, "bigfloat division by zero");
        BigFloat r = make(a.precision());
        mpfr_div_si(r.v_, a.v_, n, rnd);
        return r;
    }
    static BigFloat exp(const BigFloat& a, mpfr_rnd_t rnd) {
        BigFloat r = make(a.precision());
        mpfr_exp(r.v_, a.v_, rnd);
        return r;
    }
    static BigFloat ln(const BigFloat& a, mpfr_rnd_t rnd) {
        if (mpfr_sgn(a.v_) <= 0)
            throw GfiError(ErrKind::DomainError, "logarithm of a non-positive value");
        BigFloat r = make(a.precision());
        mpfr_log(r.v_, a.v_, rnd);
        return r;
    }
    static BigFloat sqrt(const BigFloat& a, mpfr_rnd_t rnd) {
        if (mpfr_sgn(a.v_) < 0)
            throw GfiError(ErrKind::DomainError, "square root of a negative value");
        BigFloat r = make(a.precision());
        mpfr_sqrt(r.v_, a.v_, rnd);
        return r;
    }
    static BigFloat pow(const BigFloat& a, const BigFloat& e, mpfr_rnd_t rnd) {
        BigFloat r = make(join(a, e));
        mpfr_pow(r.v_, a.v_, e.v_, rnd);
        return r;
    }
    static BigFloat of_rat(const Rational& q, mpfr_prec_t prec, mpfr_rnd_t rnd) {
        BigFloat r = make(prec);
        mpfr_set_q(r.v_, q.get_mpq_t(), rnd);
        return r;
    }
    static BigFloat neg(const BigFloat& a) {
        BigFloat r = make(a.precision());
        mpfr_neg(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    static BigFloat abs(const BigFloat& a) {
        BigFloat r = make(a.precision());
        mpfr_abs(r.v_, a.v_, MPFR_RNDN);
        return r;
    }

    friend BigFloat operator+(const BigFloat& a, const BigFloat& b) { return add(a, b, MPFR_RNDN); }
    friend BigFloat operator-(const BigFloat& a, const BigFloat& b) { return sub(a, b, MPFR_RNDN); }
    friend BigFloat operator*(const BigFloat& a, const BigFloat& b) { return mul(a, b, MPFR_RNDN); }
    friend BigFloat operator/(const BigFloat& a, const BigFloat& b) { return div(a, b, MPFR_RNDN); }
    friend BigFloat operator-(const BigFloat& a) { return neg(a); }
    BigFloat& operator+=(const BigFloat& b) { return *this = *this + b; }
    BigFloat& operator-=(const BigFloat& b) { return *this = *this - b; }
    BigFloat& operator*=(const BigFloat& b) { return *this = *this * b; }
    BigFloat& operator/=(const BigFloat& b) { return *this = *this / b; }

    friend bool operator==(const BigFloat& a, const BigFloat& b) {
        return mpfr_equal_p(a.v_, b.v_) != 0;
    }
    friend bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }
    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_); }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_); }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.v_, b.v_); }
    friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_greaterequal_p(a.v_, b.v_); }

private:
    static BigFloat make(mpfr_prec_t prec) {
        BigFloat r;
        mpfr_set_prec(r.v_, prec);
        mpfr_set_zero(r.v_, 1);
        return r;
    }

    mpfr_t v_;
};

}  // namespace gfi
