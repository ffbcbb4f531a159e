#include <random>

#include "doctest.h"
#include "gfi/kernels.hpp"

using namespace gfi;

TEST_CASE("rational parsing and printing") {
    CHECK(parse_rational("0.1") == Rational(1, 10));
    CHECK(parse_rational("12") == Rational(12));
    CHECK(parse_rational("0.2636") == Rational(659, 2500));
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(rational_to_string(Rational(1, 10)) == "0.1");
    CHECK(rational_to_string(Rational(12)) == "12");
    CHECK(rational_to_string(Rational(1, 3)) == "1/3");
    CHECK(rational_to_string(Rational(45, 8)) == "5.625");
    CHECK(parse_rational(rational_to_string(Rational(2636, 10000))) == Rational(659, 2500));
}

TEST_CASE("rational field ops are exact") {
    RationalKernel k;
    CHECK(k.rat(parse_rational("0.1")) + k.rat(parse_rational("0.2")) == Rational(3, 10));
    CHECK_THROWS_AS(s_exp(Rational(1)), GfiError);
    CHECK_THROWS_AS(s_ln(Rational(1)), GfiError);
    CHECK(s_pow_rat(Rational(2, 3), Rational(3)) == Rational(8, 27));
    CHECK(s_pow_rat(Rational(2, 3), Rational(-2)) == Rational(9, 4));
    CHECK_THROWS_AS(s_pow_rat(Rational(2), Rational(1, 2)), GfiError);
}

TEST_CASE("bigfloat basic arithmetic and precision propagation") {
    BigFloatKernel k{256};
    BigFloat a = k.rat(Rational(1, 3));
    BigFloat b = k.rat(Rational(1, 6));
    BigFloat c = a + b;
    CHECK(c.precision() == 256);
    CHECK(std::abs(c.to_double() - 0.5) < 1e-15);
    BigFloat e = s_exp(k.integer(1));
    CHECK(std::abs(e.to_double() - 2.718281828459045) < 1e-14);
}

TEST_CASE("interval ops produce enclosures") {
    IntervalF64Kernel k;
    auto one = k.integer(1);
    auto e = s_exp(one);
    CHECK(e.lo <= 2.718281828459045);
    CHECK(e.hi >= 2.718281828459045);
    CHECK(e.hi - e.lo < 1e-13);

    auto third = k.rat(Rational(1, 3));
    CHECK(third.lo < third.hi);
    CHECK(third.lo <= 1.0 / 3.0);
    CHECK(third.hi >= 1.0 / 3.0);

    auto q = k.rat(Rational(1, 4));
    CHECK(q.lo == q.hi);  // exactly representable

    CHECK_THROWS_AS(one / (one - one), GfiError);
}

TEST_CASE("interval enclosure under random straight-line programs") {
    std::mt19937_64 rng(7);
    IntervalF64Kernel ik;
    for (int trial = 0; trial < 200; ++trial) {
        Rational exact = Rational(1);
        Interval<double> box = ik.integer(1);
        for (int step = 0; step < 12; ++step) {
            long num = (long)(rng() % 19) - 9;
            long den = (long)(rng() % 9) + 1;
            Rational r(num, den);
            r.canonicalize();
            switch (rng() % 3) {
                case 0:
                    exact += r;
                    box += ik.rat(r);
                    break;
                case 1:
                    exact -= r;
                    box -= ik.rat(r);
                    break;
                default:
                    exact *= r;
                    box *= ik.rat(r);
                    break;
            }
        }
        double v = rat_to_double(exact);
        CHECK(box.lo <= v);
        CHECK(box.hi >= v);
    }
}

TEST_CASE("widen_report significant digits") {
    Interval<double> tight(0.9999999, 1.0000001);
    auto r1 = widen_report(tight);
    CHECK(r1.significant_digits >= 6);
    CHECK(r1.significant_digits <= 7);

    Interval<double> exact(2.0, 2.0);
    auto r2 = widen_report(exact);
    CHECK(r2.exact);

    Interval<double> wide(-1.0, 1.0);
    auto r3 = widen_report(wide);
    CHECK(r3.significant_digits == 0);
    CHECK(r3.radius == doctest::Approx(1.0));
}

TEST_CASE("bigfloat doubling precision never widens an interval") {
    for (mpfr_prec_t p : {64, 128, 256}) {
        IntervalBigFloatKernel k1{BigFloatKernel{p}};
        IntervalBigFloatKernel k2{BigFloatKernel{2 * p}};
        auto run = [](auto& k) {
            auto x = k.rat(Rational(1, 3));
            auto y = s_exp(x) * k.rat(Rational(7, 5)) - k.integer(2);
            for (int i = 0; i < 20; ++i) y = y * k.rat(Rational(9, 10)) + k.rat(Rational(1, 7));
            return y;
        };
        auto w1 = widen_report(run(k1));
        auto w2 = widen_report(run(k2));
        CHECK(w2.radius <= w1.radius);
    }
}
