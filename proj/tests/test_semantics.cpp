#include <cmath>

#include "doctest.h"
#include "gfi/desugar.hpp"
#include "gfi/parser.hpp"
#include "gfi/summary.hpp"

using namespace gfi;

namespace {

struct Compiled {
    Program core;
    GfProgram gf;
};

Compiled compile(const std::string& src, bool naive = false, bool use_mgf = true) {
    Program core = desugar(parse(src), DesugarOptions{naive});
    validate(core);
    return Compiled{core, build_gf(core, use_mgf)};
}

const F64Kernel f64{};
const RationalKernel ratk{};

}  // namespace

TEST_CASE("degree budget") {
    Compiled ex1 = compile("X ~ Poisson(20); Y ~ Binomial(X, 0.1); observe Y = 2;");
    CHECK(degree_budget(ex1.core, 4, 0) == 6);

    Compiled no_obs = compile("X ~ Poisson(3);");
    CHECK(degree_budget(no_obs.core, 1, 0) == 1);

    Compiled mixed = compile("X ~ Poisson(3); observe 5 ~ Binomial(X, 0.5); if X < 3 { skip; }");
    CHECK(degree_budget(mixed.core, 2, 1) == 5 + 2 + 2);
}

TEST_CASE("single Poisson sample produces exp(20(x-1))") {
    Compiled c = compile("X ~ Poisson(20);");
    EvalRequest req{{Rational(1)}, 3};
    auto g = eval_program(c.gf, req, f64);
    CHECK(g.at({0}) == doctest::Approx(1.0));
    CHECK(g.at({1}) == doctest::Approx(20.0));
    CHECK(g.at({2}) == doctest::Approx(200.0));
    CHECK(g.at({3}) == doctest::Approx(4000.0 / 3.0));
}

TEST_CASE("compound binomial sampling reproduces the worked C(x,y)") {
    // After X ~ Poisson(20); Y ~ Binomial(X, 0.1):
    // C(x,y) = exp(2x(y+9) - 20); Taylor at (1,0) to order 3 from the paper's
    // worked example, all scaled by e^-2.
    Compiled c = compile("X ~ Poisson(20); Y ~ Binomial(X, 0.1);");
    EvalRequest req{{Rational(1), Rational(0)}, 3};
    auto g = eval_program(c.gf, req, f64);
    double e2 = std::exp(-2.0);
    CHECK(g.at({0, 0}) == doctest::Approx(e2));
    CHECK(g.at({0, 1}) == doctest::Approx(2 * e2));
    CHECK(g.at({0, 2}) == doctest::Approx(2 * e2));
    CHECK(g.at({0, 3}) == doctest::Approx(4.0 / 3.0 * e2));
    CHECK(g.at({1, 0}) == doctest::Approx(18 * e2));
    CHECK(g.at({1, 1}) == doctest::Approx(38 * e2));
    CHECK(g.at({1, 2}) == doctest::Approx(40 * e2));
    CHECK(g.at({2, 0}) == doctest::Approx(162 * e2));
    CHECK(g.at({2, 1}) == doctest::Approx(360 * e2));
    CHECK(g.at({3, 0}) == doctest::Approx(972 * e2));
}

TEST_CASE("worked example: evidence, posterior expansion, moments, masses") {
    Compiled c = compile("X ~ Poisson(20); Y ~ Binomial(X, 0.1); observe Y = 2;");

    // Taylor at the all-ones point: 2e^-2 * (1 + 20 (x-1) + 2 (y-1) + ...).
    EvalRequest req{{Rational(1), Rational(1)}, 1};
    auto g = eval_program(c.gf, req, f64);
    double evidence = 2 * std::exp(-2.0);
    CHECK(g.at({0, 0}) == doctest::Approx(evidence).epsilon(1e-12));
    CHECK(g.at({1, 0}) / g.at({0, 0}) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(g.at({0, 1}) / g.at({0, 0}) == doctest::Approx(2.0).epsilon(1e-12));

    auto ms = moments(c.gf, 0, f64);
    CHECK(s_to_double(ms.evidence) == doctest::Approx(evidence).epsilon(1e-12));
    CHECK(s_to_double(ms.mean) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(s_to_double(ms.variance) == doctest::Approx(18.0).epsilon(1e-9));
    REQUIRE(ms.skewness.has_value());
    CHECK(s_to_double(*ms.skewness) == doctest::Approx(1.0 / std::sqrt(18.0)).epsilon(1e-9));
    REQUIRE(ms.kurtosis.has_value());
    CHECK(s_to_double(*ms.kurtosis) == doctest::Approx(3.0 + 1.0 / 18.0).epsilon(1e-9));

    CHECK(mass_cutoff(ms) == 43);

    auto mt = masses(c.gf, 0, ms.evidence, 43, f64);
    CHECK(s_to_double(mt.masses[0]) == doctest::Approx(0.0));
    CHECK(s_to_double(mt.masses[1]) == doctest::Approx(0.0));
    CHECK(s_to_double(mt.masses[2]) == doctest::Approx(std::exp(-18.0)).epsilon(1e-12));
    double p10 = std::pow(18.0, 8) / 40320.0 * std::exp(-18.0);
    CHECK(s_to_double(mt.masses[10]) == doctest::Approx(p10).epsilon(1e-9));
    CHECK(p10 == doctest::Approx(4.1631e-3).epsilon(1e-4));

    // Rational arithmetic cannot express e^{20(x-1)}.
    CHECK_THROWS_AS(moments(c.gf, 0, ratk), GfiError);
}

TEST_CASE("empty program evaluates to the constant 1") {
    Compiled c = compile("");
    EvalRequest req{{}, 2};
    auto g = eval_program(c.gf, req, f64);
    CHECK(g.coeffs()[0] == doctest::Approx(1.0));
}

TEST_CASE("affine assignment relocates masses to 2x + 3y + 5") {
    Compiled c = compile("X ~ Bernoulli(0.5); Y ~ Bernoulli(0.5); X := 2*X + 3*Y + 5;");
    auto ms = moments(c.gf, 0, ratk);
    CHECK(ms.evidence == Rational(1));
    auto mt = masses(c.gf, 0, ms.evidence, 10, ratk);
    CHECK(mt.masses[5] == Rational(1, 4));
    CHECK(mt.masses[7] == Rational(1, 4));
    CHECK(mt.masses[8] == Rational(1, 4));
    CHECK(mt.masses[10] == Rational(1, 4));
    CHECK(mt.masses[0] == Rational(0));
    CHECK(mt.masses[6] == Rational(0));
    CHECK(mt.masses[9] == Rational(0));
}

TEST_CASE("events: full support, empty set, complement") {
    Compiled full = compile("X ~ Binomial(3, 0.5); observe X <= 3;");
    auto ms1 = moments(full.gf, 0, ratk);
    CHECK(ms1.evidence == Rational(1));
    CHECK(ms1.mean == Rational(3, 2));

    Compiled empty = compile("X ~ Binomial(3, 0.5); observe X in {};");
    CHECK_THROWS_AS(moments(empty.gf, 0, ratk), GfiError);

    Compiled comp = compile("X ~ UniformDisc(0, 3); observe X > 1;");
    auto ms2 = moments(comp.gf, 0, ratk);
    CHECK(ms2.evidence == Rational(1, 2));
    auto mt = masses(comp.gf, 0, ms2.evidence, 3, ratk);
    CHECK(mt.masses[0] == Rational(0));
    CHECK(mt.masses[1] == Rational(0));
    CHECK(mt.masses[2] == Rational(1, 2));
    CHECK(mt.masses[3] == Rational(1, 2));
}

TEST_CASE("optimized compound binomial observation matches the sliced path") {
    Compiled opt = compile("X ~ Poisson(20); observe 2 ~ Binomial(X, 0.1);");
    Compiled sliced = compile("X ~ Poisson(20); Y ~ Binomial(X, 0.1); observe Y = 2;");
    auto mo = moments(opt.gf, 0, f64);
    auto msl = moments(sliced.gf, 0, f64);
    CHECK(s_to_double(mo.evidence) ==
          doctest::Approx(s_to_double(msl.evidence)).epsilon(1e-12));
    CHECK(s_to_double(mo.mean) == doctest::Approx(20.0).epsilon(1e-12));
    auto t1 = masses(opt.gf, 0, mo.evidence, 30, f64);
    auto t2 = masses(sliced.gf, 0, msl.evidence, 30, f64);
    for (int k = 0; k <= 30; ++k)
        CHECK(s_to_double(t1.masses[k]) ==
              doctest::Approx(s_to_double(t2.masses[k])).epsilon(1e-9));
}

TEST_CASE("optimized compound poisson observation matches a truncated series") {
    // Prior X ~ Poisson(2), observe 3 ~ Poisson(0.5 X).
    Compiled c = compile("X ~ Poisson(2); observe 3 ~ Poisson(0.5*X);");
    auto ms = moments(c.gf, 0, f64);
    double mu = 2.0, lam = 0.5;
    int d = 3;
    double evidence = 0, mean_num = 0;
    std::vector<double> post(61, 0.0);
    for (int n = 0; n <= 200; ++n) {
        double prior = std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1));
        double like = std::exp(-lam * n) * std::pow(lam * n, d) / 6.0;
        double w = prior * like;
        evidence += w;
        mean_num += n * w;
        if (n <= 60) post[n] = w;
    }
    CHECK(s_to_double(ms.evidence) == doctest::Approx(evidence).epsilon(1e-9));
    CHECK(s_to_double(ms.mean) == doctest::Approx(mean_num / evidence).epsilon(1e-9));
    auto mt = masses(c.gf, 0, ms.evidence, 20, f64);
    for (int k = 0; k <= 20; ++k)
        CHECK(s_to_double(mt.masses[k]) ==
              doctest::Approx(post[k] / evidence).epsilon(1e-9));
}

TEST_CASE("optimized poisson observation with a zero observation") {
    // d = 0: G(x[k -> e^-lambda x_k]) only.
    Compiled c = compile("X ~ Poisson(2); observe 0 ~ Poisson(1*X);");
    auto ms = moments(c.gf, 0, f64);
    // evidence = E[e^-X] = exp(2(e^-1 - 1))
    CHECK(s_to_double(ms.evidence) ==
          doctest::Approx(std::exp(2 * (std::exp(-1.0) - 1))).epsilon(1e-12));
}

TEST_CASE("optimized negbinomial observation: d = 0 and d = 1 unrolls") {
    // d=0: G(x[k -> p x_k]) (L_{0,0} = 1).
    Compiled c0 = compile("X ~ Geometric(0.5); observe 0 ~ NegBinomial(X, 0.5);");
    auto e0 = moments(c0.gf, 0, ratk);
    // E[p^X] for X ~ Geom(1/2), p = 1/2: sum (1/2)^{k+1} (1/2)^k = 2/3.
    CHECK(e0.evidence == Rational(2, 3));

    // d=1: (1-p) p x_k d_k G at p x_k.
    Compiled c1 = compile("X ~ Geometric(0.5); observe 1 ~ NegBinomial(X, 0.5);");
    auto e1 = moments(c1.gf, 0, ratk);
    // E[X p^X] (1-p) = (1/2) sum k (1/2)^k (1/2)^{k+1} = ... = 2/9 * 1/2 * ... computed below
    // sum_{k>=0} k (1/4)^k = (1/4)/(9/16) = 4/9; times (1/2)*(1/2) = 1/9.
    CHECK(e1.evidence == Rational(1, 9));
}

TEST_CASE("lah numbers") {
    auto row0 = GfEvaluator<F64Kernel>::lah_numbers(0);
    CHECK(row0[0] == 1);
    auto row2 = GfEvaluator<F64Kernel>::lah_numbers(2);
    CHECK(row2[1] == 2);
    auto row3 = GfEvaluator<F64Kernel>::lah_numbers(3);
    CHECK(row3[2] == 6);
    // Closed form L_{d,i} = C(d-1, i-1) d!/i!.
    for (std::uint64_t d = 1; d <= 8; ++d) {
        auto row = GfEvaluator<F64Kernel>::lah_numbers(d);
        for (std::uint64_t i = 1; i <= d; ++i) {
            BigInt expect = binomial_big(d - 1, i - 1) * factorial_big(d) / factorial_big(i);
            CHECK(row[i] == expect);
        }
        CHECK(row[0] == 0);
    }
}

TEST_CASE("bernoulli observation: d >= 2 kills all mass, Dirac(1) keeps it") {
    Compiled dead = compile("X ~ Bernoulli(0.5); observe 2 ~ Bernoulli(X);");
    CHECK_THROWS_AS(moments(dead.gf, 0, ratk), GfiError);

    Compiled keep = compile("X ~ Dirac(1); observe 1 ~ Bernoulli(X);");
    auto ms = moments(keep.gf, 0, ratk);
    CHECK(ms.evidence == Rational(1));
    CHECK(ms.mean == Rational(1));
}

TEST_CASE("branch additivity: if with identical branches is a no-op") {
    Compiled plain = compile("X ~ Binomial(3, 0.5);");
    Compiled branched = compile("X ~ Binomial(3, 0.5); if X in {1, 2} { skip; } else { skip; }");
    auto m1 = moments(plain.gf, 0, ratk);
    auto m2 = moments(branched.gf, 0, ratk);
    CHECK(m1.evidence == m2.evidence);
    auto t1 = masses(plain.gf, 0, m1.evidence, 3, ratk);
    auto t2 = masses(branched.gf, 0, m2.evidence, 3, ratk);
    for (int k = 0; k <= 3; ++k) CHECK(t1.masses[k] == t2.masses[k]);
}

TEST_CASE("memoization transparency") {
    std::string src =
        "X ~ Binomial(4, 0.5);"
        "if X in {0, 1} { Y ~ Bernoulli(0.25); } else { Y ~ Bernoulli(0.75); }"
        "observe 1 ~ Binomial(Y, 0.5);"
        "Z := X + 2*Y;";
    Compiled c = compile(src);
    EvalOptions with_memo{true, 200000};
    EvalOptions no_memo{false, 200000};
    auto m1 = moments(c.gf, 2, ratk, nullptr, with_memo);
    auto m2 = moments(c.gf, 2, ratk, nullptr, no_memo);
    CHECK(m1.evidence == m2.evidence);
    CHECK(m1.mean == m2.mean);
    CHECK(m1.variance == m2.variance);
    auto t1 = masses(c.gf, 2, m1.evidence, 8, ratk, with_memo);
    auto t2 = masses(c.gf, 2, m2.evidence, 8, ratk, no_memo);
    for (int k = 0; k <= 8; ++k) CHECK(t1.masses[k] == t2.masses[k]);
}

TEST_CASE("mass conservation without observations") {
    Compiled c = compile(
        "X ~ Binomial(5, 0.3); Y ~ NegBinomial(X, 0.5); Z := Y + 2*X;"
        "if Z in {0,1,2} { W ~ Bernoulli(0.5); } else { W ~ Bernoulli(0.25); }");
    auto ms = moments(c.gf, 3, ratk);
    CHECK(ms.evidence == Rational(1));
}

TEST_CASE("dirac posterior reports undefined skewness and kurtosis") {
    Compiled c = compile("X ~ Dirac(3);");
    auto ms = moments(c.gf, 0, ratk);
    CHECK(ms.mean == Rational(3));
    CHECK(ms.variance == Rational(0));
    CHECK(!ms.skewness.has_value());
    CHECK(!ms.kurtosis.has_value());
    auto mt = masses(c.gf, 0, ms.evidence, 3, ratk);
    CHECK(mt.masses[3] == Rational(1));
    CHECK(mass_cutoff(ms) == 3);
}

TEST_CASE("masses are unavailable for continuous queries") {
    Compiled c = compile("L ~ Exponential(1);");
    auto ms = moments(c.gf, 0, f64);
    CHECK(s_to_double(ms.mean) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s_to_double(ms.variance) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(masses(c.gf, 0, ms.evidence, 5, f64), GfiError);
}

TEST_CASE("exponential and gamma priors have textbook moments via the MGF form") {
    Compiled exp2 = compile("L ~ Exponential(2);");
    auto m1 = moments(exp2.gf, 0, f64);
    CHECK(s_to_double(m1.mean) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s_to_double(m1.variance) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(s_to_double(*m1.skewness) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s_to_double(*m1.kurtosis) == doctest::Approx(9.0).epsilon(1e-9));

    Compiled gam = compile("G ~ Gamma(2.5, 2);");
    auto m2 = moments(gam.gf, 0, f64);
    CHECK(s_to_double(m2.mean) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(s_to_double(m2.variance) == doctest::Approx(0.625).epsilon(1e-9));

    Compiled uni = compile("U ~ UniformCont(0.5, 2.5);");
    auto m3 = moments(uni.gf, 0, f64);
    CHECK(s_to_double(m3.mean) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(s_to_double(m3.variance) == doctest::Approx(4.0 / 12.0).epsilon(1e-9));
}

TEST_CASE("exponential prior with poisson observations stays exact in rational mode") {
    // The MGF form of Exponential(1) is rational; compound Poisson
    // observations shift t by a rational amount.
    Compiled c = compile("L ~ Exponential(1); observe 2 ~ Poisson(1*L);");
    auto ms = moments(c.gf, 0, ratk);
    // posterior of L: Gamma(3, 2); evidence = integral e^-l l^2/2 e^-l dl = 1/8.
    CHECK(ms.evidence == Rational(1, 8));
    CHECK(ms.mean == Rational(3, 2));
    CHECK(ms.variance == Rational(3, 4));
}

TEST_CASE("continuous affine combinations via the MGF representation") {
    // Sum of two independent exponentials, scaled: E[2A + 3B] = 5, Var = 13.
    Compiled c = compile("A ~ Exponential(1); B ~ Exponential(1); C := 2*A + 3*B;");
    auto ms = moments(c.gf, 2, f64);
    CHECK(s_to_double(ms.evidence) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s_to_double(ms.mean) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(s_to_double(ms.variance) == doctest::Approx(13.0).epsilon(1e-9));
}

TEST_CASE("mixed discrete-continuous affine turns the target continuous") {
    // X discrete + L continuous: D := X + L has mean 1.5 + 1 = 2.5.
    Compiled c = compile("X ~ Binomial(3, 0.5); L ~ Exponential(1); D := X + L;");
    auto ms = moments(c.gf, 2, f64);
    CHECK(s_to_double(ms.mean) == doctest::Approx(2.5).epsilon(1e-9));
    // Var(X) + Var(L) = 0.75 + 1.
    CHECK(s_to_double(ms.variance) == doctest::Approx(1.75).epsilon(1e-9));
}

TEST_CASE("representation adapter: branches that disagree on support") {
    // L is discrete in one branch and continuous in the other.
    Compiled c = compile(
        "Z ~ Bernoulli(0.5);"
        "if Z = 1 { L ~ Exponential(1); } else { L ~ Dirac(2); }");
    auto ms = moments(c.gf, 1, f64);
    CHECK(s_to_double(ms.evidence) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s_to_double(ms.mean) == doctest::Approx(0.5 * 1 + 0.5 * 2).epsilon(1e-9));
    // E[L^2] = 0.5 * 2 + 0.5 * 4 = 3; Var = 3 - 2.25.
    CHECK(s_to_double(ms.variance) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("sampling bernoulli from a continuous parameter") {
    // U ~ UniformCont(0,1); Z ~ Bernoulli(U): P[Z=1] = E[U] = 1/2.
    Compiled c = compile("U ~ UniformCont(0, 1); Z ~ Bernoulli(U);");
    auto ms = moments(c.gf, 1, f64);
    CHECK(s_to_double(ms.evidence) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s_to_double(ms.mean) == doctest::Approx(0.5).epsilon(1e-9));
    auto mt = masses(c.gf, 1, ms.evidence, 1, f64);
    CHECK(s_to_double(mt.masses[0]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(s_to_double(mt.masses[1]) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("self-compound thinning keeps the degree-1 fast path") {
    Compiled c = compile("N ~ Poisson(10); N ~ Binomial(N, 0.25);");
    auto& ctr = TaylorCounters::global();
    ctr.reset();
    auto ms = moments(c.gf, 0, f64);
    CHECK(s_to_double(ms.mean) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(s_to_double(ms.variance) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(ctr.subst_fastpath_calls > 0);
    CHECK(ctr.subst_fastpath_calls == ctr.subst_calls);
}
