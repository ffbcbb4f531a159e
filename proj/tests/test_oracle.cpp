#include <cmath>

#include "doctest.h"
#include "gen_programs.hpp"
#include "gfi/desugar.hpp"
#include "gfi/oracle.hpp"
#include "gfi/parser.hpp"
#include "gfi/summary.hpp"

using namespace gfi;

namespace {
const F64Kernel f64{};
const RationalKernel ratk{};
}  // namespace

TEST_CASE("enumerate: coin conditioning") {
    Program p = desugar(parse("X ~ Bernoulli(0.5); observe X = 1;"));
    auto mf = enumerate_program(p, 0, ratk);
    CHECK(mf.total == Rational(1, 2));
    auto marg = mf.normalized_marginal(0);
    CHECK(marg.at(1) == Rational(1));
}

TEST_CASE("enumerate: two-coin symmetry") {
    Program p = desugar(
        parse("X ~ Bernoulli(0.5); Y ~ Bernoulli(0.5); Z := X + Y; observe Z = 1;"));
    auto mf = enumerate_program(p, 0, ratk);
    CHECK(mf.total == Rational(1, 2));
    auto marg = mf.normalized_marginal(0);
    CHECK(marg.at(0) == Rational(1, 2));
    CHECK(marg.at(1) == Rational(1, 2));
}

TEST_CASE("enumerate: no observation means evidence exactly 1") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 10; ++i) {
        testgen::GenOptions opt;
        opt.allow_fail = false;
        Program p = testgen::random_finite_program(rng, opt);
        // Strip observations for this property.
        Program clean;
        clean.vars = p.vars;
        std::vector<StmtPtr> keep;
        walk_statements(p.body, [&](const Statement& s) {
            if (s.kind == Statement::Kind::Sample || s.kind == Statement::Kind::Affine) {
                keep.push_back(make_stmt(s));
            }
        });
        if (keep.empty()) continue;
        clean.body = stmt_seq(std::move(keep));
        auto mf = enumerate_program(clean, 0, ratk);
        CHECK(mf.total == Rational(1));
    }
}

TEST_CASE("enumerate agrees with the GF engine on the introductory example") {
    Program p = desugar(parse("X ~ Poisson(20); Y ~ Binomial(X, 0.1); observe Y = 2;"));
    validate(p);
    OracleOptions opt;
    opt.truncate_at = 200;
    auto mf = enumerate_program(p, 0, f64, opt);
    CHECK(s_to_double(mf.total) == doctest::Approx(2 * std::exp(-2.0)).epsilon(1e-9));

    auto gf = build_gf(p);
    auto ms = moments(gf, 0, f64);
    CHECK(s_to_double(ms.evidence) == doctest::Approx(s_to_double(mf.total)).epsilon(1e-9));

    double mean_or = 0;
    auto marg = mf.normalized_marginal(0);
    for (auto& [k, v] : marg) mean_or += (double)k * v;
    CHECK(mean_or == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(s_to_double(ms.mean) == doctest::Approx(mean_or).epsilon(1e-9));
}

TEST_CASE("oracle equivalence: random finite programs match exactly in rational mode") {
    std::mt19937_64 rng(2024);
    int zero_evidence = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Program p = testgen::random_finite_program(rng);
        CAPTURE(render(p));
        validate(p);
        int query = 0;
        auto mf = enumerate_program(p, query, ratk);
        auto gf = build_gf(p);
        if (mf.total == 0) {
            ++zero_evidence;
            CHECK_THROWS_AS(moments(gf, query, ratk), GfiError);
            continue;
        }
        auto ms = moments(gf, query, ratk);
        CHECK(ms.evidence == mf.total);
        std::uint64_t cutoff = mass_cutoff(ms);
        auto table = masses(gf, query, ms.evidence, cutoff, ratk);
        auto marg = mf.normalized_marginal(query);
        for (std::uint64_t k = 0; k <= cutoff; ++k) {
            Rational expect = marg.count(k) ? marg.at(k) : Rational(0);
            CHECK(table.masses[k] == expect);
        }
        // Everything beyond the cutoff is within the Markov bound.
        Rational tail(0);
        for (auto& [k, v] : marg)
            if (k > cutoff) tail += v;
        CHECK(tail <= Rational(1, 256));
    }
    CHECK(zero_evidence < 30);  // the generator keeps most programs satisfiable
}

TEST_CASE("desugar preserves the reference distribution") {
    const char* programs[] = {
        "X ~ Binomial(4, 0.5); X += X + 1; observe X >= 3;",
        "X ~ Bernoulli(0.5); if 1 ~ Bernoulli(0.25) { X := X + 1; } else { skip; }",
        "X ~ UniformDisc(0, 3); observe not (X < 1 or X > 2);",
        "X ~ Categorical(0.5, 0.25, 0.25); Y +~ Binomial(X, 0.5); observe Y != 0;",
        "X ~ Binomial(3, 0.25); observe 1 ~ Binomial(X, 0.5); Y := X;",
    };
    for (auto* text : programs) {
        CAPTURE(text);
        Program surface = parse(text);
        Program plain = desugar(surface);
        Program naive = desugar(surface, DesugarOptions{true});
        validate(plain);
        validate(naive);
        auto a = enumerate_program(plain, 0, ratk);
        auto b = enumerate_program(naive, 0, ratk);
        CHECK(a.total == b.total);
        if (a.total != 0) {
            auto ma = a.normalized_marginal(0);
            auto mb = b.normalized_marginal(0);
            CHECK(ma.size() == mb.size());
            for (auto& [k, v] : ma) CHECK(mb.at(k) == v);
        }
    }
}

TEST_CASE("truncation refinement converges monotonically") {
    Program p = desugar(parse("X ~ Geometric(0.25); observe X <= 4;"));
    double last = -1;
    double prev_gap = 1;
    for (std::uint64_t t : {8, 16, 32, 64}) {
        OracleOptions opt;
        opt.truncate_at = t;
        auto mf = enumerate_program(p, 0, f64, opt);
        double ev = s_to_double(mf.total);
        if (last >= 0) {
            CHECK(ev >= last - 1e-15);
            double gap = ev - last;
            CHECK(gap <= prev_gap + 1e-15);
            prev_gap = gap;
        }
        last = ev;
    }
    // The observation keeps only X <= 4, so the limit is the exact evidence.
    Rational exact(0);
    Rational q(3, 4);
    Rational term(1, 4);
    for (int k = 0; k <= 4; ++k) {
        exact += term;
        term *= q;
    }
    CHECK(last == doctest::Approx(rat_to_double(exact)).epsilon(1e-9));
}

TEST_CASE("simulate: deterministic programs and the CLT bound") {
    Program det = desugar(parse("X := 5;"));
    auto r1 = simulate(det, 0, 1000, 7);
    CHECK(r1.mean == doctest::Approx(5.0));
    CHECK(r1.variance == doctest::Approx(0.0));
    CHECK(r1.evidence == doctest::Approx(1.0));

    Program coin = desugar(parse("X ~ Bernoulli(0.5);"));
    std::uint64_t n = 1000000;
    auto r2 = simulate(coin, 0, n, 7);
    CHECK(std::abs(r2.mean - 0.5) <= 3 * 0.5 / std::sqrt((double)n));

    Program failing = desugar(parse("X ~ Bernoulli(0.5); observe X = 1; fail;"));
    auto r3 = simulate(failing, 0, 100, 7);
    CHECK(r3.effective_samples == 0);
}

TEST_CASE("simulate converges to enumerate in total variation") {
    std::mt19937_64 rng(55);
    int improved = 0, total = 0;
    for (int trial = 0; trial < 10; ++trial) {
        testgen::GenOptions opt;
        opt.allow_fail = false;
        opt.max_stmts = 8;
        Program p = testgen::random_finite_program(rng, opt);
        validate(p);
        auto exact = enumerate_program(p, 0, f64);
        if (s_to_double(exact.total) < 0.05) continue;
        auto marg = exact.normalized_marginal(0);
        double t_small = tvd(marg, simulate(p, 0, 1000, 13).masses);
        double t_large = tvd(marg, simulate(p, 0, 100000, 13).masses);
        ++total;
        if (t_large <= t_small + 1e-9) ++improved;
    }
    // Median behavior: more samples should not hurt (allow one unlucky case).
    CHECK(improved * 2 >= total);
}

TEST_CASE("total variation distance") {
    std::map<std::uint64_t, double> a{{0, 0.5}, {1, 0.5}};
    CHECK(tvd(a, a) == doctest::Approx(0.0));
    std::map<std::uint64_t, double> d0{{0, 1.0}};
    std::map<std::uint64_t, double> d1{{1, 1.0}};
    CHECK(tvd(d0, d1) == doctest::Approx(1.0));
    CHECK(tvd(a, d0) == doctest::Approx(0.5));
}
