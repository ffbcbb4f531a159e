#include "doctest.h"
#include "gfi/desugar.hpp"
#include "gfi/parser.hpp"
#include "gfi/validate.hpp"

using namespace gfi;

TEST_CASE("parsing the introductory population program") {
    Program p = parse("X ~ Poisson(20); Y ~ Binomial(X, 0.1); observe Y = 2;");
    CHECK(p.vars == std::vector<std::string>{"X", "Y"});
    REQUIRE(p.body->kind == Statement::Kind::Seq);
    REQUIRE(p.body->seq.size() == 3);
    auto& s0 = *p.body->seq[0];
    CHECK(s0.kind == Statement::Kind::Sample);
    CHECK(std::get<Distribution>(*s0.dist).kind == DistKind::Poisson);
    CHECK(std::get<Distribution>(*s0.dist).params[0] == Rational(20));
    auto& s1 = *p.body->seq[1];
    auto& c1 = std::get<CompoundDistribution>(*s1.dist);
    CHECK(c1.kind == CompoundKind::Binomial);
    CHECK(c1.var == VarId{0});
    CHECK(c1.param == Rational(1, 10));
    CHECK(p.body->seq[2]->kind == Statement::Kind::ObserveCond);
}

TEST_CASE("empty input parses to the empty program") {
    Program p = parse("");
    CHECK(p.vars.empty());
    CHECK(p.body == nullptr);
    CHECK(render(p).empty());
}

TEST_CASE("affine statements collect coefficients") {
    Program p = parse("X := 2*X + 3*Y + 5;");
    auto& s = *p.body;
    CHECK(s.kind == Statement::Kind::Affine);
    CHECK(s.target == VarId{0});
    CHECK(s.coeffs.at(0) == Rational(2));
    CHECK(s.coeffs.at(1) == Rational(3));
    CHECK(s.constant == Rational(5));
}

TEST_CASE("parse errors carry a span inside the input") {
    std::string text = "X ~ Poisson(20)\nY ~ Poisson(1);";
    try {
        parse(text);
        FAIL("expected a parse error");
    } catch (const GfiError& e) {
        CHECK(e.kind() == ErrKind::Parse);
        REQUIRE(e.span().has_value());
        CHECK(e.span()->begin < text.size());
        CHECK(e.span()->line == 2);
    }
}

TEST_CASE("round-trips through render") {
    const char* programs[] = {
        "X ~ Poisson(20);\nY ~ Binomial(X, 0.1);\nobserve Y = 2;\n",
        "skip;\n",
        "fail;\n",
        "X := 2*X + 3*Y + 5;\n",
        "X += Y + 1;\n",
        "N +~ Poisson(51.4);\n",
        "if X in {1, 3, 7} {\n  Y ~ Bernoulli(0.5);\n} else {\n  fail;\n}\n",
        "if not X = 3 {\n  skip;\n}\n",
        "if X < 3 and Y >= 2 {\n  skip;\n} else {\n  Z ~ Dirac(1);\n}\n",
        "if (X = 1 or Y != 2) and Z <= 4 {\n  observe X in {0, 1};\n}\n",
        "if 1 ~ Bernoulli(0.5) {\n  observe 3 ~ Poisson(0.1*L);\n}\n",
        "T ~ UniformDisc(1, 111);\nL ~ Exponential(1);\nobserve 4 ~ Poisson(L);\n",
        "W ~ Gamma(0.5, 2);\nU ~ UniformCont(0, 0.5);\nZ ~ Bernoulli(U);\n",
        "C ~ Categorical(0.2, 0.5, 0.3);\nG ~ Geometric(0.25);\nR ~ NegBinomial(3, 0.5);\n",
        "observe not X in {3};\n",
        "observe X != 3;\n",
    };
    for (auto* text : programs) {
        CAPTURE(text);
        Program p1 = parse(text);
        std::string rendered = render(p1);
        Program p2 = parse(rendered);
        CHECK(program_equal(p1, p2));
        CHECK(render(p2) == rendered);
    }
}

TEST_CASE("comments and fractions") {
    Program p = parse("# prior\nX ~ Bernoulli(1/3); # one third\n");
    auto& d = std::get<Distribution>(*p.body->dist);
    CHECK(d.params[0] == Rational(1, 3));
    CHECK(render(p) == "X ~ Bernoulli(1/3);\n");
}

TEST_CASE("desugar: += bumps the target coefficient") {
    Program p = desugar(parse("X += 3*Y + 1;"));
    auto& s = *p.body;
    CHECK(s.kind == Statement::Kind::Affine);
    CHECK(s.coeffs.at(0) == Rational(1));
    CHECK(s.coeffs.at(1) == Rational(3));
    CHECK(s.constant == Rational(1));
}

TEST_CASE("desugar: negated condition swaps branches") {
    Program p = desugar(parse("if not X in {1} { fail; } else { skip; }"));
    auto& s = *p.body;
    REQUIRE(s.kind == Statement::Kind::IfEvent);
    CHECK(s.event.complement);
    CHECK(s.then_branch->kind == Statement::Kind::Fail);
    CHECK(s.else_branch->kind == Statement::Kind::Skip);
}

TEST_CASE("desugar: skip and core statements are untouched") {
    Program p = parse("skip;");
    Program d = desugar(p);
    CHECK(program_equal(p, d));
}

TEST_CASE("desugar keeps observe-from and event observes primitive by default") {
    Program d = desugar(parse("observe X in {3, 5};"));
    CHECK(d.body->kind == Statement::Kind::ObserveEvent);
    CHECK(d.body->event.values == std::vector<std::uint64_t>{3, 5});

    Program n = desugar(parse("observe X in {3, 5};"), DesugarOptions{true});
    REQUIRE(n.body->kind == Statement::Kind::IfEvent);
    CHECK(n.body->then_branch->kind == Statement::Kind::Skip);
    CHECK(n.body->else_branch->kind == Statement::Kind::Fail);

    Program c = desugar(parse("observe 2 ~ Binomial(X, 0.5);"));
    CHECK(c.body->kind == Statement::Kind::ObserveFrom);
    CHECK(c.vars.size() == 1);

    Program cn = desugar(parse("observe 2 ~ Binomial(X, 0.5);"), DesugarOptions{true});
    CHECK(cn.vars.size() == 2);  // scratch variable added
    REQUIRE(cn.body->kind == Statement::Kind::Seq);
    CHECK(cn.body->seq[0]->kind == Statement::Kind::Sample);
    REQUIRE(cn.body->seq[1]->kind == Statement::Kind::IfEvent);
    CHECK(cn.body->seq[1]->event.values == std::vector<std::uint64_t>{2});
    CHECK(cn.body->seq[1]->else_branch->kind == Statement::Kind::Fail);
}

TEST_CASE("desugar: comparisons become finite sets") {
    auto event_of = [](const char* text) {
        Program d = desugar(parse(text));
        REQUIRE(d.body->kind == Statement::Kind::ObserveEvent);
        return d.body->event;
    };
    Event lt = event_of("observe X < 3;");
    CHECK(lt.values == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(!lt.complement);
    Event le = event_of("observe X <= 3;");
    CHECK(le.values == std::vector<std::uint64_t>{0, 1, 2, 3});
    Event gt = event_of("observe X > 2;");
    CHECK(gt.values == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(gt.complement);
    Event ge = event_of("observe X >= 2;");
    CHECK(ge.values == std::vector<std::uint64_t>{0, 1});
    CHECK(ge.complement);
    Event ne = event_of("observe X != 1;");
    CHECK(ne.values == std::vector<std::uint64_t>{1});
    CHECK(ne.complement);
}

TEST_CASE("desugar: +~ and if-dist-test share one scratch variable") {
    Program p = parse(
        "N ~ Poisson(5);\n"
        "N +~ Poisson(3);\n"
        "if 1 ~ Bernoulli(0.5) { N +~ Poisson(2); }\n");
    Program d = desugar(p);
    CHECK(d.vars.size() == p.vars.size() + 1);
    CHECK(d.vars.back() == "_t");
}

TEST_CASE("desugar is idempotent") {
    const char* programs[] = {
        "X += 3*Y + 1;",
        "if not (X < 3 and Y in {1, 2}) { X +~ Poisson(1); } else { fail; }",
        "if 2 ~ Binomial(4, 0.5) { observe X >= 1; }",
        "observe 2 ~ Binomial(X, 0.5);",
    };
    for (auto* text : programs) {
        CAPTURE(text);
        Program d1 = desugar(parse(text));
        Program d2 = desugar(d1);
        CHECK(program_equal(d1, d2));
    }
}

TEST_CASE("validate classifies the population program as discrete") {
    Program p = desugar(parse("X ~ Poisson(20); Y ~ Binomial(X, 0.1); observe Y = 2;"));
    Validation v = validate(p);
    CHECK(v.support[0] == Support::DiscreteNat);
    CHECK(v.support[1] == Support::DiscreteNat);
    CHECK(v.warnings.empty());
}

TEST_CASE("validate rejects events on continuous variables") {
    Program p = desugar(parse("L ~ Exponential(1); observe L in {1};"));
    CHECK_THROWS_AS(validate(p), GfiError);
    try {
        validate(p);
    } catch (const GfiError& e) {
        CHECK(e.kind() == ErrKind::UnsupportedEvent);
    }
}

TEST_CASE("validate: switchpoint head mixes supports") {
    Program p = desugar(parse("T ~ UniformDisc(1, 111); L ~ Exponential(1); if T > 1 { skip; }"));
    Validation v = validate(p);
    CHECK(v.support[0] == Support::DiscreteNat);
    CHECK(v.support[1] == Support::ContinuousNonneg);
}

TEST_CASE("validate rejects continuous observations and compound counts") {
    CHECK_THROWS_AS(validate(desugar(parse("observe 1 ~ Exponential(1);"))), GfiError);
    CHECK_THROWS_AS(
        validate(desugar(parse("L ~ Exponential(1); observe 1 ~ Binomial(L, 0.5);"))), GfiError);
    CHECK_THROWS_AS(
        validate(desugar(parse("L ~ Gamma(1, 1); X ~ NegBinomial(L, 0.5);"))), GfiError);
    // Poisson and Bernoulli compounds accept continuous parameters.
    CHECK_NOTHROW(validate(desugar(parse("L ~ Exponential(1); observe 1 ~ Poisson(0.5*L);"))));
    CHECK_NOTHROW(validate(desugar(parse("U ~ UniformCont(0, 1); Z ~ Bernoulli(U);"))));
}

TEST_CASE("validate: Bernoulli compound warns when [0,1] is not provable") {
    Validation ok = validate(desugar(parse("U ~ UniformCont(0, 1); Z ~ Bernoulli(U);")));
    CHECK(ok.warnings.empty());
    Validation warn = validate(desugar(parse("U ~ Poisson(2); Z ~ Bernoulli(U);")));
    CHECK(warn.warnings.size() == 1);
}

TEST_CASE("validate: non-integer constants force continuous support") {
    Validation v1 = validate(desugar(parse("X ~ Dirac(0.5);")));
    CHECK(v1.support[0] == Support::ContinuousNonneg);
    Validation v2 = validate(desugar(parse("X ~ Poisson(1); X := 0.5*X;")));
    CHECK(v2.support[0] == Support::ContinuousNonneg);
    Validation v3 = validate(desugar(parse("X ~ Dirac(2);")));
    CHECK(v3.support[0] == Support::DiscreteNat);
}

TEST_CASE("validate: resampling resets support") {
    Program p = desugar(parse("L ~ Exponential(1); L ~ Poisson(2); observe L = 1;"));
    Validation v = validate(p);
    CHECK(v.support[0] == Support::DiscreteNat);
}

TEST_CASE("validate: branch joins take the continuous side") {
    Program p = desugar(parse(
        "Z ~ Bernoulli(0.5); if Z = 1 { L ~ Exponential(1); } else { L ~ Poisson(1); }"));
    Validation v = validate(p);
    CHECK(v.support[1] == Support::ContinuousNonneg);
}

TEST_CASE("validate rejects malformed parameters") {
    CHECK_THROWS_AS(validate(desugar(parse("X ~ Bernoulli(1.5);"))), GfiError);
    CHECK_THROWS_AS(validate(desugar(parse("X ~ Categorical(0.5, 0.2);"))), GfiError);
    CHECK_THROWS_AS(validate(desugar(parse("X ~ UniformDisc(3, 2);"))), GfiError);
    CHECK_THROWS_AS(validate(desugar(parse("X ~ Exponential(0);"))), GfiError);
    CHECK_THROWS_AS(validate(desugar(parse("X ~ Geometric(0);"))), GfiError);
}
