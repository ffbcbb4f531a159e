// Optimized compound-observation rules against the fresh-variable expansion.

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

template <class K>
void check_pair(const Program& surface, const K& kern, double rel_tol) {
    using S = typename K::Scalar;
    Program opt = desugar(surface);
    Program naive = desugar(surface, DesugarOptions{true});
    validate(opt);
    validate(naive);
    auto g_opt = build_gf(opt);
    auto g_naive = build_gf(naive);

    bool zero_opt = false, zero_naive = false;
    MomentSet<S> mo, mn;
    try {
        mo = moments(g_opt, 0, kern);
    } catch (const GfiError& e) {
        REQUIRE(e.kind() == ErrKind::ZeroEvidence);
        zero_opt = true;
    }
    try {
        mn = moments(g_naive, 0, kern);
    } catch (const GfiError& e) {
        REQUIRE(e.kind() == ErrKind::ZeroEvidence);
        zero_naive = true;
    }
    REQUIRE(zero_opt == zero_naive);
    if (zero_opt) return;

    if constexpr (ScalarTraits<S>::exact) {
        CHECK(mo.evidence == mn.evidence);
        CHECK(mo.mean == mn.mean);
        CHECK(mo.variance == mn.variance);
    } else {
        CHECK(s_to_double(mo.evidence) ==
              doctest::Approx(s_to_double(mn.evidence)).epsilon(rel_tol));
        CHECK(s_to_double(mo.mean) == doctest::Approx(s_to_double(mn.mean)).epsilon(rel_tol));
    }
    std::uint64_t cutoff = std::min<std::uint64_t>(mass_cutoff(mo), 40);
    auto to = masses(g_opt, 0, mo.evidence, cutoff, kern);
    auto tn = masses(g_naive, 0, mn.evidence, cutoff, kern);
    for (std::uint64_t k = 0; k <= cutoff; ++k) {
        if constexpr (ScalarTraits<S>::exact) {
            CHECK(to.masses[k] == tn.masses[k]);
        } else {
            double a = s_to_double(to.masses[k]);
            double b = s_to_double(tn.masses[k]);
            CHECK(a == doctest::Approx(b).epsilon(rel_tol).scale(1.0));
        }
    }
}

}  // namespace

TEST_CASE("compound binomial observations: optimized = naive, exactly") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 50; ++i)
        check_pair(testgen::compound_observe_program(rng, CompoundKind::Binomial), ratk, 0);
}

TEST_CASE("compound negbinomial observations: optimized = naive, exactly") {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 50; ++i)
        check_pair(testgen::compound_observe_program(rng, CompoundKind::NegBinomial), ratk, 0);
}

TEST_CASE("compound bernoulli observations: optimized = naive, exactly") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 50; ++i)
        check_pair(testgen::compound_observe_program(rng, CompoundKind::Bernoulli), ratk, 0);
}

TEST_CASE("compound poisson observations: optimized = naive within 1e-9") {
    std::mt19937_64 rng(34);
    for (int i = 0; i < 50; ++i)
        check_pair(testgen::compound_observe_program(rng, CompoundKind::Poisson), f64, 1e-9);
}

TEST_CASE("optimized observations also agree on full random programs") {
    std::mt19937_64 rng(35);
    for (int i = 0; i < 25; ++i) {
        Program p = testgen::random_finite_program(rng);
        CAPTURE(render(p));
        check_pair(p, ratk, 0);
    }
}
