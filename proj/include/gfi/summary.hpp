#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gfi/gf.hpp"

namespace gfi {

template <class S>
struct MomentSet {
    S evidence{};
    std::array<S, 4> factorial{};  // G'(1), G''(1), G'''(1), G''''(1), normalized
    std::array<S, 4> raw{};        // M1..M4
    S mean{};
    S variance{};
    std::optional<S> skewness;  // undefined for (near-)degenerate posteriors
    std::optional<S> kurtosis;
    std::vector<std::string> warnings;
};

template <class S>
struct MassTable {
    int query = -1;
    std::uint64_t cutoff = 0;
    double tail_bound = 1.0 / 256.0;
    std::vector<S> masses;  // index k holds P[X = k], k = 0..cutoff
    std::vector<std::string> warnings;
};

// First four posterior moments of the query variable from one evaluation
// pass at the all-ones point. The evidence is reported pre-normalization.
template <class K>
MomentSet<typename K::Scalar> moments(const GfProgram& gp, int query, const K& kern,
                                      const EvalRequest* req_out = nullptr,
                                      EvalOptions opts = {}) {
    using S = typename K::Scalar;
    EvalRequest req;
    req.point.assign(gp.nvars, Rational(1));
    req.order = 4;
    if (req_out) req = *req_out;
    TaylorPoly<S> g = eval_program(gp, req, kern, opts);

    MomentSet<S> out;
    std::vector<int> idx(gp.nvars, 0);
    out.evidence = gp.nvars == 0 ? g.coeffs()[0] : g.at(idx);
    if (!s_definitely_nonzero(out.evidence))
        throw GfiError(ErrKind::ZeroEvidence,
                       "normalizing constant is zero (or an interval containing zero): "
                       "the observations have probability zero");
    if (s_to_double(out.evidence) < 0)
        throw GfiError(ErrKind::ZeroEvidence, "normalizing constant is negative");

    // Normalized derivatives at the marginalization point: i! * c_i / evidence.
    std::array<S, 4> derivs{};
    S fact = s_one_like(out.evidence);
    for (int i = 1; i <= 4; ++i) {
        fact = s_mul_si(fact, i);
        idx[query] = i;
        derivs[i - 1] = fact * g.at(idx) / out.evidence;
    }
    if (gp.final_reps[query] == Rep::MGF) {
        // d^i/dt^i E[e^{tX}] at 0 gives raw moments directly.
        out.raw = derivs;
        const S& m1 = out.raw[0];
        const S& m2 = out.raw[1];
        const S& m3 = out.raw[2];
        const S& m4 = out.raw[3];
        out.factorial[0] = m1;
        out.factorial[1] = m2 - m1;
        out.factorial[2] = m3 - s_mul_si(m2, 3) + s_mul_si(m1, 2);
        out.factorial[3] = m4 - s_mul_si(m3, 6) + s_mul_si(m2, 11) - s_mul_si(m1, 6);
    } else {
        // d^i/dx^i E[x^X] at 1 gives factorial moments.
        out.factorial = derivs;
        const S& f1 = out.factorial[0];
        const S& f2 = out.factorial[1];
        const S& f3 = out.factorial[2];
        const S& f4 = out.factorial[3];
        out.raw[0] = f1;
        out.raw[1] = f2 + f1;
        out.raw[2] = f3 + s_mul_si(f2, 3) + f1;
        out.raw[3] = f4 + s_mul_si(f3, 6) + s_mul_si(f2, 7) + f1;
    }

    const S& m1 = out.raw[0];
    const S& m2 = out.raw[1];
    const S& m3 = out.raw[2];
    const S& m4 = out.raw[3];
    out.mean = m1;
    out.variance = m2 - m1 * m1;

    double var_d = s_to_double(out.variance);
    double scale_d = std::max(1.0, s_to_double(m1) * s_to_double(m1));
    double tol = ScalarTraits<S>::exact ? 0.0 : 1e-12 * scale_d;
    if (var_d < -tol)
        out.warnings.push_back("variance is negative beyond rounding tolerance");
    if (!(var_d > tol)) {
        // Degenerate (Dirac-like) posterior: skewness/kurtosis undefined.
        return out;
    }
    S mu = m1;
    S mu2 = mu * mu;
    S central3 = m3 - s_mul_si(mu * m2, 3) + s_mul_si(mu2 * mu, 2);
    S central4 = m4 - s_mul_si(mu * m3, 4) + s_mul_si(mu2 * m2, 6) - s_mul_si(mu2 * mu2, 3);
    if constexpr (ScalarTraits<S>::exact) {
        // sigma^3 needs a square root; kurtosis is exact, skewness is not.
        out.kurtosis = central4 / (out.variance * out.variance);
        out.warnings.push_back("skewness needs sqrt and is unavailable in rational arithmetic");
    } else {
        S sigma = s_sqrt(out.variance);
        out.skewness = central3 / (out.variance * sigma);
        out.kurtosis = central4 / (out.variance * out.variance);
    }
    return out;
}

// Mass-table cutoff m = ceil(mu + 4 (E[(X-mu)^4])^(1/4)); Markov's inequality
// bounds the discarded tail by 1/256.
template <class S>
std::uint64_t mass_cutoff(const MomentSet<S>& ms) {
    double mu = s_to_double(ms.mean);
    const S& m2 = ms.raw[1];
    const S& m3 = ms.raw[2];
    const S& m4 = ms.raw[3];
    S mus = ms.mean;
    S central4 =
        m4 - s_mul_si(mus * m3, 4) + s_mul_si(mus * mus * m2, 6) - s_mul_si(mus * mus * mus * mus, 3);
    double c4 = std::max(0.0, s_to_double(central4));
    double m = mu + 4.0 * std::pow(c4, 0.25);
    if (m < 0) m = 0;
    return (std::uint64_t)std::ceil(m - 1e-12);
}

// P[X = k] for k = 0..cutoff via a dedicated pass at x_query = 0.
template <class K>
MassTable<typename K::Scalar> masses(const GfProgram& gp, int query,
                                     const typename K::Scalar& evidence, std::uint64_t cutoff,
                                     const K& kern, EvalOptions opts = {}) {
    using S = typename K::Scalar;
    if (gp.support[query] == Support::ContinuousNonneg)
        throw GfiError(ErrKind::MassesUnavailable,
                       "probability masses are only defined for variables on the naturals");
    EvalRequest req;
    req.point.assign(gp.nvars, Rational(1));
    req.point[query] = Rational(0);
    req.order = (int)cutoff;
    TaylorPoly<S> g = eval_program(gp, req, kern, opts);

    MassTable<S> out;
    out.query = query;
    out.cutoff = cutoff;
    std::vector<int> idx(gp.nvars, 0);
    double eps_clamp = 10.0 * s_eps(evidence);
    double table_scale = 1.0;
    out.masses.reserve(cutoff + 1);
    for (std::uint64_t k = 0; k <= cutoff; ++k) {
        idx[query] = (int)k;
        S m = g.at(idx) / evidence;
        double md = s_to_double(m);
        if (md < 0) {
            if (md >= -eps_clamp * table_scale) {
                out.warnings.push_back("mass at k=" + std::to_string(k) +
                                       " was a tiny negative and was clamped to 0");
                m = S{};
            } else if (!K::is_interval) {
                throw GfiError(ErrKind::DomainError,
                               "mass at k=" + std::to_string(k) +
                                   " is negative beyond rounding tolerance");
            }
        }
        out.masses.push_back(std::move(m));
    }
    return out;
}

}  // namespace gfi
