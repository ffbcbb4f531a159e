#pragma once

#include <vector>

#include "gfi/ast.hpp"
#include "gfi/taylor.hpp"

namespace gfi {

// Coordinate convention per variable: PGF uses x_i directly; MGF substitutes
// x_i = exp(t_i), which removes the logarithms from the generating functions
// of continuous distributions and cures their catastrophic cancellation.
enum class Rep { PGF, MGF };

namespace dist_taylor {

// Linear polynomial c0 + c1 * (x_k - w_k) in the program's variable space.
template <class K>
TaylorPoly<typename K::Scalar> linear(const K& kern, const std::vector<typename K::Scalar>& base,
                                      int k, typename K::Scalar c0, typename K::Scalar c1,
                                      int cap = 1) {
    using S = typename K::Scalar;
    std::vector<int> caps(base.size(), 0);
    caps[k] = std::max(cap, 1);
    TaylorPoly<S> p(base, caps);
    std::vector<int> idx(base.size(), 0);
    p.at(idx) = c0;
    idx[k] = 1;
    p.at(idx) = c1;
    (void)kern;
    return p;
}

// Taylor expansion of the distribution's generating function as a univariate
// factor in coordinate k, around base[k], truncated at cap. The rep chooses
// between the PGF form gf(x) and the exp-substituted MGF form gf(e^t).
template <class K>
TaylorPoly<typename K::Scalar> dist_gf(const K& kern, const Distribution& d, Rep rep, int k,
                                       const std::vector<typename K::Scalar>& base, int cap) {
    using S = typename K::Scalar;
    const S& w = base[k];
    std::vector<int> zero_caps(base.size(), 0);
    auto constant = [&](S v) { return TaylorPoly<S>::constant(v, base, zero_caps); };

    if (rep == Rep::MGF) {
        switch (d.kind) {
            case DistKind::Dirac: {
                // exp(a t)
                S a = kern.rat(d.params[0]);
                return exp_t(linear(kern, base, k, a * w, a, cap));
            }
            case DistKind::Exponential: {
                // lambda / (lambda - t), defined for t < lambda
                S lam = kern.rat(d.params[0]);
                S c0 = lam - w;
                if (!s_definitely_positive(c0))
                    throw GfiError(ErrKind::DomainError,
                                   "Exponential generating function evaluated outside its domain");
                std::vector<int> caps(base.size(), 0);
                caps[k] = cap;
                return div_linear(constant(lam), linear(kern, base, k, c0, -s_one_like(lam)),
                                  caps);
            }
            case DistKind::Gamma: {
                // (beta / (beta - t))^alpha = beta^alpha * (beta - t)^(-alpha)
                S beta = kern.rat(d.params[1]);
                S c0 = beta - w;
                if (!s_definitely_positive(c0))
                    throw GfiError(ErrKind::DomainError,
                                   "Gamma generating function evaluated outside its domain");
                std::vector<int> caps(base.size(), 0);
                caps[k] = cap;
                TaylorPoly<S> den = linear(kern, base, k, c0, -s_one_like(beta), cap);
                TaylorPoly<S> inv = pow_t(den, -d.params[0]);
                return scale(s_pow_rat(beta, d.params[0]), inv);
            }
            case DistKind::UniformCont: {
                // (e^{bt} - e^{at}) / ((b - a) t); at t = 0 the series is
                // sum_n (b^{n+1} - a^{n+1}) / ((b-a) (n+1)!) t^n, which is
                // rational in a and b.
                const Rational& a = d.params[0];
                const Rational& b = d.params[1];
                if (a == b) {
                    S av = kern.rat(a);
                    return exp_t(linear(kern, base, k, av * w, av, cap));
                }
                std::vector<int> caps(base.size(), 0);
                caps[k] = cap;
                if (s_is_zero(w)) {
                    TaylorPoly<S> out(base, caps);
                    std::vector<int> idx(base.size(), 0);
                    // coefficient_n = (b^{n+1} - a^{n+1}) / ((b-a)(n+1)!)
                    Rational ap = a, bp = b, f = 1;
                    for (int n = 0; n <= cap; ++n) {
                        Rational coeff = (bp - ap) / ((b - a) * f);
                        coeff.canonicalize();
                        idx[k] = n;
                        out.at(idx) = kern.rat(coeff);
                        ap *= a;
                        bp *= b;
                        f *= (n + 2);
                    }
                    return out;
                }
                S av = kern.rat(a), bv = kern.rat(b);
                TaylorPoly<S> num = sub(exp_t(linear(kern, base, k, bv * w, bv, cap)),
                                        exp_t(linear(kern, base, k, av * w, av, cap)));
                S ba = kern.rat(b - a);
                TaylorPoly<S> den = linear(kern, base, k, ba * w, ba, cap);
                return div_linear(num, den, caps);
            }
            default:
                throw GfiError(ErrKind::InvalidProgram,
                               "discrete distribution in a continuous coordinate");
        }
    }

    switch (d.kind) {
        case DistKind::Dirac: {
            if (is_integer(d.params[0]))
                return monomial_power(base, k, to_uint64(d.params[0]), cap);
            // x^a for fractional a (log-form representation only).
            if (!s_definitely_positive(w))
                throw GfiError(ErrKind::DomainError, "fractional power of a nonpositive point");
            return pow_t(linear(kern, base, k, w, s_one_like(w), cap), d.params[0]);
        }
        case DistKind::Bernoulli: {
            S p = kern.rat(d.params[0]);
            S q = kern.rat(1 - d.params[0]);
            return linear(kern, base, k, q + p * w, p, std::min(cap, 1));
        }
        case DistKind::Categorical: {
            std::vector<int> caps(base.size(), 0);
            caps[k] = std::min<int>(cap, (int)d.params.size() - 1);
            TaylorPoly<S> out(base, caps);
            std::vector<int> zero(base.size(), 0);
            for (std::size_t i = 0; i < d.params.size(); ++i) {
                if (d.params[i] == 0) continue;
                out.accumulate_shifted(monomial_power(base, k, i, caps[k]), zero,
                                       kern.rat(d.params[i]));
            }
            return out;
        }
        case DistKind::Binomial: {
            // (q + p x)^n by direct binomial expansion around w.
            std::uint64_t n = to_uint64(d.params[0]);
            S p = kern.rat(d.params[1]);
            S q = kern.rat(1 - d.params[1]);
            S c0 = q + p * w;  // value of (q + p x) at w
            int m = std::min<int>(cap, (int)n);
            std::vector<int> caps(base.size(), 0);
            caps[k] = std::max(m, 0);
            TaylorPoly<S> out(base, caps);
            std::vector<int> idx(base.size(), 0);
            // coefficient_j = C(n, j) * c0^{n-j} * p^j
            S binom = s_one_like(p);
            for (int j = 0; j <= m; ++j) {
                idx[k] = j;
                out.at(idx) = binom * s_pow_nat(c0, n - (std::uint64_t)j) * s_pow_nat(p, j);
                if (j < m) binom = s_div_si(s_mul_si(binom, (long)(n - (std::uint64_t)j)), j + 1);
            }
            return out;
        }
        case DistKind::UniformDisc: {
            std::uint64_t l = to_uint64(d.params[0]);
            std::uint64_t m = to_uint64(d.params[1]);
            std::vector<int> caps(base.size(), 0);
            caps[k] = std::min<int>(cap, (int)m);
            TaylorPoly<S> out(base, caps);
            std::vector<int> zero(base.size(), 0);
            S weight = kern.rat(Rational(1, (long)(m - l + 1)));
            for (std::uint64_t i = l; i <= m; ++i)
                out.accumulate_shifted(monomial_power(base, k, i, caps[k]), zero, weight);
            return out;
        }
        case DistKind::Geometric:
        case DistKind::NegBinomial: {
            const Rational& pr = d.params[d.kind == DistKind::Geometric ? 0 : 1];
            S p = kern.rat(pr);
            S q = kern.rat(1 - pr);
            S c0 = s_one_like(p) - q * w;
            if (!s_definitely_positive(c0))
                throw GfiError(ErrKind::DomainError,
                               "geometric generating function evaluated outside its domain");
            std::vector<int> caps(base.size(), 0);
            caps[k] = cap;
            TaylorPoly<S> geo =
                div_linear(constant(p), linear(kern, base, k, c0, -q, cap), caps);
            if (d.kind == DistKind::Geometric) return geo;
            std::uint64_t r = to_uint64(d.params[0]);
            if (r == 0) return constant(s_one_like(p));
            // geo^r via the univariate power recurrence (integer exponent).
            return pow_t(geo, Rational((long)r));
        }
        case DistKind::Poisson: {
            S lam = kern.rat(d.params[0]);
            return exp_t(linear(kern, base, k, lam * (w - s_one_like(lam)), lam, cap));
        }
        case DistKind::Exponential: {
            // lambda / (lambda - ln x): log form, kept for the stability
            // regression flag; numerically fragile below x = 1.
            S lam = kern.rat(d.params[0]);
            if (!s_definitely_positive(w))
                throw GfiError(ErrKind::DomainError, "logarithm of a nonpositive point");
            std::vector<int> caps(base.size(), 0);
            caps[k] = cap;
            TaylorPoly<S> lnx = ln_t(linear(kern, base, k, w, s_one_like(lam), cap));
            TaylorPoly<S> den = sub(constant(lam), lnx);
            if (!s_definitely_nonzero(den.at(std::vector<int>(base.size(), 0))))
                throw GfiError(ErrKind::DomainError,
                               "Exponential generating function evaluated outside its domain");
            return scale(lam, pow_t(den, Rational(-1)));
        }
        case DistKind::Gamma: {
            S beta = kern.rat(d.params[1]);
            if (!s_definitely_positive(w))
                throw GfiError(ErrKind::DomainError, "logarithm of a nonpositive point");
            std::vector<int> caps(base.size(), 0);
            caps[k] = cap;
            TaylorPoly<S> lnx = ln_t(linear(kern, base, k, w, s_one_like(beta), cap));
            TaylorPoly<S> den = sub(constant(beta), lnx);
            return scale(s_pow_rat(beta, d.params[0]), pow_t(den, -d.params[0]));
        }
        case DistKind::UniformCont:
            throw GfiError(ErrKind::UnsupportedOp,
                           "UniformCont requires the exp-substituted representation");
    }
    throw GfiError(ErrKind::InvalidProgram, "unhandled distribution");
}

// P[D = d] for a distribution supported on the naturals, as the d-th Taylor
// coefficient of its generating function at 0.
template <class K>
typename K::Scalar pmf_scalar(const K& kern, const Distribution& dist, std::uint64_t d) {
    using S = typename K::Scalar;
    std::vector<S> base{kern.integer(0)};
    TaylorPoly<S> gf = dist_gf(kern, dist, Rep::PGF, 0, base, (int)d);
    if (gf.caps()[0] < (int)d) return S{};
    return gf.at({(int)d});
}

}  // namespace dist_taylor

}  // namespace gfi
