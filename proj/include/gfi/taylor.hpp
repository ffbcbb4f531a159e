#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "gfi/error.hpp"
#include "gfi/kernels.hpp"

namespace gfi {

// Operation counters for the complexity contracts. Evaluation passes are
// single-threaded, so plain integers suffice.
struct TaylorCounters {
    unsigned long long mul_calls = 0;
    unsigned long long mul_coeff_ops = 0;
    unsigned long long subst_calls = 0;
    unsigned long long subst_fastpath_calls = 0;
    unsigned long long subst_coeff_ops = 0;
    unsigned long long derive_calls = 0;

    void reset() { *this = TaylorCounters{}; }
    static TaylorCounters& global() {
        static TaylorCounters c;
        return c;
    }
};

namespace detail {

inline std::vector<std::size_t> strides_of(const std::vector<int>& caps) {
    std::vector<std::size_t> st(caps.size());
    std::size_t s = 1;
    for (int i = (int)caps.size() - 1; i >= 0; --i) {
        st[i] = s;
        s *= (std::size_t)(caps[i] + 1);
    }
    return st;
}

inline std::size_t cell_count(const std::vector<int>& caps) {
    std::size_t s = 1;
    for (int c : caps) s *= (std::size_t)(c + 1);
    return s;
}

// Visits every multi-index of the rectangle in row-major order.
template <class F>
void for_each_index(const std::vector<int>& caps, F&& f) {
    std::size_t n = caps.size();
    std::vector<int> alpha(n, 0);
    std::size_t total = cell_count(caps);
    for (std::size_t lin = 0; lin < total; ++lin) {
        f(alpha, lin);
        for (int i = (int)n - 1; i >= 0; --i) {
            if (++alpha[i] <= caps[i]) break;
            alpha[i] = 0;
        }
    }
}

}  // namespace detail

// Multivariate truncated Taylor expansion around a base point. Entry c_alpha
// is the Taylor coefficient (1/alpha!)·d^alpha G(base): factorials stay
// divided out so high orders do not overflow. Storage is a dense rectangle
// with an independent degree cap per variable; factors known to be short
// polynomials carry tight caps.
template <class S>
class TaylorPoly {
public:
    TaylorPoly() = default;

    TaylorPoly(std::vector<S> base, std::vector<int> caps)
        : base_(std::move(base)), caps_(std::move(caps)) {
        for (int c : caps_)
            if (c < 0) throw GfiError(ErrKind::DomainError, "negative degree cap");
        c_.assign(detail::cell_count(caps_), S{});
    }

    static TaylorPoly constant(const S& value, std::vector<S> base, std::vector<int> caps) {
        TaylorPoly p(std::move(base), std::move(caps));
        p.c_[0] = value;
        return p;
    }

    // base[i] + (x_i - base[i]); requires cap_i >= 1.
    static TaylorPoly variable(int i, std::vector<S> base, std::vector<int> caps) {
        if (i < 0 || (std::size_t)i >= base.size())
            throw GfiError(ErrKind::DomainError, "variable index out of range");
        if (caps[i] < 1)
            throw GfiError(ErrKind::DomainError, "variable() needs degree cap >= 1");
        TaylorPoly p(base, std::move(caps));
        p.c_[0] = base[i];
        std::vector<int> e(base.size(), 0);
        e[i] = 1;
        p.c_[p.linear(e)] = s_one_like(base[i]);
        return p;
    }

    int nvars() const { return (int)caps_.size(); }
    const std::vector<int>& caps() const { return caps_; }
    const std::vector<S>& base() const { return base_; }
    const std::vector<S>& coeffs() const { return c_; }
    std::vector<S>& coeffs_mut() { return c_; }
    std::vector<S>& base_mut() { return base_; }

    std::size_t linear(const std::vector<int>& alpha) const {
        std::size_t lin = 0;
        for (int i = 0; i < nvars(); ++i) {
            if (alpha[i] < 0 || alpha[i] > caps_[i])
                throw GfiError(ErrKind::DomainError, "multi-index out of range");
            lin = lin * (std::size_t)(caps_[i] + 1) + (std::size_t)alpha[i];
        }
        return lin;
    }

    const S& at(const std::vector<int>& alpha) const { return c_[linear(alpha)]; }
    S& at(const std::vector<int>& alpha) { return c_[linear(alpha)]; }

    // alpha! * c_alpha, the raw partial derivative at the base point.
    S derivative_value(const std::vector<int>& alpha) const {
        S v = at(alpha);
        for (int i = 0; i < nvars(); ++i)
            for (int j = 2; j <= alpha[i]; ++j) v = s_mul_si(v, j);
        return v;
    }

    // Full polynomial evaluation (tests and finite-difference checks).
    S eval_at(const std::vector<S>& x) const {
        std::vector<S> dx(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] - base_[i];
        return eval_rec(0, 0, dx);
    }

    TaylorPoly truncated(std::vector<int> new_caps) const {
        TaylorPoly out(base_, std::move(new_caps));
        out.accumulate_shifted(*this, std::vector<int>(nvars(), 0), std::nullopt);
        return out;
    }

    // out[alpha+shift] += s * this[alpha] over the in-range region; the
    // workhorse behind add, embed and the Cauchy product.
    void accumulate_shifted(const TaylorPoly& p, const std::vector<int>& shift,
                            const std::optional<S>& scale) {
        if (scale && s_is_zero(*scale)) return;
        std::vector<int> lim(nvars());
        for (int i = 0; i < nvars(); ++i) {
            lim[i] = std::min(p.caps_[i], caps_[i] - shift[i]);
            if (lim[i] < 0) return;
        }
        auto pst = detail::strides_of(p.caps_);
        auto ost = detail::strides_of(caps_);
        std::size_t obase = 0;
        for (int i = 0; i < nvars(); ++i) obase += ost[i] * (std::size_t)shift[i];
        acc_rec(p, lim, pst, ost, 0, 0, obase, scale);
    }

    friend TaylorPoly add(const TaylorPoly& a, const TaylorPoly& b) {
        std::vector<int> caps(a.nvars());
        for (int i = 0; i < a.nvars(); ++i) caps[i] = std::max(a.caps_[i], b.caps_[i]);
        TaylorPoly out(merged_base(a, b), caps);
        std::vector<int> zero(a.nvars(), 0);
        out.accumulate_shifted(a, zero, std::nullopt);
        out.accumulate_shifted(b, zero, std::nullopt);
        return out;
    }

    friend TaylorPoly sub(const TaylorPoly& a, const TaylorPoly& b) {
        std::vector<int> caps(a.nvars());
        for (int i = 0; i < a.nvars(); ++i) caps[i] = std::max(a.caps_[i], b.caps_[i]);
        TaylorPoly out(merged_base(a, b), caps);
        std::vector<int> zero(a.nvars(), 0);
        out.accumulate_shifted(a, zero, std::nullopt);
        TaylorPoly nb = b;
        for (auto& v : nb.c_) v = -v;
        out.accumulate_shifted(nb, zero, std::nullopt);
        return out;
    }

    friend TaylorPoly scale(const S& c, const TaylorPoly& p) {
        TaylorPoly out = p;
        for (auto& v : out.c_) v = v * c;
        return out;
    }

    // Truncated Cauchy product. Iterates the (typically short) factor q on
    // the outside, so cost is O(|p| * #nonzero(q)).
    friend TaylorPoly mul(const TaylorPoly& p, const TaylorPoly& q,
                          const std::vector<int>& out_caps) {
        auto& ctr = TaylorCounters::global();
        ++ctr.mul_calls;
        TaylorPoly out(merged_base(p, q), out_caps);
        detail::for_each_index(q.caps_, [&](const std::vector<int>& beta, std::size_t lin) {
            const S& qv = q.c_[lin];
            if (s_is_zero(qv)) return;
            out.accumulate_shifted(p, beta, qv);
        });
        return out;
    }

    // Taylor coefficients of the k-th partial derivative: index shift plus
    // an integer factor. Degree room in k must exist (budget guard).
    friend TaylorPoly derive(const TaylorPoly& p, int k) {
        if (p.caps_[k] == 0)
            throw GfiError(ErrKind::DomainError,
                           "derivative exceeds the polynomial's degree budget");
        ++TaylorCounters::global().derive_calls;
        std::vector<int> caps = p.caps_;
        caps[k] -= 1;
        TaylorPoly out(p.base_, caps);
        auto pst = detail::strides_of(p.caps_);
        detail::for_each_index(out.caps_, [&](const std::vector<int>& beta, std::size_t lin) {
            std::size_t plin = 0;
            for (int i = 0; i < out.nvars(); ++i)
                plin += pst[i] * (std::size_t)(i == k ? beta[i] + 1 : beta[i]);
            out.c_[lin] = s_mul_si(p.c_[plin], beta[k] + 1);
        });
        return out;
    }

    // Taylor coefficients of (1/d!) * d^d/dx_k^d: shift by d with binomial
    // factors C(beta_k + d, d). All factors are integers, so this is exact in
    // rational mode and overflow-safe for the orders we reach.
    friend TaylorPoly derive_frac(const TaylorPoly& p, int k, int d) {
        if (d == 0) return p;
        if (p.caps_[k] < d)
            throw GfiError(ErrKind::DomainError,
                           "derivative exceeds the polynomial's degree budget");
        ++TaylorCounters::global().derive_calls;
        std::vector<int> caps = p.caps_;
        caps[k] -= d;
        TaylorPoly out(p.base_, caps);
        // binom[j] = C(j + d, d), built incrementally.
        std::vector<S> binom((std::size_t)caps[k] + 1);
        S one = s_one_like(p.c_[0]);
        binom[0] = one;
        for (int j = 1; j <= caps[k]; ++j)
            binom[j] = s_div_si(s_mul_si(binom[j - 1], j + d), j);
        auto pst = detail::strides_of(p.caps_);
        detail::for_each_index(out.caps_, [&](const std::vector<int>& beta, std::size_t lin) {
            std::size_t plin = 0;
            for (int i = 0; i < out.nvars(); ++i)
                plin += pst[i] * (std::size_t)(i == k ? beta[i] + d : beta[i]);
            out.c_[lin] = p.c_[plin] * binom[beta[k]];
        });
        return out;
    }

    // Coefficients with alpha_k = fixed, as a polynomial with cap_k = 0.
    friend TaylorPoly slice_axis(const TaylorPoly& p, int k, int fixed) {
        std::vector<int> caps = p.caps_;
        caps[k] = 0;
        TaylorPoly out(p.base_, caps);
        auto pst = detail::strides_of(p.caps_);
        detail::for_each_index(out.caps_, [&](const std::vector<int>& beta, std::size_t lin) {
            std::size_t plin = 0;
            for (int i = 0; i < out.nvars(); ++i)
                plin += pst[i] * (std::size_t)(i == k ? fixed : beta[i]);
            out.c_[lin] = p.c_[plin];
        });
        return out;
    }

    // G(x[k -> b * x_k]) when expanded around the matching point: every
    // coefficient picks up b^(alpha_k) and the base point moves to new_base_k.
    // This is the degree-1 substitution fast path.
    friend TaylorPoly rescale_axis(const TaylorPoly& p, int k, const S& b, const S& new_base_k) {
        auto& ctr = TaylorCounters::global();
        ++ctr.subst_calls;
        ++ctr.subst_fastpath_calls;
        ctr.subst_coeff_ops += p.c_.size();
        TaylorPoly out = p;
        out.base_[k] = new_base_k;
        std::vector<S> pw((std::size_t)p.caps_[k] + 1);
        pw[0] = s_one_like(b);
        for (int j = 1; j <= p.caps_[k]; ++j) pw[j] = pw[j - 1] * b;
        detail::for_each_index(p.caps_, [&](const std::vector<int>& alpha, std::size_t lin) {
            if (alpha[k] > 0) out.c_[lin] = out.c_[lin] * pw[alpha[k]];
        });
        return out;
    }

    // Substitution out(x) = p(x[k -> h(x)]), computed with the Horner scheme
    // p_0 + h~ * (p_1 + h~ * (...)) over the k-exponent slices of p, where h~
    // is h without its constant term. Preconditions: p is expanded with its
    // k-th base equal to h's constant term, and h is expanded at the output
    // point. If h~ is a plain multiple of (x_k - w_k) the rescale fast path
    // applies.
    friend TaylorPoly substitute(const TaylorPoly& p, int k, const TaylorPoly& h,
                                 const std::vector<int>& out_caps) {
        auto& ctr = TaylorCounters::global();
        std::vector<int> ek(h.nvars(), 0);
        ek[k] = 1;
        // Fast path detection.
        bool linear_same_var = true;
        S slope{};
        bool slope_set = false;
        detail::for_each_index(h.caps_, [&](const std::vector<int>& beta, std::size_t lin) {
            if (!linear_same_var) return;
            std::size_t weight = 0;
            for (std::size_t i = 0; i < beta.size(); ++i) weight += (std::size_t)beta[i];
            if (weight == 0) return;  // constant term handled by the base shift
            if (beta == ek) {
                slope = h.c_[lin];
                slope_set = true;
                return;
            }
            if (!s_is_zero(h.c_[lin])) linear_same_var = false;
        });
        // Output base: axis k and any axis p never depended on come from h.
        std::vector<S> out_base(p.base_.size());
        for (int i = 0; i < p.nvars(); ++i)
            out_base[i] = (i != k && p.caps_[i] > 0) ? p.base_[i] : h.base_[i];

        if (linear_same_var && slope_set) {
            TaylorPoly out = rescale_axis(p, k, slope, h.base_[k]);
            out.base_ = out_base;
            return out.truncated(out_caps);
        }

        ++ctr.subst_calls;
        unsigned long long before = ctr.mul_coeff_ops;
        TaylorPoly htilde = h;
        htilde.c_[0] = S{};
        std::vector<int> zero(p.nvars(), 0);
        int m = p.caps_[k];
        TaylorPoly result(out_base, out_caps);
        {
            TaylorPoly top = slice_axis(p, k, m);
            top.base_ = out_base;
            result.accumulate_shifted(top, zero, std::nullopt);
        }
        for (int i = m - 1; i >= 0; --i) {
            result = mul(result, htilde, out_caps);
            TaylorPoly si = slice_axis(p, k, i);
            si.base_ = out_base;
            result.accumulate_shifted(si, zero, std::nullopt);
        }
        ctr.subst_coeff_ops += ctr.mul_coeff_ops - before;
        return result;
    }

    // Division p / q where q is linear in a single variable with a nonzero
    // constant term.
    friend TaylorPoly div_linear(const TaylorPoly& p, const TaylorPoly& q,
                                 const std::vector<int>& out_caps) {
        merged_base(p, q);
        int k = -1;
        S q0{}, q1{};
        bool has_q0 = false;
        detail::for_each_index(q.caps_, [&](const std::vector<int>& beta, std::size_t lin) {
            std::size_t weight = 0;
            int axis = -1;
            for (std::size_t i = 0; i < beta.size(); ++i) {
                weight += (std::size_t)beta[i];
                if (beta[i] > 0) axis = (int)i;
            }
            if (weight == 0) {
                q0 = q.c_[lin];
                has_q0 = true;
            } else if (!s_is_zero(q.c_[lin])) {
                if (weight > 1 || (k >= 0 && axis != k))
                    throw GfiError(ErrKind::DomainError, "divisor must be linear in one variable");
                k = axis;
                q1 = q.c_[lin];
            }
        });
        if (!has_q0 || !s_definitely_nonzero(q0))
            throw GfiError(ErrKind::DivisionByZero, "divisor has (possibly) zero constant term");
        TaylorPoly out(p.base_, out_caps);
        if (k < 0) {  // constant divisor
            detail::for_each_index(out.caps_, [&](const std::vector<int>& a, std::size_t lin) {
                out.c_[lin] = in_range(p, a) ? p.at(a) / q0 : S{};
            });
            return out;
        }
        // r[a] = (p[a] - q1 * r[a - e_k]) / q0, ascending in a_k.
        auto ost = detail::strides_of(out.caps_);
        detail::for_each_index(out.caps_, [&](const std::vector<int>& a, std::size_t lin) {
            S num = in_range(p, a) ? p.at(a) : S{};
            if (a[k] > 0) num = num - q1 * out.c_[lin - ost[k]];
            out.c_[lin] = num / q0;
        });
        return out;
    }

    // True when no stored coefficient has a positive exponent on axis i.
    bool constant_along_axis(int i) const {
        if (caps_[i] == 0) return true;
        bool constant = true;
        detail::for_each_index(caps_, [&](const std::vector<int>& a, std::size_t lin) {
            if (a[i] > 0 && !s_is_zero(c_[lin])) constant = false;
        });
        return constant;
    }

    bool single_effective_axis(int& axis) const {
        axis = -1;
        for (int i = 0; i < nvars(); ++i) {
            if (caps_[i] > 0) {
                if (axis >= 0) return false;
                axis = i;
            }
        }
        return true;
    }

    // exp of a polynomial with at most one effective variable (O(D^2)).
    friend TaylorPoly exp_t(const TaylorPoly& g) {
        int axis;
        if (!g.single_effective_axis(axis))
            throw GfiError(ErrKind::DomainError, "exp_t needs a univariate polynomial");
        TaylorPoly f(g.base_, g.caps_);
        int d = axis >= 0 ? g.caps_[axis] : 0;
        f.c_[0] = s_exp(g.c_[0]);
        for (int m = 1; m <= d; ++m) {
            S acc{};
            for (int i = 1; i <= m; ++i) acc = acc + s_mul_si(g.c_[i] * f.c_[m - i], i);
            f.c_[m] = s_div_si(acc, m);
        }
        return f;
    }

    // ln of a polynomial with at most one effective variable; constant term
    // must be positive.
    friend TaylorPoly ln_t(const TaylorPoly& g) {
        int axis;
        if (!g.single_effective_axis(axis))
            throw GfiError(ErrKind::DomainError, "ln_t needs a univariate polynomial");
        TaylorPoly f(g.base_, g.caps_);
        int d = axis >= 0 ? g.caps_[axis] : 0;
        f.c_[0] = s_ln(g.c_[0]);
        for (int m = 1; m <= d; ++m) {
            S acc = s_mul_si(g.c_[m], m);
            for (int i = 1; i < m; ++i) acc = acc - s_mul_si(f.c_[i] * g.c_[m - i], i);
            f.c_[m] = s_div_si(acc, m) / g.c_[0];
        }
        return f;
    }

    // g^r for rational r on a polynomial with at most one effective variable.
    friend TaylorPoly pow_t(const TaylorPoly& g, const Rational& r) {
        int axis;
        if (!g.single_effective_axis(axis))
            throw GfiError(ErrKind::DomainError, "pow_t needs a univariate polynomial");
        TaylorPoly f(g.base_, g.caps_);
        int d = axis >= 0 ? g.caps_[axis] : 0;
        if (!s_definitely_nonzero(g.c_[0]))
            throw GfiError(ErrKind::DomainError, "pow_t needs a nonzero constant term");
        f.c_[0] = s_pow_rat(g.c_[0], r);
        for (int m = 1; m <= d; ++m) {
            S acc{};
            for (int j = 1; j <= m; ++j) {
                Rational w = r * Rational(j) + Rational(j) - Rational(m);
                if (w == 0) continue;
                acc = acc + s_rat_like(g.c_[0], w) * g.c_[j] * f.c_[m - j];
            }
            f.c_[m] = s_div_si(acc, m) / g.c_[0];
        }
        return f;
    }

private:
    // An axis with cap 0 carries no dependence, so its base entry is
    // insignificant; base points only have to agree on jointly active axes.
    static std::vector<S> merged_base(const TaylorPoly& a, const TaylorPoly& b) {
        if (a.base_.size() != b.base_.size())
            throw GfiError(ErrKind::DomainError, "operand variable counts differ");
        std::vector<S> base(a.base_.size());
        for (std::size_t i = 0; i < a.base_.size(); ++i) {
            bool aa = a.caps_[i] > 0, bb = b.caps_[i] > 0;
            if (aa && bb && !(a.base_[i] == b.base_[i]))
                throw GfiError(ErrKind::DomainError, "operand base points differ");
            base[i] = aa ? a.base_[i] : (bb ? b.base_[i] : a.base_[i]);
        }
        return base;
    }

    static bool in_range(const TaylorPoly& p, const std::vector<int>& a) {
        for (int i = 0; i < p.nvars(); ++i)
            if (a[i] > p.caps_[i]) return false;
        return true;
    }

    void acc_rec(const TaylorPoly& p, const std::vector<int>& lim,
                 const std::vector<std::size_t>& pst, const std::vector<std::size_t>& ost,
                 int dim, std::size_t poff, std::size_t ooff, const std::optional<S>& scale) {
        if (dim == nvars() - 1 || nvars() == 0) {
            int n = nvars() == 0 ? 0 : lim[dim];
            auto& ctr = TaylorCounters::global();
            if (nvars() == 0) {
                if (scale)
                    c_[0] = c_[0] + p.c_[0] * (*scale);
                else
                    c_[0] = c_[0] + p.c_[0];
                ++ctr.mul_coeff_ops;
                return;
            }
            ctr.mul_coeff_ops += (unsigned long long)(n + 1);
            if (scale) {
                for (int j = 0; j <= n; ++j) {
                    const S& pv = p.c_[poff + (std::size_t)j];
                    if (s_is_zero(pv)) continue;
                    c_[ooff + (std::size_t)j] = c_[ooff + (std::size_t)j] + pv * (*scale);
                }
            } else {
                for (int j = 0; j <= n; ++j) {
                    const S& pv = p.c_[poff + (std::size_t)j];
                    if (s_is_zero(pv)) continue;
                    c_[ooff + (std::size_t)j] = c_[ooff + (std::size_t)j] + pv;
                }
            }
            return;
        }
        for (int j = 0; j <= lim[dim]; ++j)
            acc_rec(p, lim, pst, ost, dim + 1, poff + pst[dim] * (std::size_t)j,
                    ooff + ost[dim] * (std::size_t)j, scale);
    }

    S eval_rec(int dim, std::size_t off, const std::vector<S>& dx) const {
        auto st = detail::strides_of(caps_);
        if (dim == nvars()) return c_[off];
        S acc{};
        for (int j = caps_[dim]; j >= 0; --j) {
            S term = eval_rec(dim + 1, off + st[dim] * (std::size_t)j, dx);
            acc = acc * dx[dim] + term;
        }
        return acc;
    }

    std::vector<S> base_;
    std::vector<int> caps_;
    std::vector<S> c_;
};

// (x_k)^e expanded around w_k, truncated at cap_k: sum_j C(e,j) w^{e-j} u^j.
template <class S>
TaylorPoly<S> monomial_power(const std::vector<S>& base, int k, std::uint64_t e, int cap_k) {
    std::vector<int> caps(base.size(), 0);
    caps[k] = std::min<int>((int)e, cap_k);
    TaylorPoly<S> out(base, caps);
    const S& w = base[k];
    S one = s_one_like(w);
    // Walk j downward so powers of w build by multiplication only (w may be 0).
    int jmax = caps[k];
    S wpow = s_pow_nat(w, e - (std::uint64_t)jmax);
    S binom = one;
    // C(e, jmax)
    for (int t = 0; t < jmax; ++t) binom = s_div_si(s_mul_si(binom, (long)(e - (std::uint64_t)t)), t + 1);
    std::vector<int> idx(base.size(), 0);
    for (int j = jmax; j >= 0; --j) {
        idx[k] = j;
        out.at(idx) = binom * wpow;
        if (j > 0) {
            // C(e, j-1) = C(e, j) * j / (e - j + 1)
            binom = s_div_si(s_mul_si(binom, j), (long)(e - (std::uint64_t)j + 1));
            wpow = wpow * w;
        }
    }
    return out;
}

}  // namespace gfi
