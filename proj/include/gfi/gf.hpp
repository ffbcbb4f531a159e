#pragma once

#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "gfi/ast.hpp"
#include "gfi/dist_gf.hpp"
#include "gfi/taylor.hpp"
#include "gfi/validate.hpp"

namespace gfi {

// ---------------------------------------------------------------------------
// Generating-function transformer pipeline. Statements build a DAG of
// operations on the joint generating function; branches share their prefix
// node. Evaluation is demand-driven: a node asked for a Taylor expansion at a
// point computes the points and degree demands for its children, so the
// expansion points follow the substitutions of the semantics. Results are
// memoized per (node, point, demanded degrees).
// ---------------------------------------------------------------------------

struct GfNode;
using GfNodePtr = std::shared_ptr<const GfNode>;

struct GfNode {
    enum class Kind {
        One,                  // initial state: all variables Dirac(0)
        Zero,                 // fail
        Add,                  // branch merge
        Sub,                  // complement: a - b
        Slice,                // G_{X_k in A}
        SampleConst,          // X_k ~ D
        SampleCompound,       // X_k ~ D(X_j)
        SampleBernoulliVar,   // X_k ~ Bernoulli(X_j)
        AffineAssign,         // X_k := a^T X + c
        ObservePmf,           // observe d ~ D, constant parameters
        ObserveBinomial,      // observe d ~ Binomial(X_k, p)
        ObservePoisson,       // observe d ~ Poisson(lambda * X_k)
        ObserveNegBinomial,   // observe d ~ NegBinomial(X_k, p)
        ObserveBernoulliVar,  // observe d ~ Bernoulli(X_k)
        RepAdapt,             // re-express coordinate k from PGF to MGF
    } kind;

    int id = 0;
    std::vector<Rep> reps;  // output coordinate convention per variable
    GfNodePtr a, b;

    int var_k = -1;
    int var_j = -1;
    Distribution dist{};
    CompoundKind ckind{};
    Rational param;                   // p / rate scale
    std::vector<std::uint64_t> set;  // Slice
    std::map<int, Rational> coeffs;  // AffineAssign
    Rational constant;               // AffineAssign
    std::uint64_t d = 0;             // observe value
};

struct GfProgram {
    GfNodePtr root;
    int nvars = 0;
    std::vector<Rep> final_reps;
    std::vector<Support> support;  // final support classification
};

// Taylor truncation order for one evaluation pass: the sum of all observed
// values, plus the sum of the largest element of every event set appearing
// in observations or branches, plus the requested output order.
inline int degree_budget(const Program& core, int query_order, int mass_order) {
    long total = 0;
    walk_statements(core.body, [&](const Statement& s) {
        if (s.kind == Statement::Kind::ObserveFrom) total += (long)s.observe_value;
        if (s.kind == Statement::Kind::ObserveEvent || s.kind == Statement::Kind::IfEvent) {
            const auto& vs = s.event.values;
            if (!vs.empty()) total += (long)vs.back();
        }
    });
    return (int)(total + std::max(query_order, mass_order));
}

namespace detail {

class GfBuilder {
public:
    GfBuilder(const Program& core, bool use_mgf) : prog_(core), use_mgf_(use_mgf) {}

    GfProgram run() {
        int n = (int)prog_.vars.size();
        std::vector<Support> sup(n, Support::DiscreteNat);
        GfNodePtr g = fresh(GfNode::Kind::One, nullptr, nullptr, reps_of(sup));
        g = statement(prog_.body, g, sup);
        GfProgram out;
        out.root = g;
        out.nvars = n;
        out.final_reps = g->reps;
        out.support = sup;
        return out;
    }

private:
    std::vector<Rep> reps_of(const std::vector<Support>& sup) const {
        std::vector<Rep> reps(sup.size(), Rep::PGF);
        if (use_mgf_)
            for (std::size_t i = 0; i < sup.size(); ++i)
                if (sup[i] == Support::ContinuousNonneg) reps[i] = Rep::MGF;
        return reps;
    }

    GfNodePtr fresh(GfNode::Kind kind, GfNodePtr a, GfNodePtr b, std::vector<Rep> reps) {
        auto n = std::make_shared<GfNode>();
        n->kind = kind;
        n->id = next_id_++;
        n->a = std::move(a);
        n->b = std::move(b);
        n->reps = std::move(reps);
        return n;
    }

    GfNodePtr statement(const StmtPtr& s, GfNodePtr g, std::vector<Support>& sup) {
        if (!s) return g;
        using K = Statement::Kind;
        switch (s->kind) {
            case K::Skip:
                return g;
            case K::Fail:
                return fresh(GfNode::Kind::Zero, nullptr, nullptr, g->reps);
            case K::Seq:
                for (auto& c : s->seq) g = statement(c, g, sup);
                return g;
            case K::Sample: {
                int k = s->target.index;
                sup[k] = support_after_sample(*s->dist);
                auto reps = reps_of(sup);
                if (auto* d = std::get_if<Distribution>(&*s->dist)) {
                    auto n = fresh(GfNode::Kind::SampleConst, g, nullptr, reps);
                    auto* m = const_cast<GfNode*>(n.get());
                    m->var_k = k;
                    m->dist = *d;
                    return n;
                }
                auto& c = std::get<CompoundDistribution>(*s->dist);
                auto n = fresh(c.kind == CompoundKind::Bernoulli
                                   ? GfNode::Kind::SampleBernoulliVar
                                   : GfNode::Kind::SampleCompound,
                               g, nullptr, reps);
                auto* m = const_cast<GfNode*>(n.get());
                m->var_k = k;
                m->var_j = c.var.index;
                m->ckind = c.kind;
                m->param = c.param;
                return n;
            }
            case K::Affine: {
                int k = s->target.index;
                sup[k] = support_after_affine(*s, sup);
                auto n = fresh(GfNode::Kind::AffineAssign, g, nullptr, reps_of(sup));
                auto* m = const_cast<GfNode*>(n.get());
                m->var_k = k;
                m->coeffs = s->coeffs;
                m->constant = s->constant;
                return n;
            }
            case K::ObserveFrom: {
                if (auto* d = std::get_if<Distribution>(&*s->dist)) {
                    auto n = fresh(GfNode::Kind::ObservePmf, g, nullptr, g->reps);
                    auto* m = const_cast<GfNode*>(n.get());
                    m->dist = *d;
                    m->d = s->observe_value;
                    return n;
                }
                auto& c = std::get<CompoundDistribution>(*s->dist);
                GfNode::Kind kind;
                switch (c.kind) {
                    case CompoundKind::Binomial: kind = GfNode::Kind::ObserveBinomial; break;
                    case CompoundKind::Poisson: kind = GfNode::Kind::ObservePoisson; break;
                    case CompoundKind::NegBinomial: kind = GfNode::Kind::ObserveNegBinomial; break;
                    case CompoundKind::Bernoulli: kind = GfNode::Kind::ObserveBernoulliVar; break;
                }
                auto n = fresh(kind, g, nullptr, g->reps);
                auto* m = const_cast<GfNode*>(n.get());
                m->var_k = c.var.index;
                m->param = c.param;
                m->d = s->observe_value;
                return n;
            }
            case K::ObserveEvent:
                return event_state(g, s->event);
            case K::IfEvent: {
                GfNodePtr then_in = slice(g, s->event.var.index, s->event.values);
                GfNodePtr else_in = fresh(GfNode::Kind::Sub, g, then_in, g->reps);
                if (s->event.complement) std::swap(then_in, else_in);
                std::vector<Support> sup_then = sup;
                std::vector<Support> sup_else = sup;
                GfNodePtr t = statement(s->then_branch, then_in, sup_then);
                GfNodePtr e = statement(s->else_branch, else_in, sup_else);
                // Join: continuous wins; adapt the representation of any
                // branch that disagrees with the joined one.
                std::vector<Support> joined(sup.size());
                for (std::size_t i = 0; i < sup.size(); ++i)
                    joined[i] = (sup_then[i] == Support::ContinuousNonneg ||
                                 sup_else[i] == Support::ContinuousNonneg)
                                    ? Support::ContinuousNonneg
                                    : Support::DiscreteNat;
                auto target = reps_of(joined);
                t = adapt(t, target);
                e = adapt(e, target);
                sup = joined;
                return fresh(GfNode::Kind::Add, t, e, target);
            }
            default:
                throw GfiError(ErrKind::InvalidProgram,
                               "surface statement reached the GF translation", s->span);
        }
    }

    GfNodePtr slice(GfNodePtr g, int k, const std::vector<std::uint64_t>& values) {
        auto n = fresh(GfNode::Kind::Slice, g, nullptr, g->reps);
        auto* m = const_cast<GfNode*>(n.get());
        m->var_k = k;
        m->set = values;
        return n;
    }

    GfNodePtr event_state(GfNodePtr g, const Event& ev) {
        GfNodePtr s = slice(g, ev.var.index, ev.values);
        if (!ev.complement) return s;
        return fresh(GfNode::Kind::Sub, g, s, g->reps);
    }

    GfNodePtr adapt(GfNodePtr g, const std::vector<Rep>& target) {
        for (std::size_t i = 0; i < target.size(); ++i) {
            if (g->reps[i] == Rep::PGF && target[i] == Rep::MGF) {
                auto reps = g->reps;
                reps[i] = Rep::MGF;
                auto n = fresh(GfNode::Kind::RepAdapt, g, nullptr, reps);
                const_cast<GfNode*>(n.get())->var_k = (int)i;
                g = n;
            }
        }
        return g;
    }

    const Program& prog_;
    bool use_mgf_;
    int next_id_ = 0;
};

}  // namespace detail

// Translates a validated core program into its GF transformer pipeline.
inline GfProgram build_gf(const Program& core, bool use_mgf = true) {
    return detail::GfBuilder(core, use_mgf).run();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalOptions {
    bool memo = true;
    // Demands beyond this are a symptom of a miscomputed budget; fail loudly
    // instead of exhausting memory.
    int demand_limit = 200000;
};

template <class K>
class GfEvaluator {
public:
    using S = typename K::Scalar;
    using Poly = TaylorPoly<S>;

    GfEvaluator(const K& kern, EvalOptions opts = {}) : kern_(kern), opts_(opts) {}

    Poly eval(const GfNode& n, const std::vector<S>& point, std::vector<int> caps) {
        for (int& c : caps) {
            if (c > opts_.demand_limit)
                throw GfiError(ErrKind::DomainError, "degree demand exceeds the configured limit");
            if (c < 0) c = 0;
        }
        if (opts_.memo) {
            auto it = cache_.find(n.id);
            if (it != cache_.end()) {
                for (auto& e : it->second) {
                    if (e.point != point) continue;
                    bool dominates = true;
                    for (std::size_t i = 0; i < caps.size(); ++i)
                        if (e.caps[i] < caps[i]) { dominates = false; break; }
                    if (dominates) return e.poly.truncated(caps);
                }
            }
        }
        Poly out = compute(n, point, caps);
        // Canonicalize: every axis of a node result sits at the ambient
        // point. Axes whose base drifted must be degenerate (an operand was
        // constant there and an operation activated the axis); rebasing a
        // constant axis is the identity.
        for (std::size_t i = 0; i < point.size(); ++i) {
            if (out.base()[i] == point[i]) continue;
            if (!out.constant_along_axis((int)i))
                throw GfiError(ErrKind::DomainError,
                               "internal: node result expanded at the wrong point");
            out.base_mut()[i] = point[i];
        }
        if (opts_.memo) {
            auto& entries = cache_[n.id];
            // Drop entries this one dominates.
            for (auto it = entries.begin(); it != entries.end();) {
                bool dominated = it->point == point;
                if (dominated)
                    for (std::size_t i = 0; i < caps.size(); ++i)
                        if (it->caps[i] > caps[i]) { dominated = false; break; }
                it = dominated ? entries.erase(it) : ++it;
            }
            entries.push_back(Entry{point, caps, out});
        }
        return out;
    }

private:
    struct Entry {
        std::vector<S> point;
        std::vector<int> caps;
        Poly poly;
    };

    S marg_value(Rep r) const { return r == Rep::PGF ? kern_.integer(1) : kern_.integer(0); }

    static std::vector<int> with(std::vector<int> v, int i, int val) {
        v[i] = val;
        return v;
    }
    static std::vector<S> with_s(std::vector<S> v, int i, S val) {
        v[i] = std::move(val);
        return v;
    }

    // Activating a previously constant axis needs its base entry set to the
    // ambient point first.
    Poly embed(Poly p, const std::vector<S>& point, const std::vector<int>& caps) {
        for (std::size_t i = 0; i < point.size(); ++i)
            if (p.caps()[i] == 0) p.base_mut()[i] = point[i];
        return p.truncated(caps);
    }

    Poly compute(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        using Kd = GfNode::Kind;
        switch (n.kind) {
            case Kd::One:
                return Poly::constant(kern_.integer(1), w, caps);
            case Kd::Zero:
                return Poly::constant(kern_.integer(0), w, caps);
            case Kd::Add:
                return add(eval(*n.a, w, caps), eval(*n.b, w, caps)).truncated(caps);
            case Kd::Sub:
                return sub(eval(*n.a, w, caps), eval(*n.b, w, caps)).truncated(caps);
            case Kd::Slice:
                return slice_node(n, w, caps);
            case Kd::SampleConst:
                return sample_const(n, w, caps);
            case Kd::SampleCompound:
                return sample_compound(n, w, caps);
            case Kd::SampleBernoulliVar:
                return sample_bernoulli_var(n, w, caps);
            case Kd::AffineAssign:
                return affine_assign(n, w, caps);
            case Kd::ObservePmf: {
                S s = dist_taylor::pmf_scalar(kern_, n.dist, n.d);
                return scale(s, eval(*n.a, w, caps));
            }
            case Kd::ObserveBinomial:
                return observe_binomial(n, w, caps);
            case Kd::ObservePoisson:
                return observe_poisson(n, w, caps);
            case Kd::ObserveNegBinomial:
                return observe_negbinomial(n, w, caps);
            case Kd::ObserveBernoulliVar:
                return observe_bernoulli_var(n, w, caps);
            case Kd::RepAdapt:
                return rep_adapt(n, w, caps);
        }
        throw GfiError(ErrKind::InvalidProgram, "unhandled GF node");
    }

    // G_{X_k in A}(x) = sum_{i in A} (d_k^i G(x[k -> 0]) / i!) x_k^i.
    Poly slice_node(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        int k = n.var_k;
        if (n.set.empty()) return Poly::constant(kern_.integer(0), w, caps);
        int maxA = (int)n.set.back();
        Poly child = eval(*n.a, with_s(w, k, kern_.integer(0)), with(caps, k, maxA));
        Poly out = Poly::constant(kern_.integer(0), w, caps);
        std::vector<int> zero(w.size(), 0);
        for (std::uint64_t i : n.set) {
            if ((int)i > child.caps()[k]) continue;
            Poly si = slice_axis(child, k, (int)i);
            si.base_mut()[k] = w[k];
            Poly xi = monomial_power(w, k, i, caps[k]);
            out.accumulate_shifted(mul(si, xi, caps), zero, std::nullopt);
        }
        return out;
    }

    Poly sample_const(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        int k = n.var_k;
        Rep child_rep = n.a->reps[k];
        Poly child = eval(*n.a, with_s(w, k, marg_value(child_rep)), with(caps, k, 0));
        Poly f = dist_taylor::dist_gf(kern_, n.dist, n.reps[k], k, w, caps[k]);
        return mul(child, f, caps);
    }

    // gf_{D(1)} value at the scalar x-coordinate xk.
    S g1_value(CompoundKind ck, const Rational& param, const S& xk) const {
        switch (ck) {
            case CompoundKind::Binomial:
                return kern_.rat(1 - param) + kern_.rat(param) * xk;
            case CompoundKind::NegBinomial: {
                S den = kern_.integer(1) - kern_.rat(1 - param) * xk;
                if (!s_definitely_positive(den))
                    throw GfiError(ErrKind::DomainError,
                                   "geometric generating function evaluated outside its domain");
                return kern_.rat(param) / den;
            }
            case CompoundKind::Poisson:
                return s_exp(kern_.rat(param) * (xk - kern_.integer(1)));
            case CompoundKind::Bernoulli:
                break;
        }
        throw GfiError(ErrKind::InvalidProgram, "not a power-compound distribution");
    }

    Distribution g1_dist(CompoundKind ck, const Rational& param) const {
        switch (ck) {
            case CompoundKind::Binomial:
                return Distribution{DistKind::Binomial, {Rational(1), param}};
            case CompoundKind::NegBinomial:
                return Distribution{DistKind::Geometric, {param}};
            case CompoundKind::Poisson:
                return Distribution{DistKind::Poisson, {param}};
            case CompoundKind::Bernoulli:
                break;
        }
        throw GfiError(ErrKind::InvalidProgram, "not a power-compound distribution");
    }

    // X_k ~ D(X_j): G(x[k -> 1, j -> x_j * gf_{D(1)}(x_k)]). When k == j the
    // old variable is consumed: G(x[k -> gf_{D(1)}(x_k)]).
    Poly sample_compound(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        int k = n.var_k, j = n.var_j;
        Rep out_k = n.reps[k];  // PGF: compounds produce naturals
        if (out_k != Rep::PGF)
            throw GfiError(ErrKind::InvalidProgram, "compound sample must target a PGF coordinate");

        if (k == j) {
            Rep child_k = n.a->reps[k];
            if (child_k == Rep::MGF) {
                // Only Poisson reaches a continuous count; ln gf is linear.
                if (n.ckind != CompoundKind::Poisson)
                    throw GfiError(ErrKind::InvalidProgram,
                                   "compound count variable must be discrete");
                S lam = kern_.rat(n.param);
                S c0 = lam * (w[k] - kern_.integer(1));
                Poly h = dist_taylor::linear(kern_, w, k, c0, lam, std::max(caps[k], 1));
                Poly child = eval(*n.a, with_s(w, k, c0), caps);
                return substitute(child, k, h, caps);
            }
            S v = g1_value(n.ckind, n.param, w[k]);
            Poly h = dist_taylor::dist_gf(kern_, g1_dist(n.ckind, n.param), Rep::PGF, k, w,
                                          std::max(caps[k], 1));
            Poly child = eval(*n.a, with_s(w, k, v), caps);
            return substitute(child, k, h, caps);
        }

        Rep child_j = n.a->reps[j];
        Rep child_k = n.a->reps[k];
        std::vector<S> wc = w;
        wc[k] = marg_value(child_k);
        Poly h;
        if (child_j == Rep::PGF) {
            S g1 = g1_value(n.ckind, n.param, w[k]);
            wc[j] = w[j] * g1;
            Poly xj = monomial_power(w, j, 1, 1);
            Poly g1p = dist_taylor::dist_gf(kern_, g1_dist(n.ckind, n.param), Rep::PGF, k, w,
                                            std::max(caps[k], 1));
            std::vector<int> hcaps(w.size(), 0);
            hcaps[j] = 1;
            hcaps[k] = g1p.caps()[k];
            h = mul(xj, g1p, hcaps);
        } else {
            // MGF j-coordinate: t_j' = t_j + ln gf_{D(1)}(x_k); only the
            // Poisson compound keeps this log-free: t_j + lambda (x_k - 1).
            if (n.ckind != CompoundKind::Poisson)
                throw GfiError(ErrKind::InvalidProgram,
                               "compound count variable must be discrete");
            S lam = kern_.rat(n.param);
            S shift = lam * (w[k] - kern_.integer(1));
            wc[j] = w[j] + shift;
            std::vector<int> hcaps(w.size(), 0);
            hcaps[j] = 1;
            hcaps[k] = std::max(caps[k], 1);
            Poly hp(w, hcaps);
            std::vector<int> idx(w.size(), 0);
            hp.at(idx) = wc[j];
            idx[j] = 1;
            hp.at(idx) = kern_.integer(1);
            idx[j] = 0;
            idx[k] = 1;
            hp.at(idx) = lam;
            h = hp;
        }
        std::vector<int> ccaps = caps;
        ccaps[k] = 0;
        ccaps[j] = caps[j] + caps[k];
        Poly child = eval(*n.a, wc, ccaps);
        return substitute(child, j, h, caps);
    }

    // X_k ~ Bernoulli(X_j): G(x[k -> 1]) + x_j (x_k - 1) d_j G(x[k -> 1]).
    // When k == j the old variable is consumed and no x_j factor remains:
    // G(x[k -> 1]) + (x_k - 1) d_k G(x[k -> 1]).
    Poly sample_bernoulli_var(const GfNode& n, const std::vector<S>& w,
                              const std::vector<int>& caps) {
        int k = n.var_k, j = n.var_j;
        Rep child_k = n.a->reps[k];
        Rep child_j = n.a->reps[j];
        // (x_k - 1): constant (w_k - 1), slope 1 in the (discrete) k-axis.
        Poly fk = dist_taylor::linear(kern_, w, k, w[k] - kern_.integer(1), kern_.integer(1),
                                      std::max(std::min(caps[k], 1), 1));
        if (k == j) {
            std::vector<int> ccaps = caps;
            ccaps[k] = 1;
            Poly A = eval(*n.a, with_s(w, k, marg_value(child_k)), ccaps);
            Poly s0 = slice_axis(A, k, 0);
            Poly s1 = slice_axis(A, k, 1);  // d_k G at the marginalization point
            Poly t2 = mul(s1, fk, caps);
            return add(embed(std::move(s0), w, caps), t2).truncated(caps);
        }
        std::vector<int> ccaps = caps;
        ccaps[k] = 0;
        ccaps[j] = caps[j] + 1;
        Poly A = eval(*n.a, with_s(w, k, marg_value(child_k)), ccaps);
        Poly term = derive(A, j);
        if (child_j == Rep::PGF) {
            Poly xj = monomial_power(w, j, 1, std::max(caps[j], 1));
            term = mul(term, xj, with(caps, k, 0));
        }
        Poly t2 = mul(term, fk, caps);
        return add(embed(std::move(A), w, caps), t2).truncated(caps);
    }

    Poly affine_assign(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        int k = n.var_k;
        Rep out_k = n.reps[k];
        Rational a_k(0);
        std::vector<std::pair<int, Rational>> sources;
        for (auto& [v, c] : n.coeffs) {
            if (c == 0) continue;
            if (v == k) a_k = c;
            else sources.emplace_back(v, c);
        }
        const auto& child_reps = n.a->reps;

        // Scalar coordinate values of the child's expansion point.
        std::vector<S> wc = w;
        std::vector<int> ccaps = caps;
        S one = kern_.integer(1);
        // t-value of the output k coordinate (only needed in MGF cases).
        auto out_k_tval = [&]() -> S {
            if (out_k == Rep::MGF) return w[k];
            return s_ln(w[k]);
        };
        auto out_k_xval = [&]() -> S {
            if (out_k == Rep::PGF) return w[k];
            return s_exp(w[k]);
        };

        if (a_k == 0) {
            wc[k] = marg_value(child_reps[k]);
            ccaps[k] = 0;
        } else if (child_reps[k] == Rep::PGF && out_k == Rep::PGF) {
            wc[k] = s_pow_rat(w[k], a_k);
            ccaps[k] = caps[k];
        } else if (child_reps[k] == Rep::PGF && out_k == Rep::MGF) {
            wc[k] = s_exp(kern_.rat(a_k) * w[k]);
            ccaps[k] = caps[k];
        } else if (child_reps[k] == Rep::MGF && out_k == Rep::MGF) {
            wc[k] = kern_.rat(a_k) * w[k];
            ccaps[k] = caps[k];
        } else {
            // MGF child with a PGF output needs ln(w_k).
            wc[k] = kern_.rat(a_k) * s_ln(w[k]);
            ccaps[k] = caps[k];
        }
        for (auto& [i, a_i] : sources) {
            if (child_reps[i] == Rep::PGF) {
                S xk = out_k == Rep::PGF ? s_pow_rat(w[k], a_i)
                                         : s_exp(kern_.rat(a_i) * w[k]);
                wc[i] = w[i] * xk;
            } else {
                wc[i] = w[i] + kern_.rat(a_i) * out_k_tval();
            }
            ccaps[i] = caps[i] + caps[k];
        }

        Poly g = eval(*n.a, wc, ccaps);

        // Substitute the target slot first, then each source slot; the
        // replacement terms reference only out-variables and their own slot.
        std::vector<int> running = ccaps;
        if (a_k == 0) running[k] = caps[k];  // axis is free for output degrees
        auto do_subst = [&](int slot, const Poly& h) {
            running[slot] = caps[slot];
            g = substitute(g, slot, h, running);
        };
        if (a_k != 0) {
            int cap_k = std::max(caps[k], 1);
            if (child_reps[k] == Rep::PGF && out_k == Rep::PGF) {
                do_subst(k, monomial_power(w, k, to_uint64(a_k), cap_k));
            } else if (child_reps[k] == Rep::PGF && out_k == Rep::MGF) {
                do_subst(k, exp_t(dist_taylor::linear(kern_, w, k, kern_.rat(a_k) * w[k],
                                                      kern_.rat(a_k), cap_k)));
            } else if (child_reps[k] == Rep::MGF && out_k == Rep::MGF) {
                do_subst(k, dist_taylor::linear(kern_, w, k, kern_.rat(a_k) * w[k],
                                                kern_.rat(a_k), cap_k));
            } else {
                do_subst(k, scale(kern_.rat(a_k),
                                  ln_t(dist_taylor::linear(kern_, w, k, w[k], one, cap_k))));
            }
        }
        for (auto& [i, a_i] : sources) {
            int cap_k = std::max(caps[k], 1);
            std::vector<int> hcaps(w.size(), 0);
            hcaps[i] = 1;
            hcaps[k] = cap_k;
            if (child_reps[i] == Rep::PGF) {
                Poly xi = monomial_power(w, i, 1, 1);
                Poly xk;
                if (out_k == Rep::PGF) {
                    xk = monomial_power(w, k, to_uint64(a_i), cap_k);
                    hcaps[k] = xk.caps()[k];
                } else {
                    xk = exp_t(dist_taylor::linear(kern_, w, k, kern_.rat(a_i) * w[k],
                                                   kern_.rat(a_i), cap_k));
                }
                do_subst(i, mul(xi, xk, hcaps));
            } else {
                Poly hp(w, hcaps);
                std::vector<int> idx(w.size(), 0);
                hp.at(idx) = wc[i];
                idx[i] = 1;
                hp.at(idx) = one;
                idx[i] = 0;
                idx[k] = 1;
                hp.at(idx) = kern_.rat(a_i);
                do_subst(i, hp);
            }
        }

        if (n.constant != 0) {
            if (out_k == Rep::PGF) {
                if (!is_integer(n.constant))
                    throw GfiError(ErrKind::InvalidProgram,
                                   "fractional shift on a discrete coordinate");
                g = mul(g, monomial_power(w, k, to_uint64(n.constant), caps[k]), caps);
            } else {
                S c = kern_.rat(n.constant);
                g = mul(g, exp_t(dist_taylor::linear(kern_, w, k, c * w[k], c,
                                                     std::max(caps[k], 1))),
                        caps);
            }
        }
        (void)out_k_xval;
        return embed(std::move(g), w, caps);
    }

    // observe d ~ Binomial(X_k, p): (1/d!) (p x_k)^d d_k^d G(x[k -> (1-p) x_k]).
    Poly observe_binomial(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        int k = n.var_k;
        int d = (int)n.d;
        S q = kern_.rat(1 - n.param);
        Poly child = eval(*n.a, with_s(w, k, q * w[k]), with(caps, k, caps[k] + d));
        Poly f = derive_frac(child, k, d);
        f = rescale_axis(f, k, q, w[k]);
        Poly xkd = monomial_power(w, k, (std::uint64_t)d, caps[k]);
        return scale(s_pow_nat(kern_.rat(n.param), (std::uint64_t)d), mul(f, xkd, caps));
    }

    // observe d ~ Poisson(lambda X_k): (1/d!) D^d G(x[k -> e^-lambda x_k]),
    // with D = lambda x_k d_k; in the MGF coordinate D is plain lambda d_t.
    Poly observe_poisson(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        int k = n.var_k;
        int d = (int)n.d;
        if (n.param == 0) {
            // Poisson(0) is Dirac(0): the observation is an indicator.
            Poly child = eval(*n.a, w, caps);
            if (d == 0) return child;
            return Poly::constant(kern_.integer(0), w, caps);
        }
        if (n.a->reps[k] == Rep::MGF) {
            S lam = kern_.rat(n.param);
            Poly child = eval(*n.a, with_s(w, k, w[k] - lam), with(caps, k, caps[k] + d));
            Poly f = derive_frac(child, k, d);
            f.base_mut()[k] = w[k];  // t_k -> t_k - lambda is a pure relabel
            return scale(s_pow_nat(lam, (std::uint64_t)d), f);
        }
        S lam = kern_.rat(n.param);
        S decay = s_exp(-lam);
        S wk_child = decay * w[k];
        std::vector<int> rc = with(caps, k, caps[k] + d);
        Poly g = eval(*n.a, with_s(w, k, wk_child), rc);
        S factor = kern_.integer(1);
        for (int t = 1; t <= d; ++t) {
            g = derive(g, k);
            rc[k] -= 1;
            Poly xk = monomial_power(g.base(), k, 1, std::max(rc[k], 1));
            g = mul(g, xk, rc);
            factor = s_div_si(factor * lam, t);
        }
        g = rescale_axis(g, k, decay, w[k]);
        return scale(factor, g).truncated(caps);
    }

    // observe d ~ NegBinomial(X_k, p):
    // (1/d!) sum_i d_k^i G(x[k -> p x_k]) p^i x_k^i (1-p)^d L_{d,i}.
    Poly observe_negbinomial(const GfNode& n, const std::vector<S>& w,
                             const std::vector<int>& caps) {
        int k = n.var_k;
        int d = (int)n.d;
        S p = kern_.rat(n.param);
        Poly child = eval(*n.a, with_s(w, k, p * w[k]), with(caps, k, caps[k] + d));
        std::vector<BigInt> lah = lah_row((std::uint64_t)d);
        Rational qd = s_pow_rat(Rational(1) - n.param, Rational(d));
        BigInt dfact = factorial_big((std::uint64_t)d);
        Poly out = Poly::constant(kern_.integer(0), w, caps);
        std::vector<int> zero(w.size(), 0);
        Poly deriv = child;  // d_k^i G as raw derivatives, built incrementally
        Rational ppow(1);
        for (int i = 0; i <= d; ++i) {
            if (lah[i] != 0) {
                Rational s = Rational(lah[i]) * qd * ppow / Rational(dfact);
                s.canonicalize();
                Poly term = rescale_axis(deriv, k, p, w[k]);
                Poly xki = monomial_power(w, k, (std::uint64_t)i, caps[k]);
                out.accumulate_shifted(mul(term, xki, caps), zero, kern_.rat(s));
            }
            if (i < d) {
                deriv = raw_derive(deriv, k);
                ppow *= n.param;
            }
        }
        return out;
    }

    // observe d ~ Bernoulli(X_k): d=0 -> G - x_k d_k G; d=1 -> x_k d_k G; else 0.
    Poly observe_bernoulli_var(const GfNode& n, const std::vector<S>& w,
                               const std::vector<int>& caps) {
        int k = n.var_k;
        if (n.d >= 2) return Poly::constant(kern_.integer(0), w, caps);
        Poly A = eval(*n.a, w, with(caps, k, caps[k] + 1));
        Poly term = derive(A, k);
        if (n.a->reps[k] == Rep::PGF) {
            Poly xk = monomial_power(w, k, 1, std::max(caps[k], 1));
            term = mul(term, xk, caps);
        } else {
            term = term.truncated(caps);
        }
        if (n.d == 1) return term;
        return sub(A.truncated(caps), term);
    }

    // H(t) = G(x[k -> e^{t_k}]) for a variable that joined a continuous branch.
    Poly rep_adapt(const GfNode& n, const std::vector<S>& w, const std::vector<int>& caps) {
        int k = n.var_k;
        S xk = s_exp(w[k]);
        Poly child = eval(*n.a, with_s(w, k, xk), caps);
        Poly h = exp_t(dist_taylor::linear(kern_, w, k, w[k], kern_.integer(1),
                                           std::max(caps[k], 1)));
        return substitute(child, k, h, caps);
    }

    // Raw k-derivative in Taylor-coefficient storage.
    static Poly raw_derive(const Poly& p, int k) { return derive(p, k); }

    // Row d of the Lah triangle: L_{0,0} = 1, L_{d+1,i} = (d+i) L_{d,i} + L_{d,i-1}.
    static std::vector<BigInt> lah_row(std::uint64_t d) {
        std::vector<BigInt> row{BigInt(1)};
        for (std::uint64_t n = 0; n < d; ++n) {
            std::vector<BigInt> next(n + 2, BigInt(0));
            for (std::uint64_t i = 0; i <= n + 1; ++i) {
                BigInt v(0);
                if (i <= n) v += BigInt((long)(n + i)) * row[i];
                if (i >= 1) v += row[i - 1];
                next[i] = v;
            }
            row = std::move(next);
        }
        return row;
    }

    const K& kern_;
    EvalOptions opts_;
    std::unordered_map<int, std::vector<Entry>> cache_;

public:
    static std::vector<BigInt> lah_numbers(std::uint64_t d) { return lah_row(d); }
};

// Point for one evaluation pass, in x-space:1 everywhere except an optional
// 0 at a discrete variable whose masses are being extracted.
struct EvalRequest {
    std::vector<Rational> point;
    int order = 0;
};

template <class K>
TaylorPoly<typename K::Scalar> eval_program(const GfProgram& gp, const EvalRequest& req,
                                            const K& kern, EvalOptions opts = {}) {
    using S = typename K::Scalar;
    if ((int)req.point.size() != gp.nvars)
        throw GfiError(ErrKind::DomainError, "evaluation point has the wrong arity");
    std::vector<S> point(gp.nvars);
    for (int i = 0; i < gp.nvars; ++i) {
        const Rational& x = req.point[i];
        if (x != 0 && x != 1)
            throw GfiError(ErrKind::DomainError, "evaluation points must have entries 0 or 1");
        if (gp.final_reps[i] == Rep::MGF) {
            if (x == 0)
                throw GfiError(ErrKind::DomainError,
                               "x = 0 lies outside the domain for a continuous variable");
            point[i] = kern.integer(0);  // t = ln 1
        } else {
            if (x == 0 && gp.support[i] == Support::ContinuousNonneg)
                throw GfiError(ErrKind::DomainError,
                               "x = 0 lies outside the domain for a continuous variable");
            point[i] = kern.rat(x);
        }
    }
    std::vector<int> caps(gp.nvars, req.order);
    GfEvaluator<K> ev(kern, opts);
    if (!gp.root) return TaylorPoly<S>::constant(kern.integer(1), point, caps);
    return ev.eval(*gp.root, point, caps);
}

}  // namespace gfi
