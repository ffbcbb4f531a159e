#pragma once

#include <string>
#include <vector>

#include "gfi/ast.hpp"

namespace gfi {

enum class Support { DiscreteNat, ContinuousNonneg };

struct Validation {
    std::vector<Support> support;         // final classification per variable
    std::vector<std::string> warnings;    // e.g. unverifiable Bernoulli(X) condition
};

// Support of a freshly sampled value.
inline Support support_after_sample(const SampledDist& sd) {
    if (auto* d = std::get_if<Distribution>(&sd)) {
        if (dist_is_continuous(d->kind)) return Support::ContinuousNonneg;
        if (d->kind == DistKind::Dirac && !is_integer(d->params[0]))
            return Support::ContinuousNonneg;
        return Support::DiscreteNat;
    }
    return Support::DiscreteNat;
}

// Support of the target of an affine assignment: discrete only when every
// contributing source is discrete and all coefficients and the constant are
// integers.
inline Support support_after_affine(const Statement& s, const std::vector<Support>& sup) {
    if (!is_integer(s.constant)) return Support::ContinuousNonneg;
    for (auto& [v, c] : s.coeffs) {
        if (c == 0) continue;
        if (!is_integer(c) || sup[v] == Support::ContinuousNonneg)
            return Support::ContinuousNonneg;
    }
    return Support::DiscreteNat;
}

namespace detail {

struct SupportState {
    std::vector<Support> sup;
    std::vector<bool> in_unit;  // provably supported on [0,1]

    static SupportState initial(std::size_t n) {
        // All variables start as Dirac(0).
        return SupportState{std::vector<Support>(n, Support::DiscreteNat),
                            std::vector<bool>(n, true)};
    }

    static SupportState join(const SupportState& a, const SupportState& b) {
        SupportState j = a;
        for (std::size_t i = 0; i < j.sup.size(); ++i) {
            if (b.sup[i] == Support::ContinuousNonneg) j.sup[i] = Support::ContinuousNonneg;
            j.in_unit[i] = j.in_unit[i] && b.in_unit[i];
        }
        return j;
    }
};

class Validator {
public:
    explicit Validator(const Program& p) : prog_(p) {}

    Validation run() {
        SupportState st = SupportState::initial(prog_.vars.size());
        st = statement(prog_.body, st);
        if (prog_.query && ((std::size_t)prog_.query->index >= prog_.vars.size()))
            throw GfiError(ErrKind::UnknownVariable, "query variable not in the program");
        return Validation{st.sup, warnings_};
    }

private:
    void check_var(VarId v, SourceSpan sp) const {
        if (v.index < 0 || (std::size_t)v.index >= prog_.vars.size())
            throw GfiError(ErrKind::UnknownVariable, "variable index out of range", sp);
    }

    void check_prob(const Rational& p, SourceSpan sp, const char* what) const {
        if (p < 0 || p > 1)
            throw GfiError(ErrKind::InvalidProgram,
                           std::string(what) + " must lie in [0, 1]", sp);
    }

    void check_dist(const Distribution& d, SourceSpan sp) const {
        auto need = [&](std::size_t n) {
            if (d.params.size() != n)
                throw GfiError(ErrKind::InvalidProgram,
                               std::string(dist_name(d.kind)) + " takes " + std::to_string(n) +
                                   " parameter(s)",
                               sp);
        };
        switch (d.kind) {
            case DistKind::Dirac:
                need(1);
                if (d.params[0] < 0)
                    throw GfiError(ErrKind::InvalidProgram, "Dirac point must be nonnegative", sp);
                break;
            case DistKind::Bernoulli:
                need(1);
                check_prob(d.params[0], sp, "Bernoulli probability");
                break;
            case DistKind::Categorical: {
                if (d.params.empty())
                    throw GfiError(ErrKind::InvalidProgram, "Categorical needs weights", sp);
                Rational sum(0);
                for (auto& w : d.params) {
                    if (w < 0)
                        throw GfiError(ErrKind::InvalidProgram,
                                       "Categorical weights must be nonnegative", sp);
                    sum += w;
                }
                if (sum != 1)
                    throw GfiError(ErrKind::InvalidProgram, "Categorical weights must sum to 1",
                                   sp);
                break;
            }
            case DistKind::Binomial:
                need(2);
                if (!fits_uint64(d.params[0]))
                    throw GfiError(ErrKind::InvalidProgram, "Binomial count must be a natural",
                                   sp);
                check_prob(d.params[1], sp, "Binomial probability");
                break;
            case DistKind::UniformDisc:
                need(2);
                if (!fits_uint64(d.params[0]) || !fits_uint64(d.params[1]) ||
                    d.params[0] > d.params[1])
                    throw GfiError(ErrKind::InvalidProgram,
                                   "UniformDisc needs naturals l <= m", sp);
                break;
            case DistKind::NegBinomial:
                need(2);
                if (!fits_uint64(d.params[0]))
                    throw GfiError(ErrKind::InvalidProgram,
                                   "NegBinomial count must be a natural", sp);
                check_prob(d.params[1], sp, "NegBinomial probability");
                if (d.params[1] == 0)
                    throw GfiError(ErrKind::InvalidProgram,
                                   "NegBinomial probability must be positive", sp);
                break;
            case DistKind::Geometric:
                need(1);
                check_prob(d.params[0], sp, "Geometric probability");
                if (d.params[0] == 0)
                    throw GfiError(ErrKind::InvalidProgram,
                                   "Geometric probability must be positive", sp);
                break;
            case DistKind::Poisson:
                need(1);
                if (d.params[0] < 0)
                    throw GfiError(ErrKind::InvalidProgram, "Poisson rate must be nonnegative",
                                   sp);
                break;
            case DistKind::Exponential:
                need(1);
                if (d.params[0] <= 0)
                    throw GfiError(ErrKind::InvalidProgram, "Exponential rate must be positive",
                                   sp);
                break;
            case DistKind::Gamma:
                need(2);
                if (d.params[0] <= 0 || d.params[1] <= 0)
                    throw GfiError(ErrKind::InvalidProgram, "Gamma parameters must be positive",
                                   sp);
                break;
            case DistKind::UniformCont:
                need(2);
                if (d.params[0] < 0 || d.params[1] < d.params[0])
                    throw GfiError(ErrKind::InvalidProgram,
                                   "UniformCont needs 0 <= a <= b", sp);
                break;
        }
    }

    static bool dist_in_unit(const Distribution& d) {
        switch (d.kind) {
            case DistKind::Bernoulli:
                return true;
            case DistKind::Dirac:
                return d.params[0] >= 0 && d.params[0] <= 1;
            case DistKind::UniformCont:
                return d.params[1] <= 1;
            case DistKind::Categorical:
                return d.params.size() <= 2;  // support {0, 1}
            case DistKind::Binomial:
                return d.params[0] <= 1;
            case DistKind::UniformDisc:
                return d.params[1] <= 1;
            default:
                return false;
        }
    }

    SupportState statement(const StmtPtr& s, SupportState st) {
        if (!s) return st;
        using K = Statement::Kind;
        switch (s->kind) {
            case K::Skip:
            case K::Fail:
                return st;
            case K::Seq:
                for (auto& c : s->seq) st = statement(c, st);
                return st;
            case K::Affine: {
                check_var(s->target, s->span);
                if (s->constant < 0)
                    throw GfiError(ErrKind::InvalidProgram, "negative affine constant", s->span);
                for (auto& [v, c] : s->coeffs) {
                    check_var(VarId{v}, s->span);
                    if (c < 0)
                        throw GfiError(ErrKind::InvalidProgram, "negative affine coefficient",
                                       s->span);
                }
                st.sup[s->target.index] = support_after_affine(*s, st.sup);
                // Conservative: affine results are not tracked as [0,1].
                st.in_unit[s->target.index] = false;
                // X := 0 and X := c with c in {0,1} stay provably in the unit interval.
                bool all_zero = true;
                for (auto& [v, c] : s->coeffs) {
                    (void)v;
                    if (c != 0) all_zero = false;
                }
                if (all_zero && s->constant >= 0 && s->constant <= 1)
                    st.in_unit[s->target.index] = true;
                return st;
            }
            case K::Sample: {
                check_var(s->target, s->span);
                if (auto* d = std::get_if<Distribution>(&*s->dist)) {
                    check_dist(*d, s->span);
                    st.sup[s->target.index] = support_after_sample(*s->dist);
                    st.in_unit[s->target.index] = dist_in_unit(*d);
                } else {
                    auto& c = std::get<CompoundDistribution>(*s->dist);
                    check_var(c.var, s->span);
                    check_compound(c, st, s->span);
                    st.sup[s->target.index] = Support::DiscreteNat;
                    st.in_unit[s->target.index] = (c.kind == CompoundKind::Bernoulli);
                }
                return st;
            }
            case K::ObserveFrom: {
                if (auto* d = std::get_if<Distribution>(&*s->dist)) {
                    check_dist(*d, s->span);
                    if (support_after_sample(*s->dist) != Support::DiscreteNat)
                        throw GfiError(ErrKind::ContinuousObservation,
                                       "observations require a distribution on the naturals",
                                       s->span);
                } else {
                    auto& c = std::get<CompoundDistribution>(*s->dist);
                    check_var(c.var, s->span);
                    check_compound(c, st, s->span);
                }
                return st;
            }
            case K::ObserveEvent: {
                check_event(s->event, st, s->span);
                return st;
            }
            case K::IfEvent: {
                check_event(s->event, st, s->span);
                SupportState t = statement(s->then_branch, st);
                SupportState e = statement(s->else_branch, st);
                return SupportState::join(t, e);
            }
            default:
                throw GfiError(ErrKind::InvalidProgram,
                               "surface statement reached validation (desugar first)", s->span);
        }
    }

    void check_compound(const CompoundDistribution& c, const SupportState& st, SourceSpan sp) {
        switch (c.kind) {
            case CompoundKind::Binomial:
            case CompoundKind::NegBinomial:
                check_prob(c.param, sp, "compound probability");
                if (c.kind == CompoundKind::NegBinomial && c.param == 0)
                    throw GfiError(ErrKind::InvalidProgram,
                                   "NegBinomial probability must be positive", sp);
                if (st.sup[c.var.index] != Support::DiscreteNat)
                    throw GfiError(ErrKind::ContinuousObservation,
                                   std::string(compound_name(c.kind)) +
                                       " needs a count variable supported on the naturals",
                                   sp);
                break;
            case CompoundKind::Poisson:
                if (c.param < 0)
                    throw GfiError(ErrKind::InvalidProgram,
                                   "Poisson rate scale must be nonnegative", sp);
                break;
            case CompoundKind::Bernoulli:
                // The [0,1] side condition is semantic, not syntactic: warn
                // unless the parameter variable is provably in the unit interval.
                if (!st.in_unit[c.var.index])
                    warnings_.push_back("Bernoulli(" + prog_.vars[c.var.index] +
                                        "): cannot verify that the parameter lies in [0, 1]");
                break;
        }
    }

    void check_event(const Event& ev, const SupportState& st, SourceSpan sp) {
        check_var(ev.var, sp);
        if (st.sup[ev.var.index] != Support::DiscreteNat)
            throw GfiError(ErrKind::UnsupportedEvent,
                           "event on variable '" + prog_.vars[ev.var.index] +
                               "', which is not supported on the naturals",
                           sp);
        for (std::size_t i = 1; i < ev.values.size(); ++i)
            if (ev.values[i] <= ev.values[i - 1])
                throw GfiError(ErrKind::InvalidProgram, "event set must be sorted and distinct",
                               sp);
    }

    const Program& prog_;
    std::vector<std::string> warnings_;
};

}  // namespace detail

// Static validation of a core program: classifies every variable's support
// with a single forward pass and rejects the syntactic restrictions the
// semantics cannot handle.
inline Validation validate(const Program& core) {
    return detail::Validator(core).run();
}

}  // namespace gfi
