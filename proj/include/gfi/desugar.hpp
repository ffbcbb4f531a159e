#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "gfi/ast.hpp"

namespace gfi {

struct DesugarOptions {
    // Expand observe statements through a fresh variable instead of the
    // optimized in-place rules; used for differential testing.
    bool naive_observe = false;
};

namespace detail {

class Desugarer {
public:
    Desugarer(std::vector<std::string> vars, DesugarOptions opts)
        : vars_(std::move(vars)), opts_(opts) {}

    std::vector<std::string> vars() && { return std::move(vars_); }

    // One scratch variable serves every sugar site: each use starts by
    // resampling it, so earlier contents never leak into later uses.
    VarId scratch() {
        if (scratch_.index < 0) {
            std::string name = "_t";
            int suffix = 0;
            while (std::find(vars_.begin(), vars_.end(), name) != vars_.end())
                name = "_t" + std::to_string(++suffix);
            vars_.push_back(name);
            scratch_.index = (int)vars_.size() - 1;
        }
        return scratch_;
    }

    StmtPtr statement(const StmtPtr& s) {
        if (!s) return s;
        using K = Statement::Kind;
        switch (s->kind) {
            case K::Skip:
            case K::Fail:
            case K::Sample:
                return s;
            case K::Seq: {
                std::vector<StmtPtr> out;
                out.reserve(s->seq.size());
                bool changed = false;
                for (auto& c : s->seq) {
                    StmtPtr d = statement(c);
                    changed |= (d != c);
                    out.push_back(std::move(d));
                }
                if (!changed) return s;
                return stmt_seq(std::move(out), s->span);
            }
            case K::Affine: {
                check_affine(*s);
                return s;
            }
            case K::AffineAdd: {
                // X_k += a^T X + c  ~>  X_k := (a[k -> a_k + 1])^T X + c
                Statement t;
                t.kind = K::Affine;
                t.span = s->span;
                t.target = s->target;
                t.coeffs = s->coeffs;
                t.constant = s->constant;
                t.coeffs[s->target.index] += 1;
                check_affine(t);
                return make_stmt(std::move(t));
            }
            case K::SampleAdd: {
                // X_k +~ D  ~>  _t ~ D; X_k := X_k + _t
                VarId tmp = scratch();
                Statement smp;
                smp.kind = K::Sample;
                smp.span = s->span;
                smp.target = tmp;
                smp.dist = s->dist;
                Statement aff;
                aff.kind = K::Affine;
                aff.span = s->span;
                aff.target = s->target;
                aff.coeffs[s->target.index] = Rational(1);
                aff.coeffs[tmp.index] = Rational(1);
                return stmt_seq({make_stmt(std::move(smp)), make_stmt(std::move(aff))}, s->span);
            }
            case K::ObserveFrom: {
                if (!opts_.naive_observe) return s;
                // _t ~ D; observe _t = d  (the fresh-variable expansion)
                VarId tmp = scratch();
                Statement smp;
                smp.kind = K::Sample;
                smp.span = s->span;
                smp.target = tmp;
                smp.dist = s->dist;
                Event ev{tmp, {s->observe_value}, false};
                return stmt_seq({make_stmt(std::move(smp)), observe_event(ev, s->span)}, s->span);
            }
            case K::ObserveEvent: {
                if (!opts_.naive_observe) return s;
                return observe_event(s->event, s->span);
            }
            case K::IfEvent: {
                StmtPtr t = statement(s->then_branch);
                StmtPtr e = statement(s->else_branch);
                if (t == s->then_branch && e == s->else_branch) return s;
                Statement n = *s;
                n.then_branch = t;
                n.else_branch = e;
                return make_stmt(std::move(n));
            }
            case K::ObserveCond:
                return lower_observe(s->cond, s->span);
            case K::IfCond:
                return lower_if(s->cond, s->then_branch, s->else_branch, s->span);
        }
        return s;
    }

private:
    void check_affine(const Statement& s) {
        if (s.constant < 0)
            throw GfiError(ErrKind::InvalidProgram, "negative affine constant", s.span);
        for (auto& [v, c] : s.coeffs) {
            (void)v;
            if (c < 0)
                throw GfiError(ErrKind::InvalidProgram, "negative affine coefficient", s.span);
        }
    }

    StmtPtr observe_event(const Event& ev, SourceSpan sp) {
        if (!opts_.naive_observe) {
            Statement o;
            o.kind = Statement::Kind::ObserveEvent;
            o.span = sp;
            o.event = ev;
            return make_stmt(std::move(o));
        }
        // observe phi  ~>  if phi { skip } else { fail }
        Statement f;
        f.kind = Statement::Kind::Fail;
        f.span = sp;
        Statement i;
        i.kind = Statement::Kind::IfEvent;
        i.span = sp;
        i.event = ev;
        i.then_branch = stmt_skip(sp);
        i.else_branch = make_stmt(std::move(f));
        return make_stmt(std::move(i));
    }

    static Event cmp_event(VarId var, CmpOp op, std::uint64_t m) {
        Event ev;
        ev.var = var;
        auto range = [&](std::uint64_t hi_exclusive) {
            for (std::uint64_t i = 0; i < hi_exclusive; ++i) ev.values.push_back(i);
        };
        switch (op) {
            case CmpOp::Eq: ev.values = {m}; break;
            case CmpOp::Ne: ev.values = {m}; ev.complement = true; break;
            case CmpOp::Lt: range(m); break;
            case CmpOp::Le: range(m + 1); break;
            case CmpOp::Gt: range(m + 1); ev.complement = true; break;
            case CmpOp::Ge: range(m); ev.complement = true; break;
        }
        return ev;
    }

    // A condition that is a plain (possibly negated) event, if it is one.
    static std::optional<Event> as_plain_event(const CondPtr& c) {
        if (!c) return std::nullopt;
        switch (c->kind) {
            case Cond::Kind::InSet: {
                Event ev;
                ev.var = c->var;
                ev.values = c->values;
                return ev;
            }
            case Cond::Kind::Cmp:
                return cmp_event(c->var, c->op, c->rhs);
            case Cond::Kind::Not: {
                auto inner = as_plain_event(c->a);
                if (!inner) return std::nullopt;
                inner->complement = !inner->complement;
                return inner;
            }
            default:
                return std::nullopt;
        }
    }

    StmtPtr lower_observe(const CondPtr& c, SourceSpan sp) {
        if (auto ev = as_plain_event(c)) return observe_event(*ev, sp);
        if (c->kind == Cond::Kind::DistTest) {
            // observe (m ~ D) is exactly observe m ~ D.
            Statement o;
            o.kind = Statement::Kind::ObserveFrom;
            o.span = sp;
            o.observe_value = c->test_value;
            o.dist = c->dist;
            return statement(make_stmt(std::move(o)));
        }
        // observe phi ~> if phi { skip } else { fail }
        Statement f;
        f.kind = Statement::Kind::Fail;
        f.span = sp;
        return lower_if(c, stmt_skip(sp), make_stmt(std::move(f)), sp);
    }

    StmtPtr lower_if(const CondPtr& c, const StmtPtr& then_s, const StmtPtr& else_s,
                     SourceSpan sp) {
        using CK = Cond::Kind;
        if (auto ev = as_plain_event(c)) {
            Statement i;
            i.kind = Statement::Kind::IfEvent;
            i.span = sp;
            i.event = *ev;
            i.then_branch = then_s ? statement(then_s) : stmt_skip(sp);
            i.else_branch = else_s ? statement(else_s) : stmt_skip(sp);
            return make_stmt(std::move(i));
        }
        switch (c->kind) {
            case CK::Not:
                return lower_if(c->a, else_s ? else_s : stmt_skip(sp),
                                then_s ? then_s : stmt_skip(sp), sp);
            case CK::And: {
                // if (a and b) {P1} else {P2} ~> if a { if b {P1} else {P2} } else {P2}
                StmtPtr inner_src = make_if_cond(c->b, then_s, else_s, sp);
                return lower_if(c->a, inner_src, else_s, sp);
            }
            case CK::Or: {
                StmtPtr inner_src = make_if_cond(c->b, then_s, else_s, sp);
                return lower_if(c->a, then_s, inner_src, sp);
            }
            case CK::DistTest: {
                // if m ~ D {P1} else {P2} ~> _t ~ D; if _t = m {P1} else {P2}
                VarId tmp = scratch();
                Statement smp;
                smp.kind = Statement::Kind::Sample;
                smp.span = sp;
                smp.target = tmp;
                smp.dist = c->dist;
                Statement i;
                i.kind = Statement::Kind::IfEvent;
                i.span = sp;
                i.event = Event{tmp, {c->test_value}, false};
                i.then_branch = then_s ? statement(then_s) : stmt_skip(sp);
                i.else_branch = else_s ? statement(else_s) : stmt_skip(sp);
                return stmt_seq({make_stmt(std::move(smp)), make_stmt(std::move(i))}, sp);
            }
            default:
                throw GfiError(ErrKind::InvalidProgram, "condition cannot be lowered", sp);
        }
    }

    static StmtPtr make_if_cond(const CondPtr& c, const StmtPtr& t, const StmtPtr& e,
                                SourceSpan sp) {
        Statement i;
        i.kind = Statement::Kind::IfCond;
        i.span = sp;
        i.cond = c;
        i.then_branch = t;
        i.else_branch = e;
        return make_stmt(std::move(i));
    }

    std::vector<std::string> vars_;
    DesugarOptions opts_;
    VarId scratch_;
};

}  // namespace detail

// Expands all surface sugar into the minimal core grammar. May append one
// scratch variable to the table when the sugar needs it.
inline Program desugar(const Program& p, DesugarOptions opts = {}) {
    detail::Desugarer d(p.vars, opts);
    Program out;
    out.body = d.statement(p.body);
    out.vars = std::move(d).vars();
    out.query = p.query;
    return out;
}

}  // namespace gfi
