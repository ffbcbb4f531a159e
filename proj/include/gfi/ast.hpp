#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gfi/error.hpp"
#include "gfi/rational.hpp"

namespace gfi {

// Position in the program's variable table.
struct VarId {
    int index = -1;
    bool operator==(const VarId&) const = default;
};

enum class DistKind {
    Dirac,
    Bernoulli,
    Categorical,
    Binomial,
    UniformDisc,
    NegBinomial,
    Geometric,
    Poisson,
    Exponential,
    Gamma,
    UniformCont,
};

inline const char* dist_name(DistKind k) {
    switch (k) {
        case DistKind::Dirac: return "Dirac";
        case DistKind::Bernoulli: return "Bernoulli";
        case DistKind::Categorical: return "Categorical";
        case DistKind::Binomial: return "Binomial";
        case DistKind::UniformDisc: return "UniformDisc";
        case DistKind::NegBinomial: return "NegBinomial";
        case DistKind::Geometric: return "Geometric";
        case DistKind::Poisson: return "Poisson";
        case DistKind::Exponential: return "Exponential";
        case DistKind::Gamma: return "Gamma";
        case DistKind::UniformCont: return "UniformCont";
    }
    return "?";
}

inline bool dist_is_continuous(DistKind k) {
    return k == DistKind::Exponential || k == DistKind::Gamma || k == DistKind::UniformCont;
}

// Primitive distribution with constant parameters.
struct Distribution {
    DistKind kind;
    std::vector<Rational> params;  // Categorical: the weights; others: positional
    bool operator==(const Distribution&) const = default;
};

enum class CompoundKind { Binomial, NegBinomial, Poisson, Bernoulli };

inline const char* compound_name(CompoundKind k) {
    switch (k) {
        case CompoundKind::Binomial: return "Binomial";
        case CompoundKind::NegBinomial: return "NegBinomial";
        case CompoundKind::Poisson: return "Poisson";
        case CompoundKind::Bernoulli: return "Bernoulli";
    }
    return "?";
}

// Distribution whose parameter is a program variable: Binomial(X, p),
// NegBinomial(X, p), Poisson(rate_scale * X), Bernoulli(X).
struct CompoundDistribution {
    CompoundKind kind;
    VarId var;
    Rational param;  // p for (Neg)Binomial, rate scale for Poisson, unused for Bernoulli
    bool operator==(const CompoundDistribution&) const = default;
};

using SampledDist = std::variant<Distribution, CompoundDistribution>;

// Core event: X in A, optionally complemented (from desugared comparisons).
struct Event {
    VarId var;
    std::vector<std::uint64_t> values;  // sorted, distinct
    bool complement = false;
    bool operator==(const Event&) const = default;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

// Surface conditions; desugar lowers these onto Event.
struct Cond;
using CondPtr = std::shared_ptr<const Cond>;

struct Cond {
    enum class Kind { InSet, Cmp, DistTest, Not, And, Or } kind;
    SourceSpan span;
    // InSet / Cmp
    VarId var;
    std::vector<std::uint64_t> values;  // InSet
    CmpOp op = CmpOp::Eq;               // Cmp
    std::uint64_t rhs = 0;              // Cmp
    // DistTest: "m ~ D"
    std::uint64_t test_value = 0;
    std::optional<SampledDist> dist;
    // Not / And / Or
    CondPtr a, b;
};

struct Statement;
using StmtPtr = std::shared_ptr<const Statement>;

// Tagged statement tree. Core constructors (after desugaring): Skip, Seq,
// Affine, IfEvent, Sample, ObserveEvent, ObserveFrom, Fail. The remaining
// kinds are surface sugar eliminated by desugar().
struct Statement {
    enum class Kind {
        Skip,
        Seq,
        Affine,
        IfEvent,
        Sample,
        ObserveEvent,
        ObserveFrom,
        Fail,
        // surface sugar
        AffineAdd,
        SampleAdd,
        IfCond,
        ObserveCond,
    } kind;
    SourceSpan span;

    std::vector<StmtPtr> seq;                       // Seq
    VarId target;                                   // Affine*/Sample*
    std::map<int, Rational> coeffs;                 // Affine*/: var index -> coefficient
    Rational constant = Rational(0);                // Affine*
    std::optional<SampledDist> dist;                // Sample*/ObserveFrom
    std::uint64_t observe_value = 0;                // ObserveFrom
    Event event;                                    // IfEvent/ObserveEvent
    CondPtr cond;                                   // IfCond/ObserveCond
    StmtPtr then_branch, else_branch;               // IfEvent/IfCond
};

inline StmtPtr make_stmt(Statement s) { return std::make_shared<Statement>(std::move(s)); }

inline StmtPtr stmt_skip(SourceSpan sp = {}) {
    Statement s;
    s.kind = Statement::Kind::Skip;
    s.span = sp;
    return make_stmt(std::move(s));
}

inline StmtPtr stmt_seq(std::vector<StmtPtr> items, SourceSpan sp = {}) {
    Statement s;
    s.kind = Statement::Kind::Seq;
    s.span = sp;
    s.seq = std::move(items);
    return make_stmt(std::move(s));
}

struct Program {
    std::vector<std::string> vars;  // names, unique, in declaration order
    StmtPtr body;                   // may be null for an empty program
    std::optional<VarId> query;     // defaults to the last assigned/sampled variable

    int var_index(const std::string& name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == name) return (int)i;
        return -1;
    }
};

// Structural equality (spans ignored), used by round-trip and idempotence tests.
bool stmt_equal(const StmtPtr& a, const StmtPtr& b);

inline bool cond_equal(const CondPtr& a, const CondPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Cond::Kind::InSet:
            return a->var == b->var && a->values == b->values;
        case Cond::Kind::Cmp:
            return a->var == b->var && a->op == b->op && a->rhs == b->rhs;
        case Cond::Kind::DistTest:
            return a->test_value == b->test_value && a->dist == b->dist;
        case Cond::Kind::Not:
            return cond_equal(a->a, b->a);
        case Cond::Kind::And:
        case Cond::Kind::Or:
            return cond_equal(a->a, b->a) && cond_equal(a->b, b->b);
    }
    return false;
}

inline bool stmt_equal(const StmtPtr& a, const StmtPtr& b) {
    if (!a || !b) return !a && !b;
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    using K = Statement::Kind;
    switch (a->kind) {
        case K::Skip:
        case K::Fail:
            return true;
        case K::Seq: {
            if (a->seq.size() != b->seq.size()) return false;
            for (std::size_t i = 0; i < a->seq.size(); ++i)
                if (!stmt_equal(a->seq[i], b->seq[i])) return false;
            return true;
        }
        case K::Affine:
        case K::AffineAdd:
            return a->target == b->target && a->coeffs == b->coeffs && a->constant == b->constant;
        case K::Sample:
        case K::SampleAdd:
            return a->target == b->target && a->dist == b->dist;
        case K::ObserveFrom:
            return a->observe_value == b->observe_value && a->dist == b->dist;
        case K::ObserveEvent:
            return a->event == b->event;
        case K::IfEvent:
            return a->event == b->event && stmt_equal(a->then_branch, b->then_branch) &&
                   stmt_equal(a->else_branch, b->else_branch);
        case K::IfCond:
            return cond_equal(a->cond, b->cond) && stmt_equal(a->then_branch, b->then_branch) &&
                   stmt_equal(a->else_branch, b->else_branch);
        case K::ObserveCond:
            return cond_equal(a->cond, b->cond);
    }
    return false;
}

inline bool program_equal(const Program& a, const Program& b) {
    return a.vars == b.vars && stmt_equal(a.body, b.body);
}

// Walks every statement in order (entering branches), for simple analyses.
template <class F>
void walk_statements(const StmtPtr& s, F&& f) {
    if (!s) return;
    f(*s);
    if (s->kind == Statement::Kind::Seq)
        for (auto& c : s->seq) walk_statements(c, f);
    if (s->kind == Statement::Kind::IfEvent || s->kind == Statement::Kind::IfCond) {
        walk_statements(s->then_branch, f);
        walk_statements(s->else_branch, f);
    }
}

}  // namespace gfi
