#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gfi/ast.hpp"

namespace gfi {

struct ParseError {
    SourceSpan span;
    std::string message;
    std::vector<std::string> expected;
};

namespace detail {

enum class Tok {
    End,
    Ident,
    Number,
    KwSkip,
    KwObserve,
    KwIf,
    KwElse,
    KwFail,
    KwNot,
    KwAnd,
    KwOr,
    KwIn,
    Assign,    // :=
    PlusEq,    // +=
    Tilde,     // ~
    PlusTilde, // +~
    Semi,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Star,
    Plus,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
};

inline const char* tok_name(Tok t) {
    switch (t) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::KwSkip: return "'skip'";
        case Tok::KwObserve: return "'observe'";
        case Tok::KwIf: return "'if'";
        case Tok::KwElse: return "'else'";
        case Tok::KwFail: return "'fail'";
        case Tok::KwNot: return "'not'";
        case Tok::KwAnd: return "'and'";
        case Tok::KwOr: return "'or'";
        case Tok::KwIn: return "'in'";
        case Tok::Assign: return "':='";
        case Tok::PlusEq: return "'+='";
        case Tok::Tilde: return "'~'";
        case Tok::PlusTilde: return "'+~'";
        case Tok::Semi: return "';'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::Star: return "'*'";
        case Tok::Plus: return "'+'";
        case Tok::Slash: return "'/'";
        case Tok::Eq: return "'='";
        case Tok::Ne: return "'!='";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
    }
    return "?";
}

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, "", here(0)});
                return out;
            }
            std::size_t start = pos_;
            int line = line_, col = col_;
            char c = src_[pos_];
            auto push = [&](Tok k) {
                out.push_back({k, src_.substr(start, pos_ - start),
                               SourceSpan{start, pos_, line, col}});
            };
            if (is_ident_start(c)) {
                while (pos_ < src_.size() && is_ident_continue(src_[pos_])) advance();
                std::string word = src_.substr(start, pos_ - start);
                push(keyword_of(word));
                continue;
            }
            if (std::isdigit((unsigned char)c)) {
                while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) advance();
                if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
                    std::isdigit((unsigned char)src_[pos_ + 1])) {
                    advance();
                    while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_]))
                        advance();
                }
                push(Tok::Number);
                continue;
            }
            switch (c) {
                case ':':
                    if (peek(1) == '=') { advance(); advance(); push(Tok::Assign); continue; }
                    break;
                case '+':
                    if (peek(1) == '=') { advance(); advance(); push(Tok::PlusEq); continue; }
                    if (peek(1) == '~') { advance(); advance(); push(Tok::PlusTilde); continue; }
                    advance(); push(Tok::Plus); continue;
                case '~': advance(); push(Tok::Tilde); continue;
                case ';': advance(); push(Tok::Semi); continue;
                case '{': advance(); push(Tok::LBrace); continue;
                case '}': advance(); push(Tok::RBrace); continue;
                case '(': advance(); push(Tok::LParen); continue;
                case ')': advance(); push(Tok::RParen); continue;
                case ',': advance(); push(Tok::Comma); continue;
                case '*': advance(); push(Tok::Star); continue;
                case '/': advance(); push(Tok::Slash); continue;
                case '=': advance(); push(Tok::Eq); continue;
                case '!':
                    if (peek(1) == '=') { advance(); advance(); push(Tok::Ne); continue; }
                    break;
                case '<':
                    advance();
                    if (pos_ < src_.size() && src_[pos_] == '=') { advance(); push(Tok::Le); }
                    else push(Tok::Lt);
                    continue;
                case '>':
                    advance();
                    if (pos_ < src_.size() && src_[pos_] == '=') { advance(); push(Tok::Ge); }
                    else push(Tok::Gt);
                    continue;
                default: break;
            }
            throw GfiError(ErrKind::Parse,
                           std::string("unexpected character '") + c + "'",
                           SourceSpan{start, start + 1, line, col});
        }
    }

private:
    static bool is_ident_start(char c) {
        return std::isalpha((unsigned char)c) || c == '_' || (unsigned char)c >= 0x80;
    }
    static bool is_ident_continue(char c) {
        return is_ident_start(c) || std::isdigit((unsigned char)c) || c == '\'';
    }
    static Tok keyword_of(const std::string& w) {
        if (w == "skip") return Tok::KwSkip;
        if (w == "observe") return Tok::KwObserve;
        if (w == "if") return Tok::KwIf;
        if (w == "else") return Tok::KwElse;
        if (w == "fail") return Tok::KwFail;
        if (w == "not") return Tok::KwNot;
        if (w == "and") return Tok::KwAnd;
        if (w == "or") return Tok::KwOr;
        if (w == "in") return Tok::KwIn;
        return Tok::Ident;
    }
    char peek(std::size_t off) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                return;
            }
        }
    }
    SourceSpan here(std::size_t len) const {
        return SourceSpan{pos_, pos_ + len, line_, col_};
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& src) : toks_(Lexer(src).run()) {}

    Program run() {
        Program p;
        std::vector<StmtPtr> stmts;
        while (cur().kind != Tok::End) stmts.push_back(statement(p));
        if (stmts.size() == 1)
            p.body = stmts[0];
        else if (!stmts.empty())
            p.body = stmt_seq(std::move(stmts));
        return p;
    }

private:
    const Token& cur() const { return toks_[i_]; }
    const Token& ahead(std::size_t n) const {
        return toks_[std::min(i_ + n, toks_.size() - 1)];
    }
    Token eat() { return toks_[i_++]; }

    [[noreturn]] void fail(std::vector<Tok> expected) const {
        std::string msg = "unexpected " + std::string(tok_name(cur().kind));
        if (!expected.empty()) {
            msg += ", expected ";
            for (std::size_t j = 0; j < expected.size(); ++j) {
                if (j) msg += " or ";
                msg += tok_name(expected[j]);
            }
        }
        throw GfiError(ErrKind::Parse, msg, cur().span);
    }

    Token expect(Tok k) {
        if (cur().kind != k) fail({k});
        return eat();
    }

    VarId intern(Program& p, const std::string& name) {
        int idx = p.var_index(name);
        if (idx >= 0) return VarId{idx};
        p.vars.push_back(name);
        return VarId{(int)p.vars.size() - 1};
    }

    Rational rational_lit() {
        Token t = expect(Tok::Number);
        Rational q = parse_rational(t.text);
        if (cur().kind == Tok::Slash && t.text.find('.') == std::string::npos) {
            eat();
            Token den = expect(Tok::Number);
            if (den.text.find('.') != std::string::npos)
                throw GfiError(ErrKind::Parse, "fraction denominator must be an integer",
                               den.span);
            Rational d = parse_rational(den.text);
            if (d == 0) throw GfiError(ErrKind::Parse, "zero denominator", den.span);
            q /= d;
            q.canonicalize();
        }
        return q;
    }

    std::uint64_t natural_lit() {
        Token t = cur();
        Rational q = parse_rational(expect(Tok::Number).text);
        if (!fits_uint64(q))
            throw GfiError(ErrKind::Parse, "expected a natural number", t.span);
        return to_uint64(q);
    }

    StmtPtr statement(Program& p) {
        SourceSpan sp = cur().span;
        switch (cur().kind) {
            case Tok::KwSkip: {
                eat();
                expect(Tok::Semi);
                return stmt_skip(sp);
            }
            case Tok::KwFail: {
                eat();
                expect(Tok::Semi);
                Statement s;
                s.kind = Statement::Kind::Fail;
                s.span = sp;
                return make_stmt(std::move(s));
            }
            case Tok::KwObserve:
                return observe(p, sp);
            case Tok::KwIf:
                return if_statement(p, sp);
            case Tok::Ident: {
                std::string name = eat().text;
                VarId v = intern(p, name);
                switch (cur().kind) {
                    case Tok::Assign:
                    case Tok::PlusEq: {
                        bool add = eat().kind == Tok::PlusEq;
                        Statement s;
                        s.kind = add ? Statement::Kind::AffineAdd : Statement::Kind::Affine;
                        s.span = sp;
                        s.target = v;
                        affine(p, s);
                        expect(Tok::Semi);
                        return make_stmt(std::move(s));
                    }
                    case Tok::Tilde:
                    case Tok::PlusTilde: {
                        bool add = eat().kind == Tok::PlusTilde;
                        Statement s;
                        s.kind = add ? Statement::Kind::SampleAdd : Statement::Kind::Sample;
                        s.span = sp;
                        s.target = v;
                        s.dist = distribution(p);
                        expect(Tok::Semi);
                        return make_stmt(std::move(s));
                    }
                    default:
                        fail({Tok::Assign, Tok::PlusEq, Tok::Tilde, Tok::PlusTilde});
                }
            }
            default:
                fail({Tok::KwSkip, Tok::KwObserve, Tok::KwIf, Tok::KwFail, Tok::Ident});
        }
    }

    StmtPtr observe(Program& p, SourceSpan sp) {
        expect(Tok::KwObserve);
        // "observe NAT ~ dist" is the observe-from form.
        if (cur().kind == Tok::Number && ahead(1).kind == Tok::Tilde) {
            Statement s;
            s.kind = Statement::Kind::ObserveFrom;
            s.span = sp;
            s.observe_value = natural_lit();
            expect(Tok::Tilde);
            s.dist = distribution(p);
            expect(Tok::Semi);
            return make_stmt(std::move(s));
        }
        CondPtr c = cond(p);
        expect(Tok::Semi);
        if (c->kind == Cond::Kind::DistTest) {
            Statement s;
            s.kind = Statement::Kind::ObserveFrom;
            s.span = sp;
            s.observe_value = c->test_value;
            s.dist = c->dist;
            return make_stmt(std::move(s));
        }
        Statement s;
        s.kind = Statement::Kind::ObserveCond;
        s.span = sp;
        s.cond = c;
        return make_stmt(std::move(s));
    }

    StmtPtr if_statement(Program& p, SourceSpan sp) {
        expect(Tok::KwIf);
        CondPtr c = cond(p);
        StmtPtr then_b = block(p);
        StmtPtr else_b;
        if (cur().kind == Tok::KwElse) {
            eat();
            else_b = block(p);
        } else {
            else_b = stmt_skip(sp);
        }
        Statement s;
        s.kind = Statement::Kind::IfCond;
        s.span = sp;
        s.cond = c;
        s.then_branch = then_b;
        s.else_branch = else_b;
        return make_stmt(std::move(s));
    }

    StmtPtr block(Program& p) {
        SourceSpan sp = cur().span;
        expect(Tok::LBrace);
        std::vector<StmtPtr> stmts;
        while (cur().kind != Tok::RBrace) stmts.push_back(statement(p));
        expect(Tok::RBrace);
        if (stmts.size() == 1) return stmts[0];
        if (stmts.empty()) return stmt_skip(sp);
        return stmt_seq(std::move(stmts), sp);
    }

    void affine(Program& p, Statement& s) {
        // term { "+" term }; term := RATIONAL | RATIONAL "*" IDENT | IDENT
        while (true) {
            if (cur().kind == Tok::Number) {
                Rational c = rational_lit();
                if (cur().kind == Tok::Star) {
                    eat();
                    VarId v = intern(p, expect(Tok::Ident).text);
                    s.coeffs[v.index] += c;
                } else {
                    s.constant += c;
                }
            } else if (cur().kind == Tok::Ident) {
                VarId v = intern(p, eat().text);
                s.coeffs[v.index] += 1;
            } else {
                fail({Tok::Number, Tok::Ident});
            }
            if (cur().kind != Tok::Plus) break;
            eat();
        }
        for (auto it = s.coeffs.begin(); it != s.coeffs.end();) {
            if (it->second == 0) it = s.coeffs.erase(it);
            else ++it;
        }
    }

    SampledDist distribution(Program& p) {
        Token name = expect(Tok::Ident);
        expect(Tok::LParen);
        struct Arg {
            bool is_var = false;
            VarId var;
            Rational scale = Rational(1);
            Rational value = Rational(0);
            SourceSpan span;
        };
        std::vector<Arg> args;
        if (cur().kind != Tok::RParen) {
            while (true) {
                Arg a;
                a.span = cur().span;
                if (cur().kind == Tok::Ident) {
                    a.is_var = true;
                    a.var = intern(p, eat().text);
                } else {
                    a.value = rational_lit();
                    if (cur().kind == Tok::Star) {
                        eat();
                        a.is_var = true;
                        a.scale = a.value;
                        a.var = intern(p, expect(Tok::Ident).text);
                    }
                }
                args.push_back(std::move(a));
                if (cur().kind != Tok::Comma) break;
                eat();
            }
        }
        expect(Tok::RParen);

        auto kind = dist_kind_of(name.text, name.span);
        bool any_var = std::any_of(args.begin(), args.end(), [](auto& a) { return a.is_var; });
        if (!any_var) {
            Distribution d;
            d.kind = kind;
            for (auto& a : args) d.params.push_back(a.value);
            return d;
        }
        // Compound forms: Binomial(X, p), NegBinomial(X, p), Poisson(c*X), Bernoulli(X).
        CompoundDistribution c;
        switch (kind) {
            case DistKind::Binomial:
            case DistKind::NegBinomial: {
                if (args.size() != 2 || !args[0].is_var || args[0].scale != 1 || args[1].is_var)
                    throw GfiError(ErrKind::Parse,
                                   std::string(dist_name(kind)) +
                                       " with a variable parameter takes (VAR, prob)",
                                   name.span);
                c.kind = kind == DistKind::Binomial ? CompoundKind::Binomial
                                                    : CompoundKind::NegBinomial;
                c.var = args[0].var;
                c.param = args[1].value;
                return c;
            }
            case DistKind::Poisson: {
                if (args.size() != 1 || !args[0].is_var)
                    throw GfiError(ErrKind::Parse, "Poisson takes (rate) or (scale*VAR)",
                                   name.span);
                c.kind = CompoundKind::Poisson;
                c.var = args[0].var;
                c.param = args[0].scale;
                return c;
            }
            case DistKind::Bernoulli: {
                if (args.size() != 1 || !args[0].is_var || args[0].scale != 1)
                    throw GfiError(ErrKind::Parse, "Bernoulli takes (prob) or (VAR)", name.span);
                c.kind = CompoundKind::Bernoulli;
                c.var = args[0].var;
                return c;
            }
            default:
                throw GfiError(ErrKind::Parse,
                               std::string(dist_name(kind)) +
                                   " does not accept a variable parameter",
                               name.span);
        }
    }

    DistKind dist_kind_of(const std::string& name, SourceSpan sp) {
        for (DistKind k :
             {DistKind::Dirac, DistKind::Bernoulli, DistKind::Categorical, DistKind::Binomial,
              DistKind::UniformDisc, DistKind::NegBinomial, DistKind::Geometric, DistKind::Poisson,
              DistKind::Exponential, DistKind::Gamma, DistKind::UniformCont})
            if (name == dist_name(k)) return k;
        throw GfiError(ErrKind::Parse, "unknown distribution '" + name + "'", sp);
    }

    CondPtr cond(Program& p) { return cond_or(p); }

    CondPtr cond_or(Program& p) {
        CondPtr lhs = cond_and(p);
        while (cur().kind == Tok::KwOr) {
            SourceSpan sp = eat().span;
            CondPtr rhs = cond_and(p);
            auto c = std::make_shared<Cond>();
            c->kind = Cond::Kind::Or;
            c->span = sp;
            c->a = lhs;
            c->b = rhs;
            lhs = c;
        }
        return lhs;
    }

    CondPtr cond_and(Program& p) {
        CondPtr lhs = cond_not(p);
        while (cur().kind == Tok::KwAnd) {
            SourceSpan sp = eat().span;
            CondPtr rhs = cond_not(p);
            auto c = std::make_shared<Cond>();
            c->kind = Cond::Kind::And;
            c->span = sp;
            c->a = lhs;
            c->b = rhs;
            lhs = c;
        }
        return lhs;
    }

    CondPtr cond_not(Program& p) {
        if (cur().kind == Tok::KwNot) {
            SourceSpan sp = eat().span;
            auto c = std::make_shared<Cond>();
            c->kind = Cond::Kind::Not;
            c->span = sp;
            c->a = cond_not(p);
            return c;
        }
        return cond_atom(p);
    }

    CondPtr cond_atom(Program& p) {
        SourceSpan sp = cur().span;
        if (cur().kind == Tok::LParen) {
            eat();
            CondPtr c = cond(p);
            expect(Tok::RParen);
            return c;
        }
        if (cur().kind == Tok::Number) {
            auto c = std::make_shared<Cond>();
            c->kind = Cond::Kind::DistTest;
            c->span = sp;
            c->test_value = natural_lit();
            expect(Tok::Tilde);
            c->dist = distribution(p);
            return c;
        }
        Token name = expect(Tok::Ident);
        VarId v = intern(p, name.text);
        if (cur().kind == Tok::KwIn) {
            eat();
            expect(Tok::LBrace);
            auto c = std::make_shared<Cond>();
            c->kind = Cond::Kind::InSet;
            c->span = sp;
            c->var = v;
            if (cur().kind != Tok::RBrace) {
                while (true) {
                    c->values.push_back(natural_lit());
                    if (cur().kind != Tok::Comma) break;
                    eat();
                }
            }
            expect(Tok::RBrace);
            std::sort(c->values.begin(), c->values.end());
            c->values.erase(std::unique(c->values.begin(), c->values.end()), c->values.end());
            return c;
        }
        CmpOp op;
        switch (cur().kind) {
            case Tok::Eq: op = CmpOp::Eq; break;
            case Tok::Ne: op = CmpOp::Ne; break;
            case Tok::Lt: op = CmpOp::Lt; break;
            case Tok::Le: op = CmpOp::Le; break;
            case Tok::Gt: op = CmpOp::Gt; break;
            case Tok::Ge: op = CmpOp::Ge; break;
            default: fail({Tok::KwIn, Tok::Eq, Tok::Ne, Tok::Lt, Tok::Le, Tok::Gt, Tok::Ge});
        }
        eat();
        auto c = std::make_shared<Cond>();
        c->kind = Cond::Kind::Cmp;
        c->span = sp;
        c->var = v;
        c->op = op;
        c->rhs = natural_lit();
        return c;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

}  // namespace detail

// Parses SGCL source text. Variables are declared implicitly at their first
// textual occurrence. Throws GfiError(Parse) with a source span on failure.
inline Program parse(const std::string& text) {
    return detail::Parser(text).run();
}

// --- canonical rendering -----------------------------------------------

namespace detail {

class Renderer {
public:
    explicit Renderer(const Program& p) : prog_(p) {}

    std::string run() {
        if (prog_.body) statement(prog_.body, 0);
        return out_.str();
    }

private:
    void indent(int depth) {
        for (int i = 0; i < depth; ++i) out_ << "  ";
    }

    const std::string& var(VarId v) const { return prog_.vars[v.index]; }

    void statement(const StmtPtr& s, int depth) {
        using K = Statement::Kind;
        switch (s->kind) {
            case K::Seq:
                for (auto& c : s->seq) statement(c, depth);
                return;
            case K::Skip:
                indent(depth);
                out_ << "skip;\n";
                return;
            case K::Fail:
                indent(depth);
                out_ << "fail;\n";
                return;
            case K::Affine:
            case K::AffineAdd:
                indent(depth);
                out_ << var(s->target) << (s->kind == K::AffineAdd ? " += " : " := ");
                affine(*s);
                out_ << ";\n";
                return;
            case K::Sample:
            case K::SampleAdd:
                indent(depth);
                out_ << var(s->target) << (s->kind == K::SampleAdd ? " +~ " : " ~ ");
                dist(*s->dist);
                out_ << ";\n";
                return;
            case K::ObserveFrom:
                indent(depth);
                out_ << "observe " << s->observe_value << " ~ ";
                dist(*s->dist);
                out_ << ";\n";
                return;
            case K::ObserveEvent:
                indent(depth);
                out_ << "observe ";
                event(s->event);
                out_ << ";\n";
                return;
            case K::ObserveCond:
                indent(depth);
                out_ << "observe ";
                cond(*s->cond, false);
                out_ << ";\n";
                return;
            case K::IfEvent:
            case K::IfCond:
                indent(depth);
                out_ << "if ";
                if (s->kind == K::IfEvent) event(s->event);
                else cond(*s->cond, false);
                out_ << " {\n";
                statement(s->then_branch, depth + 1);
                indent(depth);
                if (s->else_branch && s->else_branch->kind != K::Skip) {
                    out_ << "} else {\n";
                    statement(s->else_branch, depth + 1);
                    indent(depth);
                }
                out_ << "}\n";
                return;
        }
    }

    void affine(const Statement& s) {
        bool first = true;
        for (auto& [v, c] : s.coeffs) {
            if (c == 0) continue;
            if (!first) out_ << " + ";
            if (c == 1) out_ << prog_.vars[v];
            else out_ << rational_to_string(c) << "*" << prog_.vars[v];
            first = false;
        }
        if (s.constant != 0 || first) {
            if (!first) out_ << " + ";
            out_ << rational_to_string(s.constant);
        }
    }

    void dist(const SampledDist& d) {
        if (auto* pd = std::get_if<Distribution>(&d)) {
            out_ << dist_name(pd->kind) << "(";
            for (std::size_t i = 0; i < pd->params.size(); ++i) {
                if (i) out_ << ", ";
                out_ << rational_to_string(pd->params[i]);
            }
            out_ << ")";
            return;
        }
        auto& c = std::get<CompoundDistribution>(d);
        switch (c.kind) {
            case CompoundKind::Binomial:
            case CompoundKind::NegBinomial:
                out_ << compound_name(c.kind) << "(" << var(c.var) << ", "
                     << rational_to_string(c.param) << ")";
                return;
            case CompoundKind::Poisson:
                out_ << "Poisson(";
                if (c.param != 1) out_ << rational_to_string(c.param) << "*";
                out_ << var(c.var) << ")";
                return;
            case CompoundKind::Bernoulli:
                out_ << "Bernoulli(" << var(c.var) << ")";
                return;
        }
    }

    void event(const Event& ev) {
        if (ev.complement) out_ << "not ";
        set(ev.var, ev.values);
    }

    void set(VarId v, const std::vector<std::uint64_t>& values) {
        out_ << var(v) << " in {";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ", ";
            out_ << values[i];
        }
        out_ << "}";
    }

    void cond(const Cond& c, bool parenthesize_composite) {
        bool composite = c.kind == Cond::Kind::And || c.kind == Cond::Kind::Or;
        if (parenthesize_composite && composite) out_ << "(";
        switch (c.kind) {
            case Cond::Kind::InSet:
                set(c.var, c.values);
                break;
            case Cond::Kind::Cmp: {
                const char* op = "=";
                switch (c.op) {
                    case CmpOp::Eq: op = "="; break;
                    case CmpOp::Ne: op = "!="; break;
                    case CmpOp::Lt: op = "<"; break;
                    case CmpOp::Le: op = "<="; break;
                    case CmpOp::Gt: op = ">"; break;
                    case CmpOp::Ge: op = ">="; break;
                }
                out_ << var(c.var) << " " << op << " " << c.rhs;
                break;
            }
            case Cond::Kind::DistTest:
                out_ << c.test_value << " ~ ";
                dist(*c.dist);
                break;
            case Cond::Kind::Not:
                out_ << "not ";
                cond(*c.a, true);
                break;
            case Cond::Kind::And:
                cond(*c.a, true);
                out_ << " and ";
                cond(*c.b, true);
                break;
            case Cond::Kind::Or:
                cond(*c.a, true);
                out_ << " or ";
                cond(*c.b, true);
                break;
        }
        if (parenthesize_composite && composite) out_ << ")";
    }

    const Program& prog_;
    std::ostringstream out_;
};

}  // namespace detail

// Canonical pretty-printer; parse(render(p)) is structurally equal to p.
inline std::string render(const Program& p) {
    return detail::Renderer(p).run();
}

}  // namespace gfi
