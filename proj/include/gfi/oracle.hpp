#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gfi/ast.hpp"
#include "gfi/kernels.hpp"
#include "gfi/validate.hpp"

namespace gfi {

// ---------------------------------------------------------------------------
// Ground truth independent of the generating-function path: exhaustive
// enumeration of the standard measure semantics (discrete programs) and
// likelihood-weighted forward simulation. The probability mass functions here
// are computed directly from their closed forms, deliberately sharing nothing
// with the Taylor machinery they are used to check.
// ---------------------------------------------------------------------------

template <class S>
struct MassFunction {
    // Joint subprobability masses over exact-rational valuations.
    std::map<std::vector<Rational>, S> joint;
    S total{};

    std::map<std::uint64_t, S> marginal(int var) const {
        std::map<std::uint64_t, S> out;
        for (auto& [val, m] : joint) {
            const Rational& x = val[var];
            if (!fits_uint64(x))
                throw GfiError(ErrKind::OracleUnavailable,
                               "marginal of a variable with non-natural support");
            auto [it, fresh] = out.emplace(to_uint64(x), m);
            if (!fresh) it->second = it->second + m;
        }
        return out;
    }

    std::map<std::uint64_t, S> normalized_marginal(int var) const {
        auto m = marginal(var);
        for (auto& [k, v] : m) v = v / total;
        return m;
    }
};

struct OracleOptions {
    // Hard cap on the support of infinite discrete distributions; when unset,
    // truncation stops once the remaining tail is below tail_eps.
    std::optional<std::uint64_t> truncate_at;
    double tail_eps = 1e-12;
};

namespace oracle_detail {

// pmf tables computed by closed-form recurrences.
template <class K>
std::vector<std::pair<Rational, typename K::Scalar>> support_of(const K& kern,
                                                                const Distribution& d,
                                                                const OracleOptions& opt) {
    using S = typename K::Scalar;
    std::vector<std::pair<Rational, S>> out;
    auto push = [&](Rational v, S m) { out.emplace_back(std::move(v), std::move(m)); };
    auto truncated_tail = [&](auto pmf_at) {
        // pmf_at(k) for k = 0, 1, ...; stop when the accumulated mass leaves
        // less than tail_eps (or at the hard cap).
        S acc{};
        std::uint64_t limit = opt.truncate_at.value_or(1000000);
        for (std::uint64_t k = 0; k <= limit; ++k) {
            S p = pmf_at(k);
            push(Rational((long)k), p);
            acc = acc + p;
            if (!opt.truncate_at && 1.0 - s_to_double(acc) < opt.tail_eps) break;
        }
    };
    switch (d.kind) {
        case DistKind::Dirac:
            push(d.params[0], kern.integer(1));
            return out;
        case DistKind::Bernoulli:
            push(Rational(0), kern.rat(1 - d.params[0]));
            push(Rational(1), kern.rat(d.params[0]));
            return out;
        case DistKind::Categorical:
            for (std::size_t i = 0; i < d.params.size(); ++i)
                push(Rational((long)i), kern.rat(d.params[i]));
            return out;
        case DistKind::Binomial: {
            std::uint64_t n = to_uint64(d.params[0]);
            const Rational& p = d.params[1];
            Rational q = 1 - p;
            // C(n,k) p^k q^(n-k), exact rational then converted.
            Rational term = s_pow_rat(q, Rational((long)n));
            for (std::uint64_t k = 0; k <= n; ++k) {
                push(Rational((long)k), kern.rat(term));
                if (k < n) {
                    if (q == 0) {
                        // degenerate p = 1: all mass at k = n
                        term = (k + 1 == n) ? s_pow_rat(p, Rational((long)n)) : Rational(0);
                    } else {
                        term = term * Rational((long)(n - k)) / Rational((long)(k + 1)) * p / q;
                        term.canonicalize();
                    }
                }
            }
            return out;
        }
        case DistKind::UniformDisc: {
            std::uint64_t l = to_uint64(d.params[0]);
            std::uint64_t m = to_uint64(d.params[1]);
            S w = kern.rat(Rational(1, (long)(m - l + 1)));
            for (std::uint64_t k = l; k <= m; ++k) push(Rational((long)k), w);
            return out;
        }
        case DistKind::Geometric: {
            S p = kern.rat(d.params[0]);
            S q = kern.rat(1 - d.params[0]);
            S term = p;
            truncated_tail([&](std::uint64_t k) {
                if (k == 0) return term;
                term = term * q;
                return term;
            });
            return out;
        }
        case DistKind::NegBinomial: {
            std::uint64_t r = to_uint64(d.params[0]);
            if (r == 0) {
                push(Rational(0), kern.integer(1));
                return out;
            }
            S p = kern.rat(d.params[1]);
            S q = kern.rat(1 - d.params[1]);
            S term = s_pow_nat(p, r);
            truncated_tail([&](std::uint64_t k) {
                if (k == 0) return term;
                term = s_div_si(s_mul_si(term * q, (long)(k + r - 1)), (long)k);
                return term;
            });
            return out;
        }
        case DistKind::Poisson: {
            S lam = kern.rat(d.params[0]);
            S term = s_exp(-lam);  // rational mode rejects this, as intended
            truncated_tail([&](std::uint64_t k) {
                if (k == 0) return term;
                term = s_div_si(term * lam, (long)k);
                return term;
            });
            return out;
        }
        default:
            throw GfiError(ErrKind::OracleUnavailable,
                           "enumerate cannot handle continuous distributions");
    }
}

inline std::uint64_t nat_of(const Rational& v, const char* what) {
    if (!fits_uint64(v))
        throw GfiError(ErrKind::OracleUnavailable,
                       std::string(what) + " requires a natural-valued variable");
    return to_uint64(v);
}

inline Distribution instantiate(const CompoundDistribution& c,
                                const std::vector<Rational>& val) {
    const Rational& x = val[c.var.index];
    switch (c.kind) {
        case CompoundKind::Binomial:
            return Distribution{DistKind::Binomial,
                                {Rational((long)nat_of(x, "Binomial count")), c.param}};
        case CompoundKind::NegBinomial:
            return Distribution{DistKind::NegBinomial,
                                {Rational((long)nat_of(x, "NegBinomial count")), c.param}};
        case CompoundKind::Poisson: {
            Rational rate = c.param * x;
            rate.canonicalize();
            return Distribution{DistKind::Poisson, {rate}};
        }
        case CompoundKind::Bernoulli: {
            if (x < 0 || x > 1)
                throw GfiError(ErrKind::DomainError,
                               "Bernoulli parameter variable left [0, 1] at runtime");
            return Distribution{DistKind::Bernoulli, {x}};
        }
    }
    throw GfiError(ErrKind::InvalidProgram, "unhandled compound distribution");
}

template <class K>
typename K::Scalar pmf_of(const K& kern, const Distribution& d, std::uint64_t value,
                          const OracleOptions& opt) {
    OracleOptions capped = opt;
    capped.truncate_at = value;  // only need the prefix up to `value`
    auto sup = support_of(kern, d, capped);
    for (auto& [v, m] : sup)
        if (is_integer(v) && v >= 0 && to_uint64(v) == value) return m;
    return typename K::Scalar{};
}

inline bool event_holds(const Event& ev, const std::vector<Rational>& val) {
    const Rational& x = val[ev.var.index];
    bool member = false;
    if (is_integer(x) && x >= 0) {
        std::uint64_t k = to_uint64(x);
        member = std::binary_search(ev.values.begin(), ev.values.end(), k);
    }
    return ev.complement ? !member : member;
}

// Variables read before being overwritten, per statement, walking backward.
inline void reads_of(const Statement& s, std::set<int>& r) {
    using K = Statement::Kind;
    switch (s.kind) {
        case K::Affine:
            for (auto& [v, c] : s.coeffs)
                if (c != 0) r.insert(v);
            break;
        case K::Sample:
        case K::ObserveFrom:
            if (s.dist)
                if (auto* c = std::get_if<CompoundDistribution>(&*s.dist)) r.insert(c->var.index);
            break;
        case K::ObserveEvent:
            r.insert(s.event.var.index);
            break;
        default:
            break;
    }
}

}  // namespace oracle_detail

// Exhaustive enumeration of the measure semantics by a frontier of
// (valuation -> mass). Branch statements split the frontier; dead variables
// are folded to zero to keep the frontier small.
template <class K>
class Enumerator {
public:
    using S = typename K::Scalar;

    Enumerator(const K& kern, OracleOptions opt) : kern_(kern), opt_(opt) {}

    MassFunction<S> run(const Program& core, int query) {
        std::size_t n = core.vars.size();
        Frontier f;
        f[std::vector<Rational>(n, Rational(0))] = kern_.integer(1);
        std::set<int> live{query};
        f = statement(core.body, std::move(f), live);
        MassFunction<S> out;
        out.total = S{};
        for (auto& [v, m] : f) {
            out.total = out.total + m;
            auto [it, fresh] = out.joint.emplace(v, m);
            if (!fresh) it->second = it->second + m;
        }
        return out;
    }

private:
    using Frontier = std::map<std::vector<Rational>, S>;

    Frontier statement(const StmtPtr& s, Frontier f, std::set<int>& live_after) {
        if (!s) return f;
        using Kk = Statement::Kind;
        switch (s->kind) {
            case Kk::Skip:
                return f;
            case Kk::Fail:
                return Frontier{};
            case Kk::Seq: {
                // Process in order; liveness flows backward, so precompute.
                std::vector<std::set<int>> live_points(s->seq.size() + 1);
                live_points[s->seq.size()] = live_after;
                for (int i = (int)s->seq.size() - 1; i >= 0; --i)
                    live_points[i] = live_before(s->seq[i], live_points[i + 1]);
                for (std::size_t i = 0; i < s->seq.size(); ++i) {
                    f = statement(s->seq[i], std::move(f), live_points[i + 1]);
                    f = fold_dead(std::move(f), live_points[i + 1]);
                }
                live_after = live_points[s->seq.size()];
                return f;
            }
            case Kk::Affine: {
                Frontier out;
                for (auto& [v, m] : f) {
                    std::vector<Rational> nv = v;
                    Rational acc = s->constant;
                    for (auto& [i, c] : s->coeffs) acc += c * v[i];
                    acc.canonicalize();
                    nv[s->target.index] = acc;
                    accumulate(out, std::move(nv), m);
                }
                return out;
            }
            case Kk::Sample: {
                Frontier out;
                for (auto& [v, m] : f) {
                    Distribution d = s->dist->index() == 0
                                         ? std::get<Distribution>(*s->dist)
                                         : oracle_detail::instantiate(
                                               std::get<CompoundDistribution>(*s->dist), v);
                    auto sup = oracle_detail::support_of(kern_, d, opt_);
                    for (auto& [val, pm] : sup) {
                        if (s_is_zero(pm)) continue;
                        std::vector<Rational> nv = v;
                        nv[s->target.index] = val;
                        accumulate(out, std::move(nv), m * pm);
                    }
                }
                return out;
            }
            case Kk::ObserveFrom: {
                Frontier out;
                for (auto& [v, m] : f) {
                    Distribution d = s->dist->index() == 0
                                         ? std::get<Distribution>(*s->dist)
                                         : oracle_detail::instantiate(
                                               std::get<CompoundDistribution>(*s->dist), v);
                    S w = oracle_detail::pmf_of(kern_, d, s->observe_value, opt_);
                    if (s_is_zero(w)) continue;
                    accumulate(out, v, m * w);
                }
                return out;
            }
            case Kk::ObserveEvent: {
                Frontier out;
                for (auto& [v, m] : f)
                    if (oracle_detail::event_holds(s->event, v)) accumulate(out, v, m);
                return out;
            }
            case Kk::IfEvent: {
                Frontier yes, no;
                for (auto& [v, m] : f) {
                    if (oracle_detail::event_holds(s->event, v))
                        accumulate(yes, v, m);
                    else
                        accumulate(no, v, m);
                }
                std::set<int> live_t = live_after, live_e = live_after;
                Frontier a = statement(s->then_branch, std::move(yes), live_t);
                Frontier b = statement(s->else_branch, std::move(no), live_e);
                for (auto& [v, m] : b) accumulate(a, v, m);
                return a;
            }
            default:
                throw GfiError(ErrKind::InvalidProgram,
                               "surface statement reached enumeration", s->span);
        }
    }

    std::set<int> live_before(const StmtPtr& s, const std::set<int>& after) {
        std::set<int> r = after;
        if (!s) return r;
        using Kk = Statement::Kind;
        switch (s->kind) {
            case Kk::Seq: {
                std::set<int> acc = after;
                for (int i = (int)s->seq.size() - 1; i >= 0; --i)
                    acc = live_before(s->seq[i], acc);
                return acc;
            }
            case Kk::IfEvent: {
                std::set<int> t = live_before(s->then_branch, after);
                std::set<int> e = live_before(s->else_branch, after);
                t.insert(e.begin(), e.end());
                t.insert(s->event.var.index);
                return t;
            }
            case Kk::Affine:
            case Kk::Sample:
                r.erase(s->target.index);
                [[fallthrough]];
            default:
                oracle_detail::reads_of(*s, r);
                return r;
        }
    }

    Frontier fold_dead(Frontier f, const std::set<int>& live) {
        if (f.empty()) return f;
        std::size_t n = f.begin()->first.size();
        bool any_dead = false;
        for (std::size_t i = 0; i < n; ++i)
            if (!live.count((int)i)) any_dead = true;
        if (!any_dead) return f;
        Frontier out;
        for (auto& [v, m] : f) {
            std::vector<Rational> nv = v;
            for (std::size_t i = 0; i < n; ++i)
                if (!live.count((int)i)) nv[i] = Rational(0);
            accumulate(out, std::move(nv), m);
        }
        return out;
    }

    void accumulate(Frontier& f, std::vector<Rational> v, S m) {
        auto [it, fresh] = f.emplace(std::move(v), m);
        if (!fresh) it->second = it->second + m;
    }

    const K& kern_;
    OracleOptions opt_;
};

template <class K>
MassFunction<typename K::Scalar> enumerate_program(const Program& core, int query, const K& kern,
                                                   OracleOptions opt = {}) {
    walk_statements(core.body, [&](const Statement& s) {
        if (s.kind == Statement::Kind::Sample || s.kind == Statement::Kind::ObserveFrom) {
            if (auto* d = std::get_if<Distribution>(&*s.dist))
                if (dist_is_continuous(d->kind))
                    throw GfiError(ErrKind::OracleUnavailable,
                                   "enumerate cannot handle continuous distributions");
        }
    });
    return Enumerator<K>(kern, opt).run(core, query);
}

// ---------------------------------------------------------------------------
// Likelihood-weighted forward simulation (importance sampling with the prior
// as proposal). PRNG: mt19937_64 with std <random> distributions.
// ---------------------------------------------------------------------------

struct SimulationResult {
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    double evidence = 0;             // mean weight
    double mean = 0;                 // weighted posterior mean of the query
    double variance = 0;             // weighted posterior variance
    double mean_stderr = 0;          // Monte Carlo standard error of the mean
    double effective_samples = 0;    // (sum w)^2 / sum w^2
    std::map<std::uint64_t, double> masses;  // weighted histogram (integer support)
    bool integer_support = true;
    std::string rng = "mt19937_64";
};

namespace oracle_detail {

inline double sample_dist(const Distribution& d, std::mt19937_64& rng) {
    switch (d.kind) {
        case DistKind::Dirac:
            return rat_to_double(d.params[0]);
        case DistKind::Bernoulli:
            return std::bernoulli_distribution(rat_to_double(d.params[0]))(rng) ? 1.0 : 0.0;
        case DistKind::Categorical: {
            std::vector<double> w;
            for (auto& p : d.params) w.push_back(rat_to_double(p));
            return (double)std::discrete_distribution<int>(w.begin(), w.end())(rng);
        }
        case DistKind::Binomial:
            return (double)std::binomial_distribution<long>(
                (long)to_uint64(d.params[0]), rat_to_double(d.params[1]))(rng);
        case DistKind::UniformDisc:
            return (double)std::uniform_int_distribution<long>(
                (long)to_uint64(d.params[0]), (long)to_uint64(d.params[1]))(rng);
        case DistKind::NegBinomial: {
            long r = (long)to_uint64(d.params[0]);
            if (r == 0) return 0.0;
            return (double)std::negative_binomial_distribution<long>(
                r, rat_to_double(d.params[1]))(rng);
        }
        case DistKind::Geometric:
            return (double)std::geometric_distribution<long>(rat_to_double(d.params[0]))(rng);
        case DistKind::Poisson:
            return (double)std::poisson_distribution<long>(rat_to_double(d.params[0]))(rng);
        case DistKind::Exponential:
            return std::exponential_distribution<double>(rat_to_double(d.params[0]))(rng);
        case DistKind::Gamma:
            return std::gamma_distribution<double>(rat_to_double(d.params[0]),
                                                   1.0 / rat_to_double(d.params[1]))(rng);
        case DistKind::UniformCont:
            return std::uniform_real_distribution<double>(rat_to_double(d.params[0]),
                                                          rat_to_double(d.params[1]))(rng);
    }
    throw GfiError(ErrKind::InvalidProgram, "unhandled distribution");
}

inline double pmf_double(const Distribution& d, std::uint64_t k) {
    double kd = (double)k;
    switch (d.kind) {
        case DistKind::Dirac:
            return rat_to_double(d.params[0]) == kd ? 1.0 : 0.0;
        case DistKind::Bernoulli: {
            double p = rat_to_double(d.params[0]);
            return k == 0 ? 1 - p : (k == 1 ? p : 0.0);
        }
        case DistKind::Categorical:
            return k < d.params.size() ? rat_to_double(d.params[k]) : 0.0;
        case DistKind::Binomial: {
            double n = (double)to_uint64(d.params[0]);
            double p = rat_to_double(d.params[1]);
            if (kd > n) return 0.0;
            if (p == 0) return k == 0 ? 1.0 : 0.0;
            if (p == 1) return kd == n ? 1.0 : 0.0;
            return std::exp(std::lgamma(n + 1) - std::lgamma(kd + 1) - std::lgamma(n - kd + 1) +
                            kd * std::log(p) + (n - kd) * std::log1p(-p));
        }
        case DistKind::UniformDisc: {
            std::uint64_t l = to_uint64(d.params[0]), m = to_uint64(d.params[1]);
            return (k >= l && k <= m) ? 1.0 / (double)(m - l + 1) : 0.0;
        }
        case DistKind::NegBinomial: {
            double r = (double)to_uint64(d.params[0]);
            double p = rat_to_double(d.params[1]);
            if (r == 0) return k == 0 ? 1.0 : 0.0;
            return std::exp(std::lgamma(kd + r) - std::lgamma(kd + 1) - std::lgamma(r) +
                            r * std::log(p) + kd * std::log1p(-p));
        }
        case DistKind::Geometric: {
            double p = rat_to_double(d.params[0]);
            return p * std::pow(1 - p, kd);
        }
        case DistKind::Poisson: {
            double lam = rat_to_double(d.params[0]);
            if (lam == 0) return k == 0 ? 1.0 : 0.0;
            return std::exp(-lam + kd * std::log(lam) - std::lgamma(kd + 1));
        }
        default:
            throw GfiError(ErrKind::OracleUnavailable,
                           "probability mass of a continuous distribution");
    }
}

inline Distribution instantiate_double(const CompoundDistribution& c,
                                       const std::vector<double>& val) {
    double x = val[c.var.index];
    switch (c.kind) {
        case CompoundKind::Binomial:
            return Distribution{DistKind::Binomial, {Rational((long)std::llround(x)), c.param}};
        case CompoundKind::NegBinomial:
            return Distribution{DistKind::NegBinomial,
                                {Rational((long)std::llround(x)), c.param}};
        case CompoundKind::Poisson: {
            Rational rate = c.param * Rational(x);
            rate.canonicalize();
            return Distribution{DistKind::Poisson, {rate}};
        }
        case CompoundKind::Bernoulli: {
            if (x < 0 || x > 1)
                throw GfiError(ErrKind::DomainError,
                               "Bernoulli parameter variable left [0, 1] at runtime");
            return Distribution{DistKind::Bernoulli, {Rational(x)}};
        }
    }
    throw GfiError(ErrKind::InvalidProgram, "unhandled compound distribution");
}

}  // namespace oracle_detail

inline SimulationResult simulate(const Program& core, int query, std::uint64_t n,
                                 std::uint64_t seed) {
    if (n == 0) throw GfiError(ErrKind::Usage, "need at least one sample");
    std::mt19937_64 rng(seed);
    std::size_t nv = core.vars.size();

    SimulationResult out;
    out.samples = n;
    out.seed = seed;

    std::vector<double> weights;
    std::vector<double> values;
    weights.reserve(n);
    values.reserve(n);

    std::function<bool(const StmtPtr&, std::vector<double>&, double&)> exec =
        [&](const StmtPtr& s, std::vector<double>& val, double& w) -> bool {
        if (!s) return true;
        using Kk = Statement::Kind;
        switch (s->kind) {
            case Kk::Skip:
                return true;
            case Kk::Fail:
                w = 0;
                return false;
            case Kk::Seq:
                for (auto& c : s->seq)
                    if (!exec(c, val, w)) return false;
                return true;
            case Kk::Affine: {
                double acc = rat_to_double(s->constant);
                for (auto& [i, c] : s->coeffs) acc += rat_to_double(c) * val[i];
                val[s->target.index] = acc;
                return true;
            }
            case Kk::Sample: {
                Distribution d =
                    s->dist->index() == 0
                        ? std::get<Distribution>(*s->dist)
                        : oracle_detail::instantiate_double(
                              std::get<CompoundDistribution>(*s->dist), val);
                val[s->target.index] = oracle_detail::sample_dist(d, rng);
                return true;
            }
            case Kk::ObserveFrom: {
                Distribution d =
                    s->dist->index() == 0
                        ? std::get<Distribution>(*s->dist)
                        : oracle_detail::instantiate_double(
                              std::get<CompoundDistribution>(*s->dist), val);
                w *= oracle_detail::pmf_double(d, s->observe_value);
                return w > 0;
            }
            case Kk::ObserveEvent: {
                double x = val[s->event.var.index];
                bool member = false;
                long k = std::llround(x);
                if (k >= 0 && std::abs(x - (double)k) < 1e-9)
                    member = std::binary_search(s->event.values.begin(), s->event.values.end(),
                                                (std::uint64_t)k);
                if (s->event.complement) member = !member;
                if (!member) w = 0;
                return w > 0;
            }
            case Kk::IfEvent: {
                double x = val[s->event.var.index];
                bool member = false;
                long k = std::llround(x);
                if (k >= 0 && std::abs(x - (double)k) < 1e-9)
                    member = std::binary_search(s->event.values.begin(), s->event.values.end(),
                                                (std::uint64_t)k);
                if (s->event.complement) member = !member;
                return exec(member ? s->then_branch : s->else_branch, val, w);
            }
            default:
                throw GfiError(ErrKind::InvalidProgram,
                               "surface statement reached simulation", s->span);
        }
    };

    for (std::uint64_t i = 0; i < n; ++i) {
        std::vector<double> val(nv, 0.0);
        double w = 1.0;
        exec(core.body, val, w);
        weights.push_back(w);
        values.push_back(val.empty() ? 0.0 : val[query]);
    }

    double wsum = 0, wsq = 0;
    for (double w : weights) {
        wsum += w;
        wsq += w * w;
    }
    out.evidence = wsum / (double)n;
    if (wsum <= 0) {
        out.effective_samples = 0;
        return out;  // caller treats zero ESS as a warning
    }
    out.effective_samples = wsum * wsum / wsq;

    double mean = 0;
    for (std::uint64_t i = 0; i < n; ++i) mean += weights[i] * values[i];
    mean /= wsum;
    double var = 0, se_num = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        double dlt = values[i] - mean;
        var += weights[i] * dlt * dlt;
        se_num += weights[i] * weights[i] * dlt * dlt;
    }
    out.mean = mean;
    out.variance = var / wsum;
    out.mean_stderr = std::sqrt(se_num) / wsum;

    for (std::uint64_t i = 0; i < n; ++i) {
        if (weights[i] <= 0) continue;
        long k = std::llround(values[i]);
        if (k >= 0 && std::abs(values[i] - (double)k) < 1e-9)
            out.masses[(std::uint64_t)k] += weights[i] / wsum;
        else
            out.integer_support = false;
    }
    if (!out.integer_support) out.masses.clear();
    return out;
}

// Total variation distance between two normalized mass functions.
template <class S>
double tvd(const std::map<std::uint64_t, S>& p, const std::map<std::uint64_t, S>& q) {
    double acc = 0;
    std::set<std::uint64_t> keys;
    for (auto& [k, v] : p) keys.insert(k);
    for (auto& [k, v] : q) keys.insert(k);
    for (auto k : keys) {
        double a = p.count(k) ? s_to_double(p.at(k)) : 0.0;
        double b = q.count(k) ? s_to_double(q.at(k)) : 0.0;
        acc += std::abs(a - b);
    }
    return acc / 2;
}

}  // namespace gfi
