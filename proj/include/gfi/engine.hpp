#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "gfi/desugar.hpp"
#include "gfi/oracle.hpp"
#include "gfi/parser.hpp"
#include "gfi/report.hpp"
#include "gfi/summary.hpp"

namespace gfi {

struct RunConfig {
    std::string path;                    // program file; ignored when source is set
    std::optional<std::string> source;   // inline program text
    std::optional<std::string> var;      // query variable; default: last assigned
    enum class Kernel { Float64, BigFloat, Rational, IntervalF64, IntervalBigFloat } kernel =
        Kernel::Float64;
    unsigned precision = 256;
    std::optional<std::uint64_t> mass_limit;
    bool naive_observe = false;
    bool mgf_representation = true;  // cleared by the stability-regression flag
    bool memo = true;
    enum class Oracle { None, Enumerate, Simulate } oracle = Oracle::None;
    std::uint64_t samples = 10000;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> truncate_at;
};

namespace engine_detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GfiError(ErrKind::Usage, "cannot read program file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Default query: the variable assigned or sampled latest in program order.
inline std::optional<VarId> default_query(const Program& surface) {
    std::optional<VarId> last;
    walk_statements(surface.body, [&](const Statement& s) {
        using K = Statement::Kind;
        if (s.kind == K::Affine || s.kind == K::AffineAdd || s.kind == K::Sample ||
            s.kind == K::SampleAdd)
            last = s.target;
    });
    return last;
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

template <class K>
PosteriorReport run_inference(const Program& core, const Validation& val, int query,
                              const K& kern, const RunConfig& cfg) {
    PosteriorReport rep;
    rep.kernel = kern.name();
    rep.warnings = val.warnings;

    GfProgram gp = build_gf(core, cfg.mgf_representation);
    EvalOptions opts;
    opts.memo = cfg.memo;

    auto t0 = std::chrono::steady_clock::now();
    auto ms = moments(gp, query, kern, nullptr, opts);
    for (auto& w : ms.warnings) rep.warnings.push_back(w);

    rep.evidence = ReportValue::of(ms.evidence);
    rep.mean = ReportValue::of(ms.mean);
    rep.variance = ReportValue::of(ms.variance);
    rep.skewness = ms.skewness ? ReportValue::of(*ms.skewness) : ReportValue::undefined();
    rep.kurtosis = ms.kurtosis ? ReportValue::of(*ms.kurtosis) : ReportValue::undefined();

    if (gp.support[query] == Support::DiscreteNat) {
        std::uint64_t cutoff = cfg.mass_limit ? *cfg.mass_limit : mass_cutoff(ms);
        auto table = masses(gp, query, ms.evidence, cutoff, kern, opts);
        rep.masses_available = true;
        rep.cutoff = cutoff;
        rep.tail_bound = table.tail_bound;
        for (std::uint64_t k = 0; k <= cutoff; ++k)
            rep.masses.push_back(MassEntry{k, ReportValue::of(table.masses[k])});
        for (auto& w : table.warnings) rep.warnings.push_back(w);
    } else {
        rep.warnings.push_back(
            "query variable is continuous: probability masses are unavailable, moments only");
    }
    rep.eval_ms = ms_since(t0);
    return rep;
}

template <class K>
PosteriorReport run_enumerate(const Program& core, int query, const K& kern,
                              const RunConfig& cfg) {
    using S = typename K::Scalar;
    OracleOptions opt;
    opt.truncate_at = cfg.truncate_at;
    auto t0 = std::chrono::steady_clock::now();
    auto mf = enumerate_program(core, query, kern, opt);

    PosteriorReport rep;
    rep.kernel = kern.name();
    rep.oracle = OracleReport{"enumerate", 0, 0, "", 0, 0};
    rep.evidence = ReportValue::of(mf.total);
    if (s_is_zero(mf.total))
        throw GfiError(ErrKind::ZeroEvidence, "the observations have probability zero");
    auto marg = mf.normalized_marginal(query);
    S mean{}, m2{}, m3{}, m4{};
    std::uint64_t maxk = 0;
    for (auto& [k, p] : marg) {
        S kv = kern.integer((long)k);
        mean = mean + kv * p;
        m2 = m2 + kv * kv * p;
        m3 = m3 + kv * kv * kv * p;
        m4 = m4 + kv * kv * kv * kv * p;
        maxk = std::max(maxk, k);
    }
    rep.mean = ReportValue::of(mean);
    S var = m2 - mean * mean;
    rep.variance = ReportValue::of(var);
    if (s_to_double(var) > 1e-12) {
        double sd = std::sqrt(s_to_double(var));
        double c3 = s_to_double(m3) - 3 * s_to_double(mean) * s_to_double(m2) +
                    2 * std::pow(s_to_double(mean), 3);
        double c4 = s_to_double(m4) - 4 * s_to_double(mean) * s_to_double(m3) +
                    6 * std::pow(s_to_double(mean), 2) * s_to_double(m2) -
                    3 * std::pow(s_to_double(mean), 4);
        rep.skewness = ReportValue::of(c3 / (sd * sd * sd));
        rep.kurtosis = ReportValue::of(c4 / (sd * sd * sd * sd));
    } else {
        rep.skewness = ReportValue::undefined();
        rep.kurtosis = ReportValue::undefined();
    }
    rep.masses_available = true;
    rep.cutoff = cfg.mass_limit ? *cfg.mass_limit : maxk;
    rep.tail_bound = 0;
    for (std::uint64_t k = 0; k <= rep.cutoff; ++k) {
        S p = marg.count(k) ? marg.at(k) : S{};
        rep.masses.push_back(MassEntry{k, ReportValue::of(p)});
    }
    rep.eval_ms = ms_since(t0);
    return rep;
}

inline PosteriorReport run_simulate(const Program& core, int query, const RunConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    auto sim = simulate(core, query, cfg.samples, cfg.seed);
    PosteriorReport rep;
    rep.kernel = "float64";
    rep.oracle =
        OracleReport{"simulate", sim.samples, sim.seed, sim.rng, sim.mean_stderr,
                     sim.effective_samples};
    rep.evidence = ReportValue::of(sim.evidence);
    if (sim.effective_samples == 0) {
        rep.warnings.push_back("effective sample size is zero: every sample was rejected");
        rep.mean = ReportValue::undefined();
        rep.variance = ReportValue::undefined();
        rep.skewness = ReportValue::undefined();
        rep.kurtosis = ReportValue::undefined();
        rep.eval_ms = ms_since(t0);
        return rep;
    }
    rep.mean = ReportValue::of(sim.mean);
    rep.variance = ReportValue::of(sim.variance);
    rep.skewness = ReportValue::undefined();
    rep.kurtosis = ReportValue::undefined();
    if (sim.integer_support && !sim.masses.empty()) {
        rep.masses_available = true;
        rep.cutoff = cfg.mass_limit ? *cfg.mass_limit : sim.masses.rbegin()->first;
        rep.tail_bound = 0;
        for (std::uint64_t k = 0; k <= rep.cutoff; ++k) {
            double p = sim.masses.count(k) ? sim.masses.at(k) : 0.0;
            rep.masses.push_back(MassEntry{k, ReportValue::of(p)});
        }
    }
    rep.eval_ms = ms_since(t0);
    return rep;
}

}  // namespace engine_detail

inline PosteriorReport run(const RunConfig& cfg) {
    using namespace engine_detail;
    auto t_start = std::chrono::steady_clock::now();

    std::string text = cfg.source ? *cfg.source : read_file(cfg.path);
    Program surface = parse(text);

    std::optional<VarId> query_surface;
    if (cfg.var) {
        int idx = surface.var_index(*cfg.var);
        if (idx < 0)
            throw GfiError(ErrKind::UnknownVariable, "query variable '" + *cfg.var + "'");
        query_surface = VarId{idx};
    } else {
        query_surface = default_query(surface);
    }
    if (!query_surface)
        throw GfiError(ErrKind::InvalidProgram, "the program assigns no variable to query");

    Program core = desugar(surface, DesugarOptions{cfg.naive_observe});
    Validation val = validate(core);
    int query = query_surface->index;

    PosteriorReport rep;
    switch (cfg.oracle) {
        case RunConfig::Oracle::Enumerate:
            if (cfg.kernel == RunConfig::Kernel::Rational)
                rep = run_enumerate(core, query, RationalKernel{}, cfg);
            else
                rep = run_enumerate(core, query, F64Kernel{}, cfg);
            break;
        case RunConfig::Oracle::Simulate:
            rep = run_simulate(core, query, cfg);
            break;
        case RunConfig::Oracle::None:
            switch (cfg.kernel) {
                case RunConfig::Kernel::Float64:
                    rep = run_inference(core, val, query, F64Kernel{}, cfg);
                    break;
                case RunConfig::Kernel::Rational:
                    rep = run_inference(core, val, query, RationalKernel{}, cfg);
                    break;
                case RunConfig::Kernel::BigFloat:
                    rep = run_inference(core, val, query,
                                        BigFloatKernel{(mpfr_prec_t)cfg.precision}, cfg);
                    break;
                case RunConfig::Kernel::IntervalF64:
                    rep = run_inference(core, val, query, IntervalF64Kernel{}, cfg);
                    break;
                case RunConfig::Kernel::IntervalBigFloat:
                    rep = run_inference(
                        core, val, query,
                        IntervalBigFloatKernel{BigFloatKernel{(mpfr_prec_t)cfg.precision}}, cfg);
                    break;
            }
            break;
    }
    rep.query = surface.vars[query];
    rep.total_ms = ms_since(t_start);
    return rep;
}

}  // namespace gfi
