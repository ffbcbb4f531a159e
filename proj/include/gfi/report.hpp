#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gfi/kernels.hpp"

namespace gfi {

// One reported statistic, already rendered for the active kernel: a decimal
// string at full precision, "p/q" in rational mode, or an enclosure with a
// significant-digit count in interval mode.
struct ReportValue {
    bool defined = true;
    std::string value;
    std::optional<std::string> lo, hi;
    std::optional<double> digits;
    double approx = 0;

    static ReportValue undefined() {
        ReportValue v;
        v.defined = false;
        return v;
    }

    template <class S>
    static ReportValue of(const S& s) {
        ReportValue v;
        v.value = s_format(s);
        v.approx = s_to_double(s);
        return v;
    }

    template <class T>
    static ReportValue of(const Interval<T>& s) {
        ReportValue v;
        v.lo = s_format(s.lo);
        v.hi = s_format(s.hi);
        auto w = widen_report(s);
        v.digits = w.significant_digits;
        v.approx = w.midpoint;
        v.value = s_format(s);
        return v;
    }
};

struct MassEntry {
    std::uint64_t k = 0;
    ReportValue p;
};

struct OracleReport {
    std::string mode;  // "enumerate" | "simulate"
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::string rng;
    double mean_stderr = 0;
    double effective_samples = 0;
};

struct PosteriorReport {
    std::string query;
    std::string kernel;
    ReportValue evidence;
    ReportValue mean, variance, skewness, kurtosis;
    bool masses_available = false;
    std::uint64_t cutoff = 0;
    double tail_bound = 1.0 / 256.0;
    std::vector<MassEntry> masses;
    std::vector<std::string> warnings;
    double eval_ms = 0;
    double total_ms = 0;
    std::optional<OracleReport> oracle;
};

namespace report_detail {

inline nlohmann::ordered_json value_json(const ReportValue& v) {
    if (!v.defined) return nullptr;
    if (v.lo) {
        nlohmann::ordered_json j;
        j["lo"] = *v.lo;
        j["hi"] = *v.hi;
        j["digits"] = *v.digits;
        return j;
    }
    return v.value;
}

inline ReportValue value_from_json(const nlohmann::ordered_json& j) {
    if (j.is_null()) return ReportValue::undefined();
    ReportValue v;
    if (j.is_object()) {
        v.lo = j.at("lo").get<std::string>();
        v.hi = j.at("hi").get<std::string>();
        v.digits = j.at("digits").get<double>();
        v.value = "[" + *v.lo + ", " + *v.hi + "]";
    } else {
        v.value = j.get<std::string>();
    }
    return v;
}

}  // namespace report_detail

// Machine-readable document; one JSON object on standard output.
inline nlohmann::ordered_json emit_machine(const PosteriorReport& r) {
    using report_detail::value_json;
    nlohmann::ordered_json j;
    j["evidence"] = value_json(r.evidence);
    j["moments"] = {{"mean", value_json(r.mean)},
                    {"variance", value_json(r.variance)},
                    {"skewness", value_json(r.skewness)},
                    {"kurtosis", value_json(r.kurtosis)}};
    j["masses"] = nlohmann::ordered_json::array();
    if (r.masses_available) {
        for (auto& m : r.masses) {
            nlohmann::ordered_json e;
            e["k"] = m.k;
            e["p"] = value_json(m.p);
            j["masses"].push_back(std::move(e));
        }
    }
    j["cutoff"] = r.cutoff;
    j["tail_bound"] = r.tail_bound;
    j["kernel"] = r.kernel;
    j["query"] = r.query;
    j["timings"] = {{"eval_ms", r.eval_ms}, {"total_ms", r.total_ms}};
    j["warnings"] = r.warnings;
    if (r.oracle) {
        j["oracle"] = {{"mode", r.oracle->mode},
                       {"samples", r.oracle->samples},
                       {"seed", r.oracle->seed},
                       {"rng", r.oracle->rng},
                       {"mean_stderr", r.oracle->mean_stderr},
                       {"effective_samples", r.oracle->effective_samples}};
    }
    return j;
}

inline PosteriorReport report_from_json(const nlohmann::ordered_json& j) {
    using report_detail::value_from_json;
    PosteriorReport r;
    r.evidence = value_from_json(j.at("evidence"));
    r.mean = value_from_json(j.at("moments").at("mean"));
    r.variance = value_from_json(j.at("moments").at("variance"));
    r.skewness = value_from_json(j.at("moments").at("skewness"));
    r.kurtosis = value_from_json(j.at("moments").at("kurtosis"));
    r.masses_available = !j.at("masses").empty();
    for (auto& e : j.at("masses"))
        r.masses.push_back(MassEntry{e.at("k").get<std::uint64_t>(), value_from_json(e.at("p"))});
    r.cutoff = j.at("cutoff").get<std::uint64_t>();
    r.tail_bound = j.at("tail_bound").get<double>();
    r.kernel = j.at("kernel").get<std::string>();
    r.query = j.at("query").get<std::string>();
    r.eval_ms = j.at("timings").at("eval_ms").get<double>();
    r.total_ms = j.at("timings").at("total_ms").get<double>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("oracle")) {
        OracleReport o;
        o.mode = j.at("oracle").at("mode").get<std::string>();
        o.samples = j.at("oracle").at("samples").get<std::uint64_t>();
        o.seed = j.at("oracle").at("seed").get<std::uint64_t>();
        o.rng = j.at("oracle").at("rng").get<std::string>();
        o.mean_stderr = j.at("oracle").at("mean_stderr").get<double>();
        o.effective_samples = j.at("oracle").at("effective_samples").get<double>();
        r.oracle = std::move(o);
    }
    return r;
}

inline std::string render_text(const PosteriorReport& r) {
    std::ostringstream out;
    auto line = [&](const char* name, const ReportValue& v) {
        out << name << ": ";
        if (!v.defined) {
            out << "undefined";
        } else if (v.lo) {
            out << "[" << *v.lo << ", " << *v.hi << "]  (" << *v.digits
                << " significant digits)";
        } else {
            out << v.value;
        }
        out << "\n";
    };
    out << "query: " << r.query << "\n";
    out << "kernel: " << r.kernel << "\n";
    if (r.oracle) {
        out << "oracle: " << r.oracle->mode;
        if (r.oracle->mode == "simulate")
            out << " (samples " << r.oracle->samples << ", seed " << r.oracle->seed << ", rng "
                << r.oracle->rng << ")";
        out << "\n";
    }
    line("evidence", r.evidence);
    line("mean", r.mean);
    if (r.oracle && r.oracle->mode == "simulate") {
        out << "mean_stderr: " << r.oracle->mean_stderr << "\n";
        out << "effective_samples: " << r.oracle->effective_samples << "\n";
    }
    line("variance", r.variance);
    line("skewness", r.skewness);
    line("kurtosis", r.kurtosis);
    if (r.masses_available) {
        out << "masses (cutoff " << r.cutoff << ", tail bound " << r.tail_bound << "):\n";
        for (auto& m : r.masses) {
            out << "  P[" << r.query << " = " << m.k << "] = ";
            if (m.p.lo)
                out << "[" << *m.p.lo << ", " << *m.p.hi << "]";
            else
                out << m.p.value;
            out << "\n";
        }
    }
    for (auto& w : r.warnings) out << "warning: " << w << "\n";
    out << "timings: eval " << r.eval_ms << " ms, total " << r.total_ms << " ms\n";
    return out.str();
}

}  // namespace gfi
