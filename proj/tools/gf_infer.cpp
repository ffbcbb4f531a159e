// gf-infer: exact posterior inference for SGCL programs.
//
// Exit codes: 0 success, 2 front-end error (parse/validate), 3 evaluation
// error (zero evidence, unsupported arithmetic, domain violations), 4 usage.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gfi/engine.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Exact Bayesian inference for discrete probabilistic programs"};
    app.get_formatter()->column_width(34);

    gfi::RunConfig cfg;
    std::string oracle_mode;
    bool rational = false, bounds = false, naive = false, no_mgf = false, no_memo = false,
         json_out = false;
    std::optional<unsigned> precision;
    std::optional<std::uint64_t> mass_limit, truncate_at;

    app.add_option("file", cfg.path, "SGCL program file")->required();
    app.add_option("--var", cfg.var, "query variable (default: last assigned)");
    app.add_flag("--rational", rational, "exact rational arithmetic");
    app.add_option("--precision", precision, "floating-point precision in bits");
    app.add_flag("--bounds", bounds, "interval arithmetic (sound enclosures)");
    app.add_option("--mass-limit", mass_limit, "largest k in the mass table");
    app.add_flag("--json", json_out, "machine-readable output on stdout");
    app.add_flag("--naive-observe", naive,
                 "expand observations through a fresh variable (differential testing)");
    app.add_option("--oracle", oracle_mode, "run a reference oracle instead: enumerate|simulate")
        ->check(CLI::IsMember({"enumerate", "simulate"}));
    app.add_option("--samples", cfg.samples, "simulation sample count");
    app.add_option("--seed", cfg.seed, "simulation seed");
    app.add_option("--truncate-at", truncate_at, "enumeration support cap per distribution");
    app.add_flag("--no-mgf", no_mgf,
                 "debug: keep the log-form representation for continuous variables");
    app.add_flag("--no-memo", no_memo, "debug: disable branch-prefix memoization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    if (rational && (precision || bounds)) {
        std::cerr << "usage error: --rational excludes --precision/--bounds" << std::endl;
        return 4;
    }

    if (rational)
        cfg.kernel = gfi::RunConfig::Kernel::Rational;
    else if (bounds && precision)
        cfg.kernel = gfi::RunConfig::Kernel::IntervalBigFloat;
    else if (bounds)
        cfg.kernel = gfi::RunConfig::Kernel::IntervalF64;
    else if (precision)
        cfg.kernel = gfi::RunConfig::Kernel::BigFloat;
    if (precision) cfg.precision = *precision;
    cfg.mass_limit = mass_limit;
    cfg.truncate_at = truncate_at;
    cfg.naive_observe = naive;
    cfg.mgf_representation = !no_mgf;
    cfg.memo = !no_memo;
    if (oracle_mode == "enumerate") cfg.oracle = gfi::RunConfig::Oracle::Enumerate;
    if (oracle_mode == "simulate") cfg.oracle = gfi::RunConfig::Oracle::Simulate;

    try {
        gfi::PosteriorReport rep = gfi::run(cfg);
        if (json_out) {
            std::cout << gfi::emit_machine(rep).dump(2) << std::endl;
            for (auto& w : rep.warnings) std::cerr << "warning: " << w << std::endl;
        } else {
            std::cout << gfi::render_text(rep);
        }
        return 0;
    } catch (const gfi::GfiError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        if (e.kind() == gfi::ErrKind::Usage) return 4;
        return e.is_front_end() ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
}
