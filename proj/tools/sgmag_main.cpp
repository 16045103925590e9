// sgmag: spectra of magnetic Laplacians on Sierpinski-gasket graph
// approximations.
//
// Subcommands:
//   sweep     eigenvalues over a beta grid for one hole field (CSV, optional SVG)
//   decimate  limiting Dirichlet spectrum enumerated by spectral decimation (CSV)
//   check     library invariant suites; exit status reflects the outcome
//   ladder    closed-form Neumann spectrum against finite-level eigensolves (CSV)

#include "sgmag/check.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

namespace {

using namespace sgmag;

/// Raw flag storage; RunConfig is assembled afterwards so that a config file
/// can supply defaults that explicit command-line flags override.
struct Flags {
    RunConfig cfg;
    std::string boundary = "dirichlet";
    std::string config_path;
};

void attach_common(CLI::App* sub, Flags& f) {
    sub->add_option("--level", f.cfg.level, "approximation level m");
    sub->add_option("--boundary", f.boundary, "dirichlet or neumann");
    sub->add_option("--field", f.cfg.field, "field spec, e.g. \".:1\" or \".:1,01:0.5\"");
    sub->add_option("--beta-start", f.cfg.beta_start, "first beta value");
    sub->add_option("--beta-end", f.cfg.beta_end, "last beta value");
    sub->add_option("--beta-steps", f.cfg.beta_steps, "number of beta grid points");
    sub->add_option("--cutoff", f.cfg.cutoff, "keep renormalized eigenvalues up to this value");
    sub->add_option("--tol", f.cfg.tol, "matching tolerance (ladder)");
    sub->add_option("--out", f.cfg.out_path, "output CSV path (default: stdout)");
    sub->add_option("--svg", f.cfg.svg_path, "also render an SVG scatter to this path");
    sub->add_option("--config", f.config_path, "flat key=value config file");
    sub->add_option("--jobs", f.cfg.jobs, "worker threads for the sweep");
    sub->add_option("--max-level", f.cfg.max_level, "configured level cap");
}

/// Layer config-file values over the defaults, then explicit flags on top.
RunConfig finalize(const CLI::App* sub, const Flags& f) {
    RunConfig out;
    out.command = sub->get_name();
    if (!f.config_path.empty()) parse_config_text(out, read_text_file(f.config_path));
    if (sub->count("--level")) out.level = f.cfg.level;
    if (sub->count("--boundary")) out.boundary = parse_boundary(f.boundary);
    if (sub->count("--field")) out.field = f.cfg.field;
    if (sub->count("--beta-start")) out.beta_start = f.cfg.beta_start;
    if (sub->count("--beta-end")) out.beta_end = f.cfg.beta_end;
    if (sub->count("--beta-steps")) out.beta_steps = f.cfg.beta_steps;
    if (sub->count("--cutoff")) out.cutoff = f.cfg.cutoff;
    if (sub->count("--tol")) out.tol = f.cfg.tol;
    if (sub->count("--out")) out.out_path = f.cfg.out_path;
    if (sub->count("--svg")) out.svg_path = f.cfg.svg_path;
    if (sub->count("--jobs")) out.jobs = f.cfg.jobs;
    if (sub->count("--max-level")) out.max_level = f.cfg.max_level;
    out.perturb_b = f.cfg.perturb_b;
    validate_config(out);
    return out;
}

void emit(const RunConfig& cfg, const std::string& content) {
    if (cfg.out_path.empty())
        std::fputs(content.c_str(), stdout);
    else
        write_text_file(cfg.out_path, content);
}

int run_sweep(const RunConfig& cfg) {
    FieldSpec spec = parse_field_spec(cfg.field);
    if (spec.terms.size() != 1) fail("sweep needs a single-hole field spec");
    SpectrumTable table = beta_sweep(cfg.level, spec.terms[0].first, beta_grid_of(cfg),
                                     cfg.boundary, cfg.cutoff, cfg.jobs);
    emit(cfg, csv_from_sweep(table));
    if (!cfg.svg_path.empty())
        write_text_file(cfg.svg_path, svg_from_scatter(scatter_from_sweep(table)));
    return 0;
}

int run_decimate(const RunConfig& cfg) {
    emit(cfg, csv_from_decimation(dirichlet_spectrum_decimation(cfg.level, cfg.cutoff)));
    return 0;
}

int run_ladder(const RunConfig& cfg) {
    LadderReport rep = crosscheck_neumann(cfg.level, beta_grid_of(cfg), cfg.cutoff, cfg.tol);
    std::fprintf(stderr, "fitted scale %s\n", format_g12(rep.scale).c_str());
    emit(cfg, csv_from_ladder(rep));
    return 0;
}

int run_check(const RunConfig& cfg) {
    CheckOptions opt;
    opt.level = cfg.level;
    opt.perturb_b = cfg.perturb_b;
    bool ok = true;
    for (const CheckResult& r : run_checks(opt)) {
        std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.suite.c_str(),
                    r.detail.c_str());
        ok = ok && r.passed;
    }
    std::printf("%s\n", ok ? "all checks passed" : "CHECK FAILURES");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectra of magnetic Laplacians on Sierpinski gasket graph approximations"};
    app.require_subcommand(1);

    Flags sweep_flags, decimate_flags, check_flags, ladder_flags;
    CLI::App* sweep = app.add_subcommand("sweep", "eigenvalues over a beta grid");
    attach_common(sweep, sweep_flags);
    CLI::App* decimate =
        app.add_subcommand("decimate", "limiting spectrum via spectral decimation");
    attach_common(decimate, decimate_flags);
    CLI::App* check = app.add_subcommand("check", "run the library invariant suites");
    attach_common(check, check_flags);
    check->add_flag("--perturb-b", check_flags.cfg.perturb_b,
                    "negative control: perturb the hole fields and expect a failure");
    CLI::App* ladder =
        app.add_subcommand("ladder", "closed-form Neumann spectrum cross-check");
    attach_common(ladder, ladder_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return run_sweep(finalize(sweep, sweep_flags));
        if (decimate->parsed()) return run_decimate(finalize(decimate, decimate_flags));
        if (check->parsed()) return run_check(finalize(check, check_flags));
        if (ladder->parsed()) return run_ladder(finalize(ladder, ladder_flags));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "sgmag: %s\n", e.what());
        return 2;
    }
    return 0;
}
