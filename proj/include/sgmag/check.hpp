#pragma once

// Self-check suites: each bundles one family of library invariants into a
// pass/fail result with the worst observed deviation. The perturb_b option is
// a negative control for the harness itself: it injects a deliberate error
// into the hole fields and the h-norm suite must then fail.

#include "sgmag/decimation.hpp"
#include "sgmag/io.hpp"
#include "sgmag/ladder.hpp"
#include "sgmag/magnetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace sgmag {

struct CheckResult {
    std::string suite;
    bool passed = false;
    std::string detail;
};

struct CheckOptions {
    int level = 4;          ///< deepest level exercised
    bool perturb_b = false; ///< negative control: break the hole fields
};

namespace detail {

inline CheckResult check_result(const std::string& suite, double worst, double tol) {
    CheckResult r;
    r.suite = suite;
    r.passed = worst <= tol;
    r.detail = "worst deviation " + format_g12(worst) + ", tolerance " + format_g12(tol);
    return r;
}

/// Unit field on one hole, optionally perturbed for the negative control.
inline EdgeForm check_field(const CellWord& hole, int m, bool perturb) {
    FieldSpec spec;
    spec.terms.emplace_back(hole, 1.0);
    EdgeForm a = assemble_field(spec, m);
    if (perturb)
        for (double& v : a.a) v *= 1.01;
    return a;
}

}  // namespace detail

/// Hole fields carry the self-similar h-norm (5/3)^{|w|/2}, independent of
/// the level they are assembled at.
inline CheckResult check_h_norm(const CheckOptions& opt) {
    double worst = 0.0;
    for (int m = 1; m <= opt.level; ++m)
        for (const CellWord& hole : holes_at_level(m)) {
            EdgeForm a = detail::check_field(hole, m, opt.perturb_b);
            double expected = std::pow(5.0 / 3.0, 0.5 * static_cast<double>(hole.size()));
            worst = std::max(worst, std::abs(h_norm(a) / expected - 1.0));
        }
    return detail::check_result("h-norm", worst, 1e-9);
}

/// trace(refine(a)) = a, refine preserves h-norm, and refine preserves fluxes
/// through already-resolved holes.
inline CheckResult check_trace_refine(const CheckOptions& opt) {
    std::mt19937_64 rng(12345);
    double worst = 0.0;
    for (int m = 1; m < opt.level; ++m)
        for (int trial = 0; trial < 4; ++trial) {
            EdgeForm a = random_h_form(m, rng);
            EdgeForm r = refine(a);
            EdgeForm back = trace(r);
            for (std::size_t e = 0; e < a.a.size(); ++e)
                worst = std::max(worst, std::abs(back.a[e] - a.a[e]));
            worst = std::max(worst, std::abs(h_norm(r) - h_norm(a)));
            for (const CellWord& hole : holes_at_level(m))
                worst = std::max(worst, std::abs(flux(r, hole) - flux(a, hole)));
        }
    return detail::check_result("trace-refine", worst, 1e-10);
}

/// Spectra of magnetic operators with exact fields match the plain Laplacian.
inline CheckResult check_gauge_invariance(const CheckOptions& opt) {
    std::mt19937_64 rng(54321);
    double worst = 0.0;
    for (int m = 1; m <= opt.level; ++m)
        for (Boundary b : {Boundary::dirichlet, Boundary::neumann}) {
            EdgeForm a = derivative(random_vertex_function(m, rng, /*real=*/true));
            auto plain = hermitian_eigendecomposition(graph_laplacian_matrix(m, b)).values;
            auto gauged = hermitian_eigendecomposition(magnetic_matrix(a, b).matrix).values;
            for (std::size_t i = 0; i < plain.size(); ++i)
                worst = std::max(worst, std::abs(plain[i] - gauged[i]));
        }
    return detail::check_result("gauge-invariance", worst, 1e-9);
}

/// Central-hole spectra are periodic in beta with period pi sqrt(30)/3.
inline CheckResult check_flux_periodicity(const CheckOptions& opt) {
    const double period = 3.141592653589793 * std::sqrt(30.0) / 3.0;
    int m = std::min(opt.level, 3);
    double worst = 0.0;
    for (double beta : {0.3, 1.1}) {
        for (Boundary b : {Boundary::dirichlet, Boundary::neumann}) {
            FieldSpec lo, hi;
            lo.terms.emplace_back(CellWord{}, beta);
            hi.terms.emplace_back(CellWord{}, beta + period);
            auto sl = hermitian_eigendecomposition(magnetic_matrix(m, lo, b).matrix).values;
            auto sh = hermitian_eigendecomposition(magnetic_matrix(m, hi, b).matrix).values;
            for (std::size_t i = 0; i < sl.size(); ++i)
                worst = std::max(worst, std::abs(sl[i] - sh[i]));
        }
    }
    return detail::check_result("flux-periodicity", worst, 1e-8);
}

/// The decimation enumeration reproduces the dense Dirichlet spectrum.
inline CheckResult check_decimation(const CheckOptions& opt) {
    double worst = 0.0;
    for (int m = 2; m <= std::min(opt.level, 4); ++m) {
        auto entries = graph_spectrum_from_decimation(m);
        std::vector<double> predicted;
        for (const auto& e : entries)
            predicted.insert(predicted.end(), static_cast<std::size_t>(e.multiplicity),
                             e.value);
        std::sort(predicted.begin(), predicted.end());
        auto dense = hermitian_eigendecomposition(graph_laplacian_matrix(m, Boundary::dirichlet)).values;
        if (predicted.size() != dense.size())
            return CheckResult{"decimation", false,
                               "multiplicity total mismatch at level " + std::to_string(m)};
        for (std::size_t i = 0; i < dense.size(); ++i)
            worst = std::max(worst, std::abs(predicted[i] - dense[i]));
    }
    return detail::check_result("decimation", worst, 1e-9);
}

/// The ladder formula's three branch values all find finite-level partners.
/// Level 3 is the coarsest approximation whose truncation error fits the
/// matching tolerance, so the suite never goes below it.
inline CheckResult check_ladder(const CheckOptions& opt) {
    int m = std::max(3, std::min(opt.level, 4));
    auto rep = crosscheck_neumann(m, {0.0, 0.8}, 60.0, 3e-2);
    double worst = 0.0;
    for (const auto& r : rep.rows) {
        if (!std::isfinite(r.matched_value))
            return CheckResult{"ladder", false, "unmatched branch value " + r.label};
        worst = std::max(worst, r.rel_error);
    }
    return detail::check_result("ladder", worst, 3e-2);
}

inline std::vector<CheckResult> run_checks(const CheckOptions& opt) {
    return {check_h_norm(opt),       check_trace_refine(opt), check_gauge_invariance(opt),
            check_flux_periodicity(opt), check_decimation(opt), check_ladder(opt)};
}

inline bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

}  // namespace sgmag
