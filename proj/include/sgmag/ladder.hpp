#pragma once

// Closed-form magnetic Neumann spectrum on the infinite ladder of gasket
// approximations, and its numerical cross-check against finite-level
// eigensolves.
//
// The limit spectrum is built from the decimation limit function R: a fixed
// beta-independent part Sigma' made of dilates 5 * 5^m * R({3, 5}), plus
// three beta-dependent branches R(2 - 2cos(2k pi/3 - 2 beta / sqrt(30))).
// These values live on the 5^m lambda_m axis; finite-level eigenvalues carry
// an extra constant factor, so the cross-check fits one global scale at
// beta = 0 and keeps it fixed across beta and branch index.

#include "sgmag/decimation.hpp"
#include "sgmag/magnetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sgmag {

enum class SigmaVariant { sigma, sigma_prime };

inline const char* sigma_variant_name(SigmaVariant v) {
    return v == SigmaVariant::sigma ? "sigma" : "sigma_prime";
}

/// Beta-independent part of the ladder spectrum, truncated at a cutoff.
/// The full set adds the single extra value 5 * R(2) to the primed set.
struct SigmaSet {
    SigmaVariant variant = SigmaVariant::sigma;
    double cutoff = 0.0;
    std::vector<double> values;  // sorted ascending, all <= cutoff
};

/// Build Sigma = 5 (R{2} u U_m 5^m R{3,5}) and Sigma' = 5 (U_m 5^m R{3,5}),
/// both truncated at `cutoff` and sorted ascending.
inline std::pair<SigmaSet, SigmaSet> sigma_sets(double cutoff) {
    if (!(cutoff > 0.0)) fail("sigma_sets needs a positive cutoff");

    std::vector<double> primed;
    double dilate = 5.0;  // 5 * 5^m for m = 0, 1, ...
    const double r3 = R_function(3.0);
    const double r5 = R_function(5.0);
    while (dilate * r3 <= cutoff) {
        primed.push_back(dilate * r3);
        if (dilate * r5 <= cutoff) primed.push_back(dilate * r5);
        dilate *= 5.0;
    }
    std::sort(primed.begin(), primed.end());

    std::vector<double> full = primed;
    double base = 5.0 * R_function(2.0);
    if (base <= cutoff) full.push_back(base);
    std::sort(full.begin(), full.end());

    SigmaSet s{SigmaVariant::sigma, cutoff, std::move(full)};
    SigmaSet sp{SigmaVariant::sigma_prime, cutoff, std::move(primed)};
    return {std::move(s), std::move(sp)};
}

namespace detail {

/// Formula values with their provenance labels: "k0".."k2" for the three
/// cosine branches, "sigmaN" for the N-th element of Sigma' (ascending).
/// Every value is multiplied by `scale` before the cutoff is applied.
inline std::vector<std::pair<std::string, double>>
labelled_neumann_formula(double beta, double cutoff, double scale) {
    std::vector<std::pair<std::string, double>> out;
    constexpr double kPi = 3.141592653589793;
    const double sqrt30 = std::sqrt(30.0);
    for (int k = 0; k < 3; ++k) {
        double arg = 2.0 - 2.0 * std::cos(2.0 * kPi * k / 3.0 - 2.0 * beta / sqrt30);
        double value = scale * R_function(arg);
        if (value <= cutoff)
            out.emplace_back("k" + std::to_string(k), value);
    }
    auto sp = sigma_sets(std::max(cutoff / scale, 1.0)).second;
    for (std::size_t i = 0; i < sp.values.size(); ++i) {
        double value = scale * sp.values[i];
        if (value <= cutoff)
            out.emplace_back("sigma" + std::to_string(i), value);
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

}  // namespace detail

/// Predicted Neumann magnetic spectrum for a field of strength beta on every
/// hole: the three cosine branches merged with Sigma', sorted, truncated at
/// `cutoff`. `scale` multiplies every value first (1.0 keeps the bare
/// R-normalized values; the cross-check passes its fitted constant).
inline std::vector<double> neumann_spectrum_formula(double beta, double cutoff,
                                                    double scale = 1.0) {
    std::vector<double> out;
    for (const auto& [label, value] : detail::labelled_neumann_formula(beta, cutoff, scale))
        out.push_back(value);
    return out;
}

/// One matched (or unmatched) formula value at one beta point.
struct LadderMatchRow {
    double beta = 0.0;
    std::string label;            // "k0".."k2" or "sigmaN"
    double formula_value = 0.0;   // scaled by the fitted constant
    double matched_value = 0.0;   // NaN when no graph eigenvalue lies within tol
    double rel_error = 0.0;       // NaN when unmatched
};

/// Cross-check report: the fitted scale, one row per (beta, formula value),
/// and the finite-level eigenvalues the formula failed to claim.
struct LadderReport {
    int level = 0;
    double cutoff = 0.0;
    double tol = 0.0;
    double scale = 0.0;
    std::vector<LadderMatchRow> rows;
    std::vector<std::pair<double, double>> unmatched;  // (beta, renormalized eigenvalue)
};

namespace detail {

/// Relative distance with a floor of 1 in the denominator so that values
/// near zero are compared absolutely.
inline double ladder_rel_error(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Sorted renormalized Neumann spectrum for strength `beta` on every hole,
/// truncated at `cutoff`.
inline std::vector<double> renormalized_neumann_spectrum(int m, double beta,
                                                         double cutoff) {
    FieldSpec spec;
    if (beta != 0.0) spec.terms.emplace_back(CellWord{}, beta);
    MagneticMatrix M = magnetic_matrix(m, spec, Boundary::neumann);
    auto values = hermitian_eigendecomposition(M.matrix).values;
    std::vector<double> out;
    for (double v : values) {
        double r = renormalized_eigenvalue(m, v);
        if (r <= cutoff) out.push_back(r);
    }
    return out;
}

}  // namespace detail

/// Compare the closed-form spectrum against level-m Neumann eigensolves over
/// a beta grid. One global scale is fitted at beta = 0: the smallest positive
/// formula value there is R(3), and the matching graph eigenvalue is the
/// second entry of the sorted spectrum. Matching is greedy nearest-neighbour
/// on sorted lists; a pair within relative `tol` is accepted, everything else
/// lands in the unmatched list.
inline LadderReport crosscheck_neumann(int m, const std::vector<double>& beta_grid,
                                       double cutoff, double tol) {
    if (m < 2) fail("crosscheck_neumann needs level >= 2");
    if (beta_grid.empty()) fail("crosscheck_neumann needs a nonempty grid");
    if (!(cutoff > 0.0)) fail("crosscheck_neumann needs a positive cutoff");

    LadderReport report;
    report.level = m;
    report.cutoff = cutoff;
    report.tol = tol;

    {
        auto base = detail::renormalized_neumann_spectrum(m, 0.0, cutoff);
        if (base.size() < 2) fail("crosscheck_neumann cutoff excludes the fit value");
        report.scale = base[1] / R_function(3.0);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double beta : beta_grid) {
        auto formula = detail::labelled_neumann_formula(beta, cutoff, report.scale);
        auto graph = detail::renormalized_neumann_spectrum(m, beta, cutoff);
        std::vector<bool> used(graph.size(), false);

        for (const auto& [label, value] : formula) {
            int best = -1;
            double best_gap = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < graph.size(); ++i) {
                if (used[i]) continue;
                double gap = std::abs(graph[i] - value);
                if (gap < best_gap) {
                    best_gap = gap;
                    best = static_cast<int>(i);
                }
            }
            LadderMatchRow row;
            row.beta = beta;
            row.label = label;
            row.formula_value = value;
            if (best >= 0 &&
                detail::ladder_rel_error(value, graph[static_cast<std::size_t>(best)]) <= tol) {
                used[static_cast<std::size_t>(best)] = true;
                row.matched_value = graph[static_cast<std::size_t>(best)];
                row.rel_error = detail::ladder_rel_error(value, row.matched_value);
            } else {
                row.matched_value = nan;
                row.rel_error = nan;
            }
            report.rows.push_back(std::move(row));
        }
        for (std::size_t i = 0; i < graph.size(); ++i)
            if (!used[i]) report.unmatched.emplace_back(beta, graph[i]);
    }
    return report;
}

}  // namespace sgmag
