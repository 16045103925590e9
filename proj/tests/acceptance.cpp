// Acceptance gate: nine end-to-end criteria, one [PASS]/[FAIL] line each.
// Every tolerance is pinned here, next to the check that uses it, and each
// line reports the worst measured deviation alongside its budget and runtime.
// The process exit status is the number of failed criteria.

#include "sgmag/check.hpp"
#include "sgmag/decimation.hpp"
#include "sgmag/io.hpp"
#include "sgmag/ladder.hpp"
#include "sgmag/magnetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace sgmag;

namespace {

constexpr double kPi = 3.141592653589793;
const double kSqrt30 = std::sqrt(30.0);
const double kPeriod = kPi * kSqrt30 / 3.0;

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

void report(int idx, const char* name, bool ok, const std::string& detail, double secs,
            double budget_secs) {
    bool in_budget = secs < budget_secs;
    std::printf("[%s] %d %s (%s; %.2f s of %.0f s budget)\n",
                (ok && in_budget) ? "PASS" : "FAIL", idx, name, detail.c_str(), secs,
                budget_secs);
    if (!(ok && in_budget)) ++failures;
}

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return g;
}

std::vector<double> dirichlet_spectrum(int m, double beta) {
    FieldSpec spec;
    spec.terms.emplace_back(CellWord{}, beta);
    return hermitian_eigendecomposition(magnetic_matrix(m, spec, Boundary::dirichlet).matrix)
        .values;
}

// Criterion 1: the 3x3 level-1 Dirichlet magnetic matrix has the closed-form
// spectrum {4 - 2cos(2 pi k/3 + 2 beta/sqrt 30)}.
void criterion_1() {
    constexpr double tol = 1e-10;
    Timer t;
    double worst = 0.0;
    for (double beta : grid(0.0, 2.0, 50)) {
        std::vector<double> predicted;
        for (int k = 0; k < 3; ++k)
            predicted.push_back(4.0 - 2.0 * std::cos(2.0 * kPi * k / 3.0 + 2.0 * beta / kSqrt30));
        std::sort(predicted.begin(), predicted.end());
        auto measured = dirichlet_spectrum(1, beta);
        for (int k = 0; k < 3; ++k)
            worst = std::max(worst, std::abs(measured[static_cast<std::size_t>(k)] -
                                             predicted[static_cast<std::size_t>(k)]));
    }
    report(1, "closed-form level-1 spectrum", worst <= tol,
           "max dev " + format_g12(worst) + " vs " + format_g12(tol), t.seconds(), 1.0);
}

// Criterion 2: spectra of magnetic operators with exact fields dA match the
// plain Laplacian at levels 2..5.
void criterion_2() {
    constexpr double tol = 1e-9;
    Timer t;
    std::mt19937_64 rng(20240817);
    double worst = 0.0;
    for (int m = 2; m <= 5; ++m) {
        auto plain = hermitian_eigendecomposition(graph_laplacian_matrix(m, Boundary::dirichlet))
                         .values;
        for (int trial = 0; trial < 20; ++trial) {
            EdgeForm a = derivative(random_vertex_function(m, rng, /*real=*/true));
            auto gauged =
                hermitian_eigendecomposition(magnetic_matrix(a, Boundary::dirichlet).matrix)
                    .values;
            for (std::size_t i = 0; i < plain.size(); ++i)
                worst = std::max(worst, std::abs(plain[i] - gauged[i]));
        }
    }
    report(2, "gauge invariance under exact fields", worst <= tol,
           "max dev " + format_g12(worst) + " vs " + format_g12(tol), t.seconds(), 60.0);
}

// Criterion 3: level-4 central-hole spectra repeat with period pi sqrt(30)/3.
void criterion_3() {
    constexpr double tol = 1e-8;
    Timer t;
    double worst = 0.0;
    for (double beta : grid(0.0, 3.0, 10)) {
        auto lo = dirichlet_spectrum(4, beta);
        auto hi = dirichlet_spectrum(4, beta + kPeriod);
        for (std::size_t i = 0; i < lo.size(); ++i)
            worst = std::max(worst, std::abs(lo[i] - hi[i]));
    }
    report(3, "flux periodicity at level 4", worst <= tol,
           "max dev " + format_g12(worst) + " vs " + format_g12(tol), t.seconds(), 60.0);
}

// Criterion 4: the decimation enumeration reproduces the dense Dirichlet
// spectrum with exact multiplicities at levels 2..4.
void criterion_4() {
    constexpr double tol = 1e-9;
    Timer t;
    double worst = 0.0;
    bool counts_ok = true;
    for (int m = 2; m <= 4; ++m) {
        std::vector<double> predicted;
        for (const auto& e : graph_spectrum_from_decimation(m))
            predicted.insert(predicted.end(), static_cast<std::size_t>(e.multiplicity), e.value);
        std::sort(predicted.begin(), predicted.end());
        auto dense =
            hermitian_eigendecomposition(graph_laplacian_matrix(m, Boundary::dirichlet)).values;
        int expected = (pow3(m + 1) - 3) / 2;
        if (static_cast<int>(predicted.size()) != expected ||
            static_cast<int>(dense.size()) != expected)
            counts_ok = false;
        for (std::size_t i = 0; i < std::min(predicted.size(), dense.size()); ++i)
            worst = std::max(worst, std::abs(predicted[i] - dense[i]));
    }
    report(4, "decimation multiset oracle (m = 2..4)", counts_ok && worst <= tol,
           "max dev " + format_g12(worst) + " vs " + format_g12(tol) +
               (counts_ok ? "" : "; count mismatch"),
           t.seconds(), 120.0);
}

// Criterion 5: at level 4 with a central-hole field, the beta-independent
// part of the spectrum has exactly the predicted size, sits inside the plain
// spectrum, and every transported 5-series eigenfunction stays an
// eigenfunction of the magnetic operator.
void criterion_5() {
    constexpr double var_tol = 1e-6;
    constexpr double subset_tol = 1e-8;
    constexpr double residual_tol = 1e-9;
    Timer t;

    auto beta_points = grid(0.0, 2.0, 21);
    auto rep = beta_dependence_report(4, CellWord{}, beta_points, var_tol);
    FieldSpec spec;
    spec.terms.emplace_back(CellWord{}, 1.3);
    int predicted = predicted_fixed_count(4, spec);
    bool size_ok = static_cast<int>(rep.fixed.size()) == predicted;

    auto plain = dirichlet_spectrum(4, 0.0);
    double subset_worst = 0.0;
    for (double v : rep.fixed) {
        double raw = v / renormalized_eigenvalue(4, 1.0);
        double best = 1e9;
        for (double p : plain) best = std::min(best, std::abs(p - raw));
        subset_worst = std::max(subset_worst, best);
    }

    // Transport every 5-series basis function (births 2..4) to level 4 and
    // measure the magnetic eigenvalue residual at a grid point.
    double residual_worst = 0.0;
    MagneticMatrix M = magnetic_matrix(4, spec, Boundary::dirichlet);
    for (int m0 = 2; m0 <= 4; ++m0) {
        double lambda = 5.0;
        for (auto f : five_series_chain_basis(m0)) {
            double lam = lambda;
            while (f.level < 4) {
                lam = phi_branch(lam, '-');
                f = extend_eigenfunction(f, lam);
            }
            VertexFunction g = gauge_transport(f, spec);
            // Residual of M g = lam g over matrix rows.
            const LevelGraph& lg = LevelGraph::get(4);
            for (int row = 0; row < M.dimension(); ++row) {
                int v = M.vertex_of(row);
                cplx acc = static_cast<double>(lg.adj[static_cast<std::size_t>(v)].size()) * g[v];
                for (const LevelGraph::Link& link : lg.adj[static_cast<std::size_t>(v)])
                    acc -= std::polar(1.0, link.sign * M.field[link.edge]) * g[link.other];
                residual_worst = std::max(residual_worst, std::abs(acc - lam * g[v]));
            }
        }
    }

    bool ok = size_ok && subset_worst <= subset_tol && residual_worst <= residual_tol;
    report(5, "beta-independent set at level 4", ok,
           "fixed " + std::to_string(rep.fixed.size()) + " of predicted " +
               std::to_string(predicted) + ", subset dev " + format_g12(subset_worst) +
               ", transport residual " + format_g12(residual_worst),
           t.seconds(), 300.0);
}

// Criterion 6: the Weyl-scaled counting function is bounded within a narrow
// band over the reliable range, the magnetic counting function never departs
// from the free one by more than the moving-eigenvalue count, and the moving
// fraction shrinks with the level.
void criterion_6() {
    Timer t;
    auto free6 = dirichlet_spectrum(6, 0.0);
    double lo = free6.front();
    double hi = 0.1 * free6.back();

    // The ratio is a step function of x: local maxima sit at the eigenvalues
    // (the counting function is right-continuous), local minima just before
    // the next eigenvalue and at the window edges. Evaluating there gives the
    // exact sup and inf rather than a grid estimate.
    double c1 = 1e300, c2 = 0.0;
    auto consider = [&](double x) {
        if (x < lo || x > hi) return;
        double ratio = weyl_ratio(free6, x);
        c1 = std::min(c1, ratio);
        c2 = std::max(c2, ratio);
    };
    consider(lo);
    consider(hi);
    for (double v : free6) {
        consider(v);
        consider(std::nextafter(v, 0.0));
    }
    bool band_ok = c2 / c1 < 3.0;

    auto mag6 = dirichlet_spectrum(6, 1.0);
    int sup_diff = 0;
    auto probe = [&](double x) {
        if (x < lo || x > hi) return;
        sup_diff = std::max(sup_diff,
                            std::abs(counting_function(free6, x) - counting_function(mag6, x)));
    };
    for (double v : free6) probe(v);
    for (double v : mag6) probe(v);
    int moving_bound = 3 * (1 << 5);
    bool sup_ok = sup_diff <= moving_bound;

    // Moving fraction by level, from the beta-dependence report.
    std::vector<double> fractions;
    auto small_grid = grid(0.0, 2.0, 4);
    for (int m = 3; m <= 5; ++m) {
        auto rep = beta_dependence_report(m, CellWord{}, small_grid, 1e-6);
        double total = static_cast<double>(rep.fixed.size() + rep.moving.size());
        fractions.push_back(static_cast<double>(rep.moving.size()) / total);
    }
    bool fractions_ok = fractions[0] > fractions[1] && fractions[1] > fractions[2];

    report(6, "Weyl ratio band and magnetic stability", band_ok && sup_ok && fractions_ok,
           "band ratio " + format_g12(c2 / c1) + " vs 3, sup diff " +
               std::to_string(sup_diff) + " vs " + std::to_string(moving_bound) +
               ", moving fractions " + format_g12(fractions[0]) + " > " +
               format_g12(fractions[1]) + " > " + format_g12(fractions[2]),
           t.seconds(), 600.0);
}

// Criterion 7: the figure sweep. Levels 4, 5, 6 over beta in [0, 2] with the
// renormalized cutoff 160: branches move continuously in beta, and the
// beta-independent part of each level's full spectrum reappears at the next
// level. In this cutoff window all surviving branches are beta-dependent
// (the lowest beta-independent value sits near 279), so the horizontal-line
// and refinement checks run on the full spectra and the continuity check on
// the windowed sweep data.
void criterion_7() {
    constexpr double jump_budget = 60.0;  // renormalized units per unit beta
    constexpr double reappear_tol = 1e-3;
    Timer t;

    auto beta_points = grid(0.0, 2.0, 81);
    double max_jump = 0.0;
    double sweep_secs = 0.0;
    for (int m : {4, 5, 6}) {
        Timer st;
        SpectrumTable table = beta_sweep(m, CellWord{}, beta_points, Boundary::dirichlet, 160.0);
        sweep_secs += st.seconds();
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            const auto& prev = table.rows[i - 1].renormalized;
            const auto& cur = table.rows[i].renormalized;
            double dbeta = table.rows[i].beta - table.rows[i - 1].beta;
            for (std::size_t k = 0; k < std::min(prev.size(), cur.size()); ++k)
                max_jump = std::max(max_jump, std::abs(cur[k] - prev[k]) / dbeta);
        }
    }
    bool continuity_ok = max_jump <= jump_budget;

    // Fixed sets of the full (uncut) spectra: present at every level and
    // reproduced, value by value, at the next level.
    auto fixed_grid = grid(0.0, 2.0, 3);
    std::vector<std::vector<double>> fixed;
    std::vector<int> expected_counts;
    for (int m : {4, 5, 6}) {
        auto rep = beta_dependence_report(m, CellWord{}, fixed_grid, 1e-6);
        fixed.push_back(rep.fixed);
        expected_counts.push_back((pow3(m + 1) - 3) / 2 - 3 * (1 << (m - 1)));
    }
    bool lines_ok = true;
    for (std::size_t i = 0; i < fixed.size(); ++i)
        if (static_cast<int>(fixed[i].size()) != expected_counts[i]) lines_ok = false;

    double reappear_worst = 0.0;
    for (std::size_t i = 0; i + 1 < fixed.size(); ++i) {
        int m = 4 + static_cast<int>(i);
        double scale_m = renormalized_eigenvalue(m, 1.0);
        double scale_next = renormalized_eigenvalue(m + 1, 1.0);
        for (double v : fixed[i]) {
            double raw = v / scale_m;
            double best = 1e9;
            for (double w : fixed[i + 1]) best = std::min(best, std::abs(w / scale_next - raw));
            reappear_worst = std::max(reappear_worst, best / std::max(raw, 1e-12));
        }
    }
    bool reappear_ok = reappear_worst <= reappear_tol;

    report(7, "figure sweep: continuity and refinement", continuity_ok && lines_ok && reappear_ok,
           "max branch slope " + format_g12(max_jump) + " vs " + format_g12(jump_budget) +
               ", fixed counts " + std::to_string(fixed[0].size()) + "/" +
               std::to_string(fixed[1].size()) + "/" + std::to_string(fixed[2].size()) +
               ", reappearance dev " + format_g12(reappear_worst) + " vs " +
               format_g12(reappear_tol) + ", sweeps " + format_g12(sweep_secs) + " s",
           t.seconds(), 14400.0);
}

// Criterion 8: the ladder formula against level-6 Neumann eigensolves. The
// three branch values (one fitted scalar, estimated at beta = 0) track the
// three lowest eigenvalues across the grid; the sigma' component of the
// formula is identical at every grid point. The residual beta-motion of the
// sigma'-matched finite-level eigenvalues is reported for reference.
void criterion_8() {
    constexpr double track_tol = 5e-2;
    Timer t;
    auto rep = crosscheck_neumann(6, grid(0.0, 2.0, 11), 300.0, track_tol);

    double track_worst = 0.0;
    bool matched_ok = true;
    std::vector<double> sigma_formula_first;
    double sigma_graph_spread = 0.0;
    std::vector<std::vector<double>> sigma_tracks;
    for (const auto& r : rep.rows) {
        if (r.label[0] == 'k') {
            if (!std::isfinite(r.matched_value)) matched_ok = false;
            else track_worst = std::max(track_worst, r.rel_error);
        } else {
            std::size_t idx = static_cast<std::size_t>(std::stoi(r.label.substr(5)));
            if (sigma_tracks.size() <= idx) sigma_tracks.resize(idx + 1);
            if (sigma_formula_first.size() <= idx)
                sigma_formula_first.resize(idx + 1, r.formula_value);
            if (std::abs(r.formula_value - sigma_formula_first[idx]) > 1e-6) matched_ok = false;
            if (std::isfinite(r.matched_value)) sigma_tracks[idx].push_back(r.matched_value);
        }
    }
    for (const auto& track : sigma_tracks) {
        if (track.size() < 2) continue;
        double lo = *std::min_element(track.begin(), track.end());
        double hi = *std::max_element(track.begin(), track.end());
        sigma_graph_spread = std::max(sigma_graph_spread, (hi - lo) / hi);
    }

    bool ok = matched_ok && track_worst <= track_tol;
    report(8, "ladder formula at level 6", ok,
           "fitted scale " + format_g12(rep.scale) + ", branch dev " + format_g12(track_worst) +
               " vs " + format_g12(track_tol) + ", sigma graph motion " +
               format_g12(sigma_graph_spread),
           t.seconds(), 1800.0);
}

// Criterion 9: first-order calculus. trace inverts refine, refine is an
// h-isometry (so Pythagoras holds for the trace residual), fluxes survive
// refinement, and the harmonic space has one dimension per hole up to
// level 5.
void criterion_9() {
    constexpr double exact_tol = 1e-12;
    constexpr double norm_tol = 1e-10;
    Timer t;
    std::mt19937_64 rng(93);
    double trace_worst = 0.0, norm_worst = 0.0, flux_worst = 0.0;
    for (int m = 1; m <= 4; ++m)
        for (int trial = 0; trial < 6; ++trial) {
            EdgeForm a = random_h_form(m, rng);
            EdgeForm r = refine(a);
            EdgeForm back = trace(r);
            for (std::size_t e = 0; e < a.a.size(); ++e)
                trace_worst = std::max(trace_worst, std::abs(back.a[e] - a.a[e]));
            norm_worst = std::max(norm_worst, std::abs(h_norm(r) - h_norm(a)));
            for (const CellWord& hole : holes_at_level(m))
                flux_worst = std::max(flux_worst, std::abs(flux(r, hole) - flux(a, hole)));

            // Contraction and Pythagoras for the trace of a finer form.
            EdgeForm x = random_h_form(m + 1, rng);
            EdgeForm tr = trace(x);
            EdgeForm resid = x - refine(tr);
            if (h_norm(tr) > h_norm(x) + 1e-12) norm_worst = 1.0;
            norm_worst = std::max(
                norm_worst, std::abs(h_norm(x) * h_norm(x) - h_norm(refine(tr)) * h_norm(refine(tr)) -
                                     h_norm(resid) * h_norm(resid)));
        }

    bool dims_ok = true;
    for (int m = 1; m <= 5; ++m) {
        auto holes = holes_at_level(m);
        int n = static_cast<int>(holes.size());
        std::vector<EdgeForm> fields;
        for (const CellWord& h : holes) {
            FieldSpec s;
            s.terms.emplace_back(h, 1.0);
            fields.push_back(assemble_field(s, m));
        }
        HermitianMatrix gram(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double v = h_inner(fields[static_cast<std::size_t>(i)],
                                   fields[static_cast<std::size_t>(j)]);
                gram.at(i, j) = v;
                gram.at(j, i) = v;
            }
        auto ev = hermitian_eigendecomposition(gram).values;
        int rank = 0;
        for (double v : ev)
            if (v > 1e-8 * std::max(1.0, ev.back())) ++rank;
        if (rank != (pow3(m) - 1) / 2) dims_ok = false;

        // The harmonic part of a generic form lies in the hole-field span.
        if (m <= 4) {
            EdgeForm probe = random_h_form(m, rng);
            auto [exact_part, harmonic_part] = hodge_split(probe);
            (void)exact_part;
            EdgeForm resid = harmonic_part;
            // One Gauss-Seidel style projection pass is not enough in an
            // oblique basis, so solve the normal equations via the Gram matrix.
            std::vector<cplx> rhs(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                rhs[static_cast<std::size_t>(i)] =
                    h_inner(fields[static_cast<std::size_t>(i)], harmonic_part);
            EigenResult eg = hermitian_eigendecomposition(gram, true);
            std::vector<double> coef(static_cast<std::size_t>(n), 0.0);
            for (int k = 0; k < n; ++k) {
                cplx proj = 0.0;
                for (int i = 0; i < n; ++i) proj += std::conj(eg.vec(i, k)) * rhs[static_cast<std::size_t>(i)];
                for (int i = 0; i < n; ++i)
                    coef[static_cast<std::size_t>(i)] +=
                        (proj / eg.values[static_cast<std::size_t>(k)] * eg.vec(i, k)).real();
            }
            for (int i = 0; i < n; ++i) resid = resid - coef[static_cast<std::size_t>(i)] * fields[static_cast<std::size_t>(i)];
            if (h_norm(resid) > 1e-8) dims_ok = false;
        }
    }

    bool ok = trace_worst <= exact_tol && norm_worst <= norm_tol && flux_worst <= norm_tol &&
              dims_ok;
    report(9, "trace/refine calculus and Hodge dimensions", ok,
           "trace dev " + format_g12(trace_worst) + " vs " + format_g12(exact_tol) +
               ", norm/Pythagoras dev " + format_g12(norm_worst) + ", flux dev " +
               format_g12(flux_worst) + (dims_ok ? "" : ", dimension mismatch"),
           t.seconds(), 60.0);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures;
}
