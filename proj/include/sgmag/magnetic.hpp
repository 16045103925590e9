#pragma once

// Magnetic graph Laplacians on gasket approximations: matrix assembly,
// spectra, beta sweeps, eigenvalue counting, and field-dependence reports.

#include "sgmag/forms.hpp"
#include "sgmag/hermitian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

namespace sgmag {

enum class Boundary { dirichlet, neumann };

inline const char* boundary_name(Boundary b) {
    return b == Boundary::dirichlet ? "dirichlet" : "neumann";
}

/// Rows of a level-m operator matrix: all of V_m under Neumann conditions,
/// V_m minus the three outer corners under Dirichlet conditions.
inline int matrix_dimension(int m, Boundary b) {
    int n = LevelGraph::get(m).vertex_count();
    return b == Boundary::dirichlet ? n - 3 : n;
}

/// Hermitian matrix of -M for the magnetic Laplacian
///   M f(x) = -sum_{y ~ x} (f(x) - e^{i a(x->y)} f(y)),
/// so the diagonal holds vertex degrees and entry (x, y) is -e^{i a(x->y)}.
struct MagneticMatrix {
    int level = 0;
    Boundary boundary = Boundary::dirichlet;
    EdgeForm field;
    HermitianMatrix matrix;

    int dimension() const { return matrix.n; }

    /// Vertex id backing a given matrix row.
    int vertex_of(int row) const {
        return boundary == Boundary::dirichlet ? row + 3 : row;
    }
    /// Matrix row of a vertex, or -1 when the vertex is a clamped corner.
    int row_of(int vertex) const {
        if (boundary == Boundary::neumann) return vertex;
        return vertex < 3 ? -1 : vertex - 3;
    }
};

/// Assemble -M for an arbitrary 1-form. Off-diagonal entries pick up the
/// Peierls phase of the form along the directed edge row -> column.
inline MagneticMatrix magnetic_matrix(const EdgeForm& a, Boundary boundary) {
    const LevelGraph& g = LevelGraph::get(a.level);

    MagneticMatrix out;
    out.level = a.level;
    out.boundary = boundary;
    out.field = a;
    out.matrix = HermitianMatrix(matrix_dimension(a.level, boundary));

    for (int v = 0; v < g.vertex_count(); ++v) {
        int r = out.row_of(v);
        if (r < 0) continue;
        out.matrix.at(r, r) = static_cast<double>(g.degree(v));
        for (const auto& link : g.adj[static_cast<std::size_t>(v)]) {
            int c = out.row_of(link.other);
            if (c < 0) continue;
            double phase = link.sign * a[link.edge];
            out.matrix.at(r, c) += -std::polar(1.0, phase);
        }
    }

    double herm = 0.0;
    for (int i = 0; i < out.matrix.n; ++i)
        for (int j = i + 1; j < out.matrix.n; ++j)
            herm = std::max(herm,
                            std::abs(out.matrix.at(i, j) - std::conj(out.matrix.at(j, i))));
    if (herm > 1e-12) fail("matrix not Hermitian");
    return out;
}

/// Assemble -M_m for the hole field described by `spec`.
inline MagneticMatrix magnetic_matrix(int m, const FieldSpec& spec, Boundary boundary) {
    return magnetic_matrix(assemble_field(spec, m), boundary);
}

/// Plain (field-free) graph Laplacian matrix -Delta_m; real symmetric with
/// vertex degrees on the diagonal and -1 per adjacent pair.
inline HermitianMatrix graph_laplacian_matrix(int m, Boundary boundary) {
    return magnetic_matrix(m, FieldSpec{}, boundary).matrix;
}

/// Magnetic energy E^a_m(f) = (1/2) sum over ordered adjacent pairs (x, y) of
/// |f(x) - e^{i a(x->y)} f(y)|^2. The half makes a = 0 reduce exactly to
/// graph_energy(f, f).
inline double magnetic_energy(const VertexFunction& f, const EdgeForm& a) {
    if (f.level != a.level) fail("level mismatch: magnetic_energy");
    const LevelGraph& g = LevelGraph::get(f.level);
    double total = 0.0;
    for (int e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edges[e];
        // Ordered pair (tail, head) plus its reverse, then halved.
        cplx d1 = f[ed.tail] - std::polar(1.0, a[e]) * f[ed.head];
        cplx d2 = f[ed.head] - std::polar(1.0, -a[e]) * f[ed.tail];
        total += 0.5 * (std::norm(d1) + std::norm(d2));
    }
    return total;
}

/// Renormalized eigenvalue (3/2) 5^m lambda, the scaling under which graph
/// Laplacian spectra converge to the fractal Laplacian spectrum.
inline double renormalized_eigenvalue(int m, double lambda) {
    return 1.5 * std::pow(5.0, m) * lambda;
}

struct SpectrumRow {
    double beta = 0.0;
    std::vector<double> raw;           ///< ascending eigenvalues of -M
    std::vector<double> renormalized;  ///< (3/2) 5^m * raw, same order
};

struct SpectrumTable {
    int level = 0;
    Boundary boundary = Boundary::dirichlet;
    double cutoff = 0.0;  ///< applied to renormalized values; +inf keeps all
    std::vector<SpectrumRow> rows;
};

namespace detail {

/// Eigenvalues of -M for the field beta * b_hole, renormalized and truncated.
inline SpectrumRow sweep_point(int m, const CellWord& hole, double beta, Boundary boundary,
                               double cutoff) {
    FieldSpec spec;
    spec.terms.emplace_back(hole, beta);
    MagneticMatrix mag = magnetic_matrix(m, spec, boundary);
    EigenResult eig = hermitian_eigendecomposition(mag.matrix);

    SpectrumRow row;
    row.beta = beta;
    for (double lambda : eig.values) {
        double r = renormalized_eigenvalue(m, lambda);
        if (r > cutoff) break;
        row.raw.push_back(lambda);
        row.renormalized.push_back(r);
    }
    return row;
}

}  // namespace detail

/// Spectra of M_m^{beta b_hole} over a grid of beta values. Each grid point is
/// an independent eigensolve; `jobs` > 1 distributes the points over worker
/// threads, with rows always emitted in grid order.
inline SpectrumTable beta_sweep(int m, const CellWord& hole, const std::vector<double>& beta_grid,
                                Boundary boundary, double cutoff, int jobs = 1) {
    if (beta_grid.empty()) fail("beta_sweep needs a nonempty grid");
    SpectrumTable table;
    table.level = m;
    table.boundary = boundary;
    table.cutoff = cutoff;
    table.rows.resize(beta_grid.size());

    int points = static_cast<int>(beta_grid.size());
    jobs = std::clamp(jobs, 1, points);
    if (jobs == 1) {
        for (int i = 0; i < points; ++i)
            table.rows[i] = detail::sweep_point(m, hole, beta_grid[i], boundary, cutoff);
        return table;
    }

    // Warm the shared level cache before spawning workers.
    (void)LevelGraph::get(m);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < points; i = next.fetch_add(1))
            table.rows[i] = detail::sweep_point(m, hole, beta_grid[i], boundary, cutoff);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return table;
}

/// Eigenvalue counting function: number of eigenvalues <= x.
inline int counting_function(const std::vector<double>& ascending, double x) {
    return static_cast<int>(std::upper_bound(ascending.begin(), ascending.end(), x) -
                            ascending.begin());
}

/// Weyl-scaled counting function rho(x) x^{-log 3 / log 5}; the exponent is
/// the spectral dimension over two.
inline double weyl_ratio(const std::vector<double>& ascending, double x) {
    if (x <= 0.0) fail("weyl_ratio needs x > 0");
    static const double kExponent = std::log(3.0) / std::log(5.0);
    return counting_function(ascending, x) * std::pow(x, -kExponent);
}

struct BetaDependenceReport {
    int level = 0;
    Boundary boundary = Boundary::dirichlet;
    double tol = 0.0;
    /// Renormalized field-free eigenvalues that stay present (within tol) in
    /// the spectrum at every grid beta; ascending multiset.
    std::vector<double> fixed;
    /// Complementary multiset of the field-free spectrum.
    std::vector<double> moving;
    /// Max |lambda_i(beta) - lambda_i(grid[0])| per sorted index, renormalized.
    /// Index tracking misattributes variation where branches cross, so `fixed`
    /// and `moving` are computed by value presence, not from this.
    std::vector<double> index_variation;
};

/// Partition of the level-m field-free spectrum into eigenvalues that persist
/// at every beta on the grid (field on one hole) and eigenvalues that move. A
/// field-free eigenvalue of multiplicity k counts as fixed with the smallest
/// multiplicity it retains across the grid.
inline BetaDependenceReport beta_dependence_report(int m, const CellWord& hole,
                                                   const std::vector<double>& beta_grid,
                                                   double tol = 1e-6,
                                                   Boundary boundary = Boundary::dirichlet) {
    if (beta_grid.size() < 2) fail("beta_dependence_report needs at least two grid points");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> spectra;
    spectra.reserve(beta_grid.size());
    for (double beta : beta_grid)
        spectra.push_back(detail::sweep_point(m, hole, beta, boundary, inf).renormalized);
    std::vector<double> plain =
        detail::sweep_point(m, hole, 0.0, boundary, inf).renormalized;

    BetaDependenceReport report;
    report.level = m;
    report.boundary = boundary;
    report.tol = tol;

    int dim = static_cast<int>(plain.size());
    report.index_variation.assign(dim, 0.0);
    for (const auto& spec : spectra)
        for (int i = 0; i < dim; ++i)
            report.index_variation[i] =
                std::max(report.index_variation[i], std::abs(spec[i] - spectra[0][i]));

    // Group the field-free spectrum into numerically equal clusters, then ask
    // how many copies of each cluster value survive at every beta.
    int i = 0;
    while (i < dim) {
        int j = i + 1;
        while (j < dim && plain[j] - plain[j - 1] <= tol) ++j;
        double value = 0.0;
        for (int k = i; k < j; ++k) value += plain[k];
        value /= (j - i);

        int kept = j - i;
        for (const auto& spec : spectra) {
            int present = counting_function(spec, value + tol) -
                          counting_function(spec, value - tol);
            kept = std::min(kept, present);
        }
        for (int k = 0; k < j - i; ++k)
            (k < kept ? report.fixed : report.moving).push_back(plain[i + k]);
        i = j;
    }
    std::sort(report.fixed.begin(), report.fixed.end());
    std::sort(report.moving.begin(), report.moving.end());
    return report;
}

}  // namespace sgmag
