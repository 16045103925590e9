#pragma once

// Vertex functions, graph energy, harmonic extension, and the discrete
// 1-form calculus on the gasket graphs: the spaces H_m of cellwise-exact
// forms, refinement H_m -> H_{m+1}, the trace projection back, the harmonic
// loop form b, field assembly, fluxes and the exact/harmonic decomposition.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "sgmag/topology.hpp"

namespace sgmag {

using cplx = std::complex<double>;

/// Complex-valued function on V_m.
struct VertexFunction {
    int level = 0;
    std::vector<cplx> v;

    static VertexFunction zero(int m) {
        return {m, std::vector<cplx>(static_cast<std::size_t>(
                       LevelGraph::get(m).vertex_count()))};
    }
    cplx& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    const cplx& operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

/// Real 1-form on the directed level-m edges.  Only the value in the
/// canonical direction is stored; the reverse direction is its negative, so
/// antisymmetry holds by construction.
struct EdgeForm {
    int level = 0;
    std::vector<double> a;

    static EdgeForm zero(int m) {
        return {m, std::vector<double>(static_cast<std::size_t>(
                       LevelGraph::get(m).edge_count()))};
    }
    double& operator[](int e) { return a[static_cast<std::size_t>(e)]; }
    double operator[](int e) const { return a[static_cast<std::size_t>(e)]; }
};

inline EdgeForm operator+(EdgeForm x, const EdgeForm& y) {
    if (x.level != y.level) fail("level mismatch: adding edge forms");
    for (std::size_t e = 0; e < x.a.size(); ++e) x.a[e] += y.a[e];
    return x;
}

inline EdgeForm operator-(EdgeForm x, const EdgeForm& y) {
    if (x.level != y.level) fail("level mismatch: subtracting edge forms");
    for (std::size_t e = 0; e < x.a.size(); ++e) x.a[e] -= y.a[e];
    return x;
}

inline EdgeForm operator*(double c, EdgeForm x) {
    for (double& t : x.a) t *= c;
    return x;
}

/// Field specification a = sum_w beta_w * (b composed with F_w^{-1}),
/// i.e. coefficients of the rescaled loop forms b_form(w).
struct FieldSpec {
    std::vector<std::pair<CellWord, double>> terms;

    /// Level at which every term is resolved: 1 + max |w| (0 when empty).
    int scale() const {
        int s = 0;
        for (const auto& [w, beta] : terms)
            s = std::max(s, static_cast<int>(w.size()) + 1);
        return s;
    }
};

// ---------------------------------------------------------------------------
// Energy and harmonic extension

/// E_m(f, g) = sum over undirected edges (f(x)-f(y)) conj(g(x)-g(y)).
inline cplx graph_energy(const VertexFunction& f, const VertexFunction& g) {
    if (f.level != g.level) fail("level mismatch: graph_energy");
    const LevelGraph& gr = LevelGraph::get(f.level);
    cplx sum = 0.0;
    for (const Edge& e : gr.edges)
        sum += (f[e.tail] - f[e.head]) * std::conj(g[e.tail] - g[e.head]);
    return sum;
}

/// Harmonic extension V_m -> V_{m+1}: keeps the level-m values and fills
/// each new midpoint by the 1/5-2/5 rule, so the result is m-harmonic.
inline VertexFunction harmonic_extension(const VertexFunction& f) {
    const LevelGraph& g = LevelGraph::get(f.level);
    const LevelGraph& gf = LevelGraph::get(f.level + 1);
    VertexFunction out = VertexFunction::zero(f.level + 1);
    for (int v = 0; v < gf.vertex_count(); ++v)
        if (gf.first_level[static_cast<std::size_t>(v)] <= f.level)
            out[v] = f[g.index_of(gf.verts[static_cast<std::size_t>(v)])];
    for (int c = 0; c < g.cell_count(); ++c) {
        const auto& cv = g.cells[static_cast<std::size_t>(c)];
        std::array<cplx, 3> p = {f[cv[0]], f[cv[1]], f[cv[2]]};
        for (int j = 0; j < 3; ++j) {
            // Midpoint opposite corner j.
            Vec2 mid = midpoint(g.verts[static_cast<std::size_t>(cv[static_cast<std::size_t>((j + 1) % 3)])],
                                g.verts[static_cast<std::size_t>(cv[static_cast<std::size_t>((j + 2) % 3)])]);
            out[gf.index_of(mid)] =
                (2.0 * p[static_cast<std::size_t>((j + 1) % 3)] +
                 2.0 * p[static_cast<std::size_t>((j + 2) % 3)] +
                 p[static_cast<std::size_t>(j)]) / 5.0;
        }
    }
    return out;
}

/// Edge increments of a real vertex function: a(e_xy) = f(y) - f(x).
inline EdgeForm derivative(const VertexFunction& f) {
    double scale = 1.0;
    for (const cplx& z : f.v) scale = std::max(scale, std::abs(z));
    for (const cplx& z : f.v)
        if (std::abs(z.imag()) > 1e-12 * scale)
            fail("derivative requires a real-valued function");
    const LevelGraph& g = LevelGraph::get(f.level);
    EdgeForm out = EdgeForm::zero(f.level);
    for (int e = 0; e < g.edge_count(); ++e)
        out[e] = f[g.edges[static_cast<std::size_t>(e)].head].real() -
                 f[g.edges[static_cast<std::size_t>(e)].tail].real();
    return out;
}

// ---------------------------------------------------------------------------
// The spaces H_m

/// Circulation of a around cell c (clockwise, the canonical direction):
/// the sum of the three canonical edge values.
inline double cell_circulation(const EdgeForm& a, int c) {
    return a[3 * c] + a[3 * c + 1] + a[3 * c + 2];
}

inline bool in_h_space(const EdgeForm& a, double tol = 1e-12) {
    double scale = 1.0;
    for (double t : a.a) scale = std::max(scale, std::abs(t));
    const int ncells = LevelGraph::get(a.level).cell_count();
    for (int c = 0; c < ncells; ++c)
        if (std::abs(cell_circulation(a, c)) > tol * scale) return false;
    return true;
}

inline void require_in_h(const EdgeForm& a) {
    if (!in_h_space(a)) fail("not in H_m");
}

/// <a, a'> = (5/3)^m sum over undirected edges a(e) a'(e).
inline double h_inner(const EdgeForm& x, const EdgeForm& y) {
    if (x.level != y.level) fail("level mismatch: h_inner");
    require_in_h(x);
    require_in_h(y);
    double dot = 0.0;
    for (std::size_t e = 0; e < x.a.size(); ++e) dot += x.a[e] * y.a[e];
    return std::pow(5.0 / 3.0, x.level) * dot;
}

inline double h_norm(const EdgeForm& a) { return std::sqrt(h_inner(a, a)); }

namespace detail {

/// Potential values at the three corners of a cell reproducing the cell's
/// canonical edge values, normalized to 0 at corner 0.
inline std::array<double, 3> cell_potential(const EdgeForm& a, int c) {
    return {0.0, -a[3 * c + 2], a[3 * c + 1]};
}

/// The nine level-(m+1) canonical edge values on the subcells of one cell,
/// given corner potentials, after one harmonic-extension step.  Output index
/// = 3*subcell + type.
inline std::array<double, 9> refined_cell_values(const std::array<double, 3>& p) {
    std::array<double, 3> mid;  // mid[j] = midpoint opposite corner j
    for (int j = 0; j < 3; ++j)
        mid[static_cast<std::size_t>(j)] =
            (2.0 * p[static_cast<std::size_t>((j + 1) % 3)] +
             2.0 * p[static_cast<std::size_t>((j + 2) % 3)] +
             p[static_cast<std::size_t>(j)]) / 5.0;
    auto pot = [&](int sub, int k) {  // corner-k potential of subcell sub
        return k == sub ? p[static_cast<std::size_t>(sub)]
                        : mid[static_cast<std::size_t>(3 - sub - k)];
    };
    std::array<double, 9> out;
    for (int sub = 0; sub < 3; ++sub)
        for (int t = 0; t < 3; ++t)
            out[static_cast<std::size_t>(3 * sub + t)] =
                pot(sub, (t + 1) % 3) - pot(sub, (t + 2) % 3);
    return out;
}

}  // namespace detail

/// Canonical inclusion H_m -> H_{m+1}: per cell, harmonically extend the
/// cell potential one level and take the nine sub-edge increments.
/// Preserves the H-norm exactly.
inline EdgeForm refine(const EdgeForm& a) {
    require_in_h(a);
    const LevelGraph& g = LevelGraph::get(a.level);
    EdgeForm out = EdgeForm::zero(a.level + 1);
    for (int c = 0; c < g.cell_count(); ++c) {
        auto vals = detail::refined_cell_values(detail::cell_potential(a, c));
        for (int i = 0; i < 9; ++i) out[9 * c + i] = vals[static_cast<std::size_t>(i)];
    }
    return out;
}

inline EdgeForm refine_to(EdgeForm a, int m) {
    while (a.level < m) a = refine(a);
    if (a.level != m) fail("level mismatch: refine_to");
    return a;
}

/// Orthogonal projection H_{m+1} -> refine(H_m), expressed at level m.  The
/// refined images of different cells are edge-disjoint, so the projection is
/// solved cellwise against the 2x2 Gram matrix of the refined potential
/// basis u = (0,1,0), v = (0,0,1), which is [[6/5, -3/5], [-3/5, 6/5]].
inline EdgeForm trace(const EdgeForm& a) {
    require_in_h(a);
    if (a.level < 1) fail("trace needs level >= 1");
    const int m = a.level - 1;
    const LevelGraph& g = LevelGraph::get(m);
    static const std::array<double, 9> ru = detail::refined_cell_values({0, 1, 0});
    static const std::array<double, 9> rv = detail::refined_cell_values({0, 0, 1});
    EdgeForm out = EdgeForm::zero(m);
    for (int c = 0; c < g.cell_count(); ++c) {
        double du = 0.0, dv = 0.0;
        for (int i = 0; i < 9; ++i) {
            du += a[9 * c + i] * ru[static_cast<std::size_t>(i)];
            dv += a[9 * c + i] * rv[static_cast<std::size_t>(i)];
        }
        // Inverse Gram: [[10/9, 5/9], [5/9, 10/9]].
        const double cu = (10.0 * du + 5.0 * dv) / 9.0;
        const double cv = (5.0 * du + 10.0 * dv) / 9.0;
        out[3 * c + 0] = cu - cv;
        out[3 * c + 1] = cv;
        out[3 * c + 2] = -cu;
    }
    return out;
}

// ---------------------------------------------------------------------------
// The harmonic loop form and fields

/// The unit-norm harmonic form attached to the central hole of cell h,
/// living at level |h|+1: on each subcell h.j the hole-facing edge (type j)
/// carries 2/sqrt(30) and the outer edges carry -1/sqrt(30), all in the
/// canonical direction (counterclockwise around the hole).
inline EdgeForm b_form(const CellWord& h) {
    const int m = static_cast<int>(h.size()) + 1;
    const LevelGraph& g = LevelGraph::get(m);
    EdgeForm out = EdgeForm::zero(m);
    const double s = 1.0 / std::sqrt(30.0);
    const int base = g.cell_of_word(h + '0');
    for (int j = 0; j < 3; ++j)
        for (int t = 0; t < 3; ++t)
            out[3 * (base + j) + t] = (t == j ? 2.0 : -1.0) * s;
    return out;
}

/// a_m = sum_w beta_w refine^{m-|w|-1}(b_form(w)).
inline EdgeForm assemble_field(const FieldSpec& spec, int m) {
    if (m < spec.scale()) fail("level below field scale");
    EdgeForm out = EdgeForm::zero(m);
    for (const auto& [w, beta] : spec.terms)
        out = out + beta * refine_to(b_form(w), m);
    return out;
}

/// Signed sum of a along the counterclockwise loop around hole h.
inline double flux(const EdgeForm& a, const CellWord& h) {
    const LevelGraph& g = LevelGraph::get(a.level);
    auto loop = hole_boundary_loop(h, a.level);
    double sum = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        auto [e, sign] = g.find_edge(loop[i], loop[(i + 1) % loop.size()]);
        sum += sign * a[e];
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Exact/harmonic decomposition

namespace detail {

/// Cholesky factor of the grounded (vertex 0 deleted) graph Laplacian,
/// cached per level.  Used to solve L phi = rho with phi(p_0) = 0.
inline const std::vector<double>& grounded_cholesky(int m) {
    static std::mutex mu;
    static std::map<int, std::vector<double>> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;

    const LevelGraph& g = LevelGraph::get(m);
    const int n = g.vertex_count() - 1;
    if (n > 4000) fail("hodge_split: level too large for dense factorization");
    std::vector<double> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int v = 1; v < g.vertex_count(); ++v) {
        a[static_cast<std::size_t>(v - 1) * static_cast<std::size_t>(n) +
          static_cast<std::size_t>(v - 1)] = g.degree(v);
        for (const auto& l : g.adj[static_cast<std::size_t>(v)])
            if (l.other >= 1)
                a[static_cast<std::size_t>(v - 1) * static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(l.other - 1)] -= 1.0;
    }
    // In-place lower-triangular Cholesky.
    for (int k = 0; k < n; ++k) {
        double d = a[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(k)];
        for (int j = 0; j < k; ++j) {
            double t = a[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
                         static_cast<std::size_t>(j)];
            d -= t * t;
        }
        if (d <= 0.0) fail("hodge_split: factorization breakdown");
        d = std::sqrt(d);
        a[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
          static_cast<std::size_t>(k)] = d;
        for (int i = k + 1; i < n; ++i) {
            double t = a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                         static_cast<std::size_t>(k)];
            for (int j = 0; j < k; ++j)
                t -= a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(j)] *
                     a[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(j)];
            a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
              static_cast<std::size_t>(k)] = t / d;
        }
    }
    return cache.emplace(m, std::move(a)).first->second;
}

}  // namespace detail

/// Splits a in H_m into an exact part (the derivative of a vertex function)
/// and the H-orthogonal harmonic remainder.
inline std::pair<EdgeForm, EdgeForm> hodge_split(const EdgeForm& a) {
    require_in_h(a);
    const LevelGraph& g = LevelGraph::get(a.level);
    const int n = g.vertex_count() - 1;
    const auto& chol = detail::grounded_cholesky(a.level);

    // Divergence rho(x) = incoming minus outgoing; solve L phi = rho on the
    // grounded system (phi(p_0) = 0 drops the constant-kernel direction).
    std::vector<double> rho(static_cast<std::size_t>(n), 0.0);
    for (const Edge& e : g.edges) {
        double t = a[3 * e.cell + e.type];
        if (e.head >= 1) rho[static_cast<std::size_t>(e.head - 1)] += t;
        if (e.tail >= 1) rho[static_cast<std::size_t>(e.tail - 1)] -= t;
    }
    // Forward then backward substitution.
    for (int i = 0; i < n; ++i) {
        double t = rho[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j)
            t -= chol[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(j)] * rho[static_cast<std::size_t>(j)];
        rho[static_cast<std::size_t>(i)] =
            t / chol[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(i)];
    }
    for (int i = n - 1; i >= 0; --i) {
        double t = rho[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j)
            t -= chol[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(i)] * rho[static_cast<std::size_t>(j)];
        rho[static_cast<std::size_t>(i)] =
            t / chol[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(i)];
    }

    VertexFunction phi = VertexFunction::zero(a.level);
    for (int v = 1; v < g.vertex_count(); ++v) phi[v] = rho[static_cast<std::size_t>(v - 1)];
    EdgeForm exact = derivative(phi);
    return {exact, a - exact};
}

// ---------------------------------------------------------------------------
// Potentials

/// Vertex potential A on V_m inside cell F_w with derivative(A) = a there,
/// normalized to A = 0 at F_w(p_0).  With modulus > 0 the closure condition
/// is only required modulo that value (phase potentials); modulus = 0 means
/// strict exactness.
inline std::map<int, double> local_potential(const EdgeForm& a, const CellWord& w,
                                             double modulus = 0.0, double tol = 1e-9) {
    const LevelGraph& g = LevelGraph::get(a.level);
    const int k = static_cast<int>(w.size());
    if (k > a.level) fail("level mismatch: cell below form level");
    const int span = pow3(a.level - k);
    int lo = 0;
    for (char ch : w) lo = 3 * lo + (ch - '0');
    lo *= span;
    auto edge_inside = [&](int e) { return e / 3 >= lo && e / 3 < lo + span; };

    std::map<int, double> pot;
    const int root = g.index_of(apply_word(w, kCorners[0]));
    pot[root] = 0.0;
    std::vector<int> stack = {root};
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        for (const auto& l : g.adj[static_cast<std::size_t>(cur)]) {
            if (!edge_inside(l.edge)) continue;
            double cand = pot[cur] + l.sign * a[l.edge];
            auto it = pot.find(l.other);
            if (it == pot.end()) {
                pot[l.other] = cand;
                stack.push_back(l.other);
            } else {
                double r = it->second - cand;
                if (modulus > 0.0) r -= modulus * std::round(r / modulus);
                if (std::abs(r) > tol) fail("not exact on cell");
            }
        }
    }
    return pot;
}

/// Finite-level magnetic normal derivative at a boundary corner p_j:
/// (5/3)^m sum over the two level-m neighbours x of p_j of
/// (f(p) - e^{i a(e_px)} f(x)).  The containing cell must admit a potential.
inline cplx magnetic_normal_derivative(const VertexFunction& f, const EdgeForm& a,
                                       int corner, int m) {
    if (f.level != m || a.level != m) fail("level mismatch: magnetic_normal_derivative");
    if (corner < 0 || corner > 2) fail("corner must be in V_0");
    // Existence check for the gauge potential on the cell at the corner.
    local_potential(a, CellWord(static_cast<std::size_t>(m), static_cast<char>('0' + corner)));
    const LevelGraph& g = LevelGraph::get(m);
    cplx sum = 0.0;
    for (const auto& l : g.adj[static_cast<std::size_t>(corner)]) {
        double phase = l.sign * a[l.edge];  // a on the directed edge p -> x
        sum += f[corner] - std::polar(1.0, phase) * f[l.other];
    }
    return std::pow(5.0 / 3.0, m) * sum;
}

// ---------------------------------------------------------------------------
// Random elements for tests

inline VertexFunction random_vertex_function(int m, std::mt19937_64& rng, bool real = false) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    VertexFunction f = VertexFunction::zero(m);
    for (cplx& z : f.v) z = real ? cplx(d(rng), 0.0) : cplx(d(rng), d(rng));
    return f;
}

/// Random element of H_m: independent per-cell potentials.
inline EdgeForm random_h_form(int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const LevelGraph& g = LevelGraph::get(m);
    EdgeForm out = EdgeForm::zero(m);
    for (int c = 0; c < g.cell_count(); ++c) {
        const double cu = d(rng), cv = d(rng);
        out[3 * c + 0] = cu - cv;
        out[3 * c + 1] = cv;
        out[3 * c + 2] = -cu;
    }
    return out;
}

}  // namespace sgmag
