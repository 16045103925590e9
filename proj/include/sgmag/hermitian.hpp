#pragma once

// Dense Hermitian eigensolver: unitary Householder reduction to a real
// symmetric tridiagonal matrix followed by the implicit-shift QL iteration.
// Eigenvalues-only by default; orthonormal eigenvectors on request (roughly
// doubles the work).  Complex input covers the real symmetric case too.

#include <cmath>
#include <complex>
#include <vector>

#include "sgmag/topology.hpp"

namespace sgmag {

using cplx = std::complex<double>;

/// Dense Hermitian matrix, row-major.
struct HermitianMatrix {
    int n = 0;
    std::vector<cplx> data;

    explicit HermitianMatrix(int size = 0)
        : n(size), data(static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {}
    cplx& at(int i, int j) {
        return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                    static_cast<std::size_t>(j)];
    }
    const cplx& at(int i, int j) const {
        return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                    static_cast<std::size_t>(j)];
    }
    double max_abs() const {
        double m = 0.0;
        for (const cplx& z : data) m = std::max(m, std::abs(z));
        return m;
    }
};

struct EigenResult {
    std::vector<double> values;  ///< ascending
    int n = 0;
    std::vector<cplx> vectors;   ///< column-major, column k = eigenvector k; empty unless requested
    cplx vec(int i, int k) const {
        return vectors[static_cast<std::size_t>(i) +
                       static_cast<std::size_t>(n) * static_cast<std::size_t>(k)];
    }
};

namespace detail {

inline double hypot2(double a, double b) { return std::hypot(a, b); }

/// Implicit-shift QL on the real symmetric tridiagonal (d, e); e[0] unused.
/// If z is non-null (size n*n, row-major), the rotations are accumulated so
/// that column k of z becomes the k-th tridiagonal eigenvector.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e,
                           std::vector<double>* z) {
    const int n = static_cast<int>(d.size());
    auto zat = [&](int i, int j) -> double& {
        return (*z)[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                    static_cast<std::size_t>(j)];
    };
    for (int i = 1; i < n; ++i) e[static_cast<std::size_t>(i - 1)] = e[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(n - 1)] = 0.0;

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[static_cast<std::size_t>(m)]) +
                            std::abs(d[static_cast<std::size_t>(m + 1)]);
                if (std::abs(e[static_cast<std::size_t>(m)]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 60) fail("eigensolver failed to converge");
                double g = (d[static_cast<std::size_t>(l + 1)] - d[static_cast<std::size_t>(l)]) /
                           (2.0 * e[static_cast<std::size_t>(l)]);
                double r = hypot2(g, 1.0);
                g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
                    e[static_cast<std::size_t>(l)] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[static_cast<std::size_t>(i)];
                    double b = c * e[static_cast<std::size_t>(i)];
                    r = hypot2(f, g);
                    e[static_cast<std::size_t>(i + 1)] = r;
                    if (r == 0.0) {
                        d[static_cast<std::size_t>(i + 1)] -= p;
                        e[static_cast<std::size_t>(m)] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[static_cast<std::size_t>(i + 1)] - p;
                    r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[static_cast<std::size_t>(i + 1)] = g + p;
                    g = c * r - b;
                    if (z)
                        for (int k = 0; k < n; ++k) {
                            double fk = zat(k, i + 1);
                            zat(k, i + 1) = s * zat(k, i) + c * fk;
                            zat(k, i) = c * zat(k, i) - s * fk;
                        }
                }
                if (r == 0.0 && i >= l) continue;
                d[static_cast<std::size_t>(l)] -= p;
                e[static_cast<std::size_t>(l)] = g;
                e[static_cast<std::size_t>(m)] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian matrix.  Throws if the input is
/// not Hermitian within 1e-12 of its largest entry.
inline EigenResult hermitian_eigendecomposition(const HermitianMatrix& M,
                                                bool with_vectors = false) {
    const int n = M.n;
    const double scale = std::max(1.0, M.max_abs());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            if (std::abs(M.at(i, j) - std::conj(M.at(j, i))) > 1e-12 * scale)
                fail("matrix not Hermitian");

    EigenResult out;
    out.n = n;
    if (n == 0) return out;

    std::vector<cplx> a = M.data;  // working copy, row-major
    auto at = [&](int i, int j) -> cplx& {
        return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j)];
    };

    std::vector<cplx> q;  // accumulated Householder product
    if (with_vectors) {
        q.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), cplx(0));
        for (int i = 0; i < n; ++i)
            q[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
              static_cast<std::size_t>(i)] = 1.0;
    }
    auto qat = [&](int i, int j) -> cplx& {
        return q[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j)];
    };

    // Householder reduction: rows i = n-1 .. 1, eliminating entries left of
    // the subdiagonal.  sub[i] holds the resulting complex subdiagonal.
    std::vector<cplx> sub(static_cast<std::size_t>(n), cplx(0));
    std::vector<cplx> v(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 1; --i) {
        double alpha2 = 0.0;
        for (int k = 0; k < i; ++k) alpha2 += std::norm(at(k, i));
        const double alpha = std::sqrt(alpha2);
        const cplx y_last = at(i - 1, i);
        if (alpha == 0.0) {
            sub[static_cast<std::size_t>(i)] = 0.0;
            continue;
        }
        const cplx sigma =
            (std::abs(y_last) > 0.0) ? alpha * (y_last / std::abs(y_last)) : cplx(alpha);
        // Householder vector from the column above the diagonal:
        // v = y + sigma e_{i-1}, H = I - beta v v* maps column i to
        // -sigma e_{i-1} (and row i to its conjugate).
        double vnorm2 = 0.0;
        for (int k = 0; k < i; ++k) {
            v[static_cast<std::size_t>(k)] = at(k, i);
            if (k == i - 1) v[static_cast<std::size_t>(k)] += sigma;
            vnorm2 += std::norm(v[static_cast<std::size_t>(k)]);
        }
        if (vnorm2 == 0.0) {
            sub[static_cast<std::size_t>(i)] = -std::conj(sigma);
            continue;
        }
        const double beta = 2.0 / vnorm2;

        // Rank-2 update of the leading i-by-i block: p = beta A v,
        // q = p - K v with K = (beta/2) v* p, then A -= v q* + q v*.
        for (int r = 0; r < i; ++r) {
            cplx acc = 0.0;
            for (int k = 0; k < i; ++k) acc += at(r, k) * v[static_cast<std::size_t>(k)];
            p[static_cast<std::size_t>(r)] = beta * acc;
        }
        cplx vp = 0.0;
        for (int k = 0; k < i; ++k)
            vp += std::conj(v[static_cast<std::size_t>(k)]) * p[static_cast<std::size_t>(k)];
        const double K = 0.5 * beta * vp.real();
        for (int k = 0; k < i; ++k)
            p[static_cast<std::size_t>(k)] -= K * v[static_cast<std::size_t>(k)];
        for (int r = 0; r < i; ++r)
            for (int k = 0; k <= r; ++k) {
                at(r, k) -= v[static_cast<std::size_t>(r)] * std::conj(p[static_cast<std::size_t>(k)]) +
                            p[static_cast<std::size_t>(r)] * std::conj(v[static_cast<std::size_t>(k)]);
                at(k, r) = std::conj(at(r, k));
            }

        sub[static_cast<std::size_t>(i)] = -std::conj(sigma);
        at(i, i - 1) = -std::conj(sigma);
        at(i - 1, i) = -sigma;

        if (with_vectors) {
            // Q <- Q H: w = Q v, Q -= beta w v*.
            for (int r = 0; r < n; ++r) {
                cplx w = 0.0;
                for (int k = 0; k < i; ++k) w += qat(r, k) * v[static_cast<std::size_t>(k)];
                w *= beta;
                for (int k = 0; k < i; ++k)
                    qat(r, k) -= w * std::conj(v[static_cast<std::size_t>(k)]);
            }
        }
    }

    // Phase diagonal making the tridiagonal real with non-negative
    // subdiagonal: D_0 = 1, D_k = D_{k-1} * sub_k/|sub_k|.
    std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n), 0.0);
    std::vector<cplx> phase(static_cast<std::size_t>(n), cplx(1.0));
    for (int k = 0; k < n; ++k) d[static_cast<std::size_t>(k)] = at(k, k).real();
    for (int k = 1; k < n; ++k) {
        const double m = std::abs(sub[static_cast<std::size_t>(k)]);
        e[static_cast<std::size_t>(k)] = m;
        phase[static_cast<std::size_t>(k)] =
            (m > 0.0) ? phase[static_cast<std::size_t>(k - 1)] *
                            (sub[static_cast<std::size_t>(k)] / m)
                      : phase[static_cast<std::size_t>(k - 1)];
    }

    std::vector<double> z;
    if (with_vectors) {
        z.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            z[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
              static_cast<std::size_t>(i)] = 1.0;
    }
    detail::tridiagonal_ql(d, e, with_vectors ? &z : nullptr);

    // Sort ascending, permuting vector columns alongside.
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
        return d[static_cast<std::size_t>(lhs)] < d[static_cast<std::size_t>(rhs)];
    });
    out.values.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.values[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

    if (with_vectors) {
        // Eigenvector k of M = Q * D * (tridiagonal eigenvector k).
        out.vectors.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), cplx(0));
        for (int col = 0; col < n; ++col) {
            const int src = order[static_cast<std::size_t>(col)];
            for (int r = 0; r < n; ++r) {
                cplx acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += qat(r, k) * phase[static_cast<std::size_t>(k)] *
                           z[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) +
                             static_cast<std::size_t>(src)];
                out.vectors[static_cast<std::size_t>(r) +
                            static_cast<std::size_t>(n) * static_cast<std::size_t>(col)] = acc;
            }
        }
    }
    return out;
}

}  // namespace sgmag
