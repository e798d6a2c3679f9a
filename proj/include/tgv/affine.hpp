/* The kernel of the symmetrised gradient and two fitting problems on it.
 *
 * Ker E consists of the rigid displacements r(x) = Ax + b with skew
 * symmetric A; in 2-D that is three scalars (a, b1, b2) with
 * r(x) = (-a x2 + b1, a x1 + b2), in 1-D just the constant b1.
 *
 * median_ker_e(g) solves  min_{r in Ker E} sum_px h^d |g(px) - r(px)|_2,
 * the L1-closest rigid displacement to g.  The objective is convex in the
 * three parameters; we run smoothed iteratively reweighted least squares
 * (Weiszfeld-type, weight smoothing eps = 1e-9) from the componentwise
 * median, then a deterministic coordinate-descent polish with exact convex
 * line searches.  Minimisers need not be unique; callers should compare
 * objective values, not parameters.
 *
 * linear_regression(f) solves  min_{phi affine} sum_px h^d (f - phi)^2
 * through the normal equations in centred coordinates.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tgv/fields.hpp"

namespace tgv {

struct KerEElement {
    double skew = 0.0;  // a; meaningless in 1-D
    double b1 = 0.0;
    double b2 = 0.0;    // meaningless in 1-D
};

struct AffineFit {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;    // absent in 1-D
};

struct MedianResult {
    KerEElement element;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline VectorField eval_ker_e(const KerEElement& e, const GridShape& shape) {
    validate(shape);
    VectorField r(shape);
    double* r1 = r.channel(0);
    if (shape.dims == 1) {
        for (int i = 0; i < shape.n1; ++i) r1[i] = e.b1;
        return r;
    }
    double* r2 = r.channel(1);
    for (int i = 0; i < shape.n1; ++i)
        for (int j = 0; j < shape.n2; ++j) {
            const std::size_t k = shape.index(i, j);
            r1[k] = -e.skew * shape.x2(j) + e.b1;
            r2[k] = e.skew * shape.x1(i) + e.b2;
        }
    return r;
}

// sum_px h^d |g(px) - r_e(px)|_2
inline double median_objective(const VectorField& g, const KerEElement& e) {
    const GridShape& s = g.shape;
    double acc = 0.0;
    if (s.dims == 1) {
        const double* g1 = g.channel(0);
        for (int i = 0; i < s.n1; ++i) acc += std::abs(g1[i] - e.b1);
    } else {
        const double* g1 = g.channel(0);
        const double* g2 = g.channel(1);
        for (int i = 0; i < s.n1; ++i)
            for (int j = 0; j < s.n2; ++j) {
                const std::size_t k = s.index(i, j);
                const double r1 = g1[k] - (-e.skew * s.x2(j) + e.b1);
                const double r2 = g2[k] - (e.skew * s.x1(i) + e.b2);
                acc += std::sqrt(r1 * r1 + r2 * r2);
            }
    }
    return s.cell_measure() * acc;
}

namespace detail {

inline double component_median(const double* data, std::size_t n) {
    std::vector<double> tmp(data, data + n);
    std::sort(tmp.begin(), tmp.end());
    if (n % 2 == 1) return tmp[n / 2];
    return 0.5 * (tmp[n / 2 - 1] + tmp[n / 2]);
}

// solve a symmetric 3x3 system by Gaussian elimination with partial pivoting
inline std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> m, std::array<double, 3> r) {
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int k = c + 1; k < 3; ++k)
            if (std::abs(m[k][c]) > std::abs(m[piv][c])) piv = k;
        std::swap(m[c], m[piv]);
        std::swap(r[c], r[piv]);
        if (m[c][c] == 0.0) throw std::runtime_error("solve3: singular system");
        for (int k = c + 1; k < 3; ++k) {
            const double f = m[k][c] / m[c][c];
            for (int l = c; l < 3; ++l) m[k][l] -= f * m[c][l];
            r[k] -= f * r[c];
        }
    }
    std::array<double, 3> x{};
    for (int c = 2; c >= 0; --c) {
        double acc = r[c];
        for (int l = c + 1; l < 3; ++l) acc -= m[c][l] * x[l];
        x[c] = acc / m[c][c];
    }
    return x;
}

// exact line minimisation of a convex 1-D slice: bracket growth + ternary search
template <typename F>
inline double minimize_convex_line(F f, double t0, double span) {
    double lo = t0 - span, hi = t0 + span;
    double flo = f(lo), fhi = f(hi), fmid = f(t0);
    int guard = 0;
    while ((flo < fmid || fhi < fmid) && guard++ < 80) {
        span *= 2.0;
        lo = t0 - span;
        hi = t0 + span;
        flo = f(lo);
        fhi = f(hi);
        fmid = std::min(fmid, std::min(flo, fhi));
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) <= f(m2))
            hi = m2;
        else
            lo = m1;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline MedianResult median_ker_e(const VectorField& g, double tol = 1e-10, int max_iter = 200) {
    const GridShape& s = g.shape;
    validate(s);
    MedianResult res;

    if (s.dims == 1) {
        res.element.b1 = detail::component_median(g.channel(0), s.pixel_count());
        res.objective = median_objective(g, res.element);
        res.converged = true;
        return res;
    }

    const std::size_t n = s.pixel_count();
    const double* g1 = g.channel(0);
    const double* g2 = g.channel(1);
    KerEElement e;
    e.b1 = detail::component_median(g1, n);
    e.b2 = detail::component_median(g2, n);

    constexpr double weight_eps = 1e-9;
    double obj = median_objective(g, e);
    int it = 0;
    for (; it < max_iter; ++it) {
        std::array<std::array<double, 3>, 3> m{};
        std::array<double, 3> rhs{};
        for (int i = 0; i < s.n1; ++i)
            for (int j = 0; j < s.n2; ++j) {
                const std::size_t k = s.index(i, j);
                const double x1 = s.x1(i), x2 = s.x2(j);
                const double r1 = g1[k] - (-e.skew * x2 + e.b1);
                const double r2 = g2[k] - (e.skew * x1 + e.b2);
                const double w = 1.0 / std::sqrt(r1 * r1 + r2 * r2 + weight_eps * weight_eps);
                // residual rows: (g1 - (-a x2 + b1)) and (g2 - (a x1 + b2))
                // design columns per row: d(r)/d(a, b1, b2) = (-(-x2), ...) folded below
                const double ma[2][3] = {{-x2, 1.0, 0.0}, {x1, 0.0, 1.0}};
                const double gv[2] = {g1[k], g2[k]};
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 3; ++c) {
                        rhs[c] += w * ma[r][c] * gv[r];
                        for (int c2 = c; c2 < 3; ++c2) m[c][c2] += w * ma[r][c] * ma[r][c2];
                    }
            }
        m[1][0] = m[0][1];
        m[2][0] = m[0][2];
        m[2][1] = m[1][2];
        const std::array<double, 3> theta = detail::solve3(m, rhs);
        const double step = std::abs(theta[0] - e.skew) + std::abs(theta[1] - e.b1) + std::abs(theta[2] - e.b2);
        e.skew = theta[0];
        e.b1 = theta[1];
        e.b2 = theta[2];
        const double new_obj = median_objective(g, e);
        const double scale = 1.0 + std::abs(e.skew) + std::abs(e.b1) + std::abs(e.b2);
        if (step <= tol * scale || std::abs(obj - new_obj) <= tol * (1.0 + new_obj)) {
            obj = new_obj;
            res.converged = true;
            ++it;
            break;
        }
        obj = new_obj;
    }

    // coordinate-descent polish on the exact nonsmooth objective
    for (int sweep = 0; sweep < 3; ++sweep) {
        e.skew = detail::minimize_convex_line(
            [&](double t) { return median_objective(g, {t, e.b1, e.b2}); }, e.skew, 0.5 + std::abs(e.skew));
        e.b1 = detail::minimize_convex_line(
            [&](double t) { return median_objective(g, {e.skew, t, e.b2}); }, e.b1, 0.5 + std::abs(e.b1));
        e.b2 = detail::minimize_convex_line(
            [&](double t) { return median_objective(g, {e.skew, e.b1, t}); }, e.b2, 0.5 + std::abs(e.b2));
    }
    const double polished = median_objective(g, e);
    if (polished <= obj) {
        res.element = e;
        res.objective = polished;
    } else {
        res.objective = obj;  // keep the IRLS iterate if polish did not help
    }
    res.iterations = it;
    if (it >= max_iter && !res.converged) res.converged = false;
    return res;
}

inline AffineFit linear_regression(const ScalarField& f) {
    const GridShape& s = f.shape;
    validate(s);
    if (!all_finite(f.v)) throw std::invalid_argument("linear_regression: non-finite input");

    if (s.dims == 1) {
        double s00 = 0.0, s01 = 0.0, s11 = 0.0, r0 = 0.0, r1 = 0.0;
        for (int i = 0; i < s.n1; ++i) {
            const double x = s.x1(i);
            s00 += 1.0;
            s01 += x;
            s11 += x * x;
            r0 += f.v[i];
            r1 += f.v[i] * x;
        }
        const double det = s00 * s11 - s01 * s01;
        if (det == 0.0) throw std::runtime_error("linear_regression: singular normal matrix");
        AffineFit fit;
        fit.c0 = (s11 * r0 - s01 * r1) / det;
        fit.c1 = (s00 * r1 - s01 * r0) / det;
        return fit;
    }

    std::array<std::array<double, 3>, 3> m{};
    std::array<double, 3> rhs{};
    for (int i = 0; i < s.n1; ++i)
        for (int j = 0; j < s.n2; ++j) {
            const double x1 = s.x1(i), x2 = s.x2(j);
            const double b[3] = {1.0, x1, x2};
            const double fv = f.v[s.index(i, j)];
            for (int c = 0; c < 3; ++c) {
                rhs[c] += b[c] * fv;
                for (int c2 = c; c2 < 3; ++c2) m[c][c2] += b[c] * b[c2];
            }
        }
    m[1][0] = m[0][1];
    m[2][0] = m[0][2];
    m[2][1] = m[1][2];
    const std::array<double, 3> c = detail::solve3(m, rhs);
    return AffineFit{c[0], c[1], c[2]};
}

inline ScalarField regression_field(const AffineFit& fit, const GridShape& shape) {
    ScalarField out(shape);
    for (int i = 0; i < shape.n1; ++i)
        for (int j = 0; j < shape.n2; ++j)
            out.v[shape.index(i, j)] =
                fit.c0 + fit.c1 * shape.x1(i) + (shape.dims == 2 ? fit.c2 * shape.x2(j) : 0.0);
    return out;
}

}  // namespace tgv
