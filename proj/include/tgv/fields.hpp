/* Grid fields and the discrete Radon norms.
 *
 * Three value types live on a GridShape:
 *   ScalarField    - one value per pixel (images u, f; 1-D duals v)
 *   VectorField    - dims values per pixel (w, g, gradients, their dual p)
 *   SymTensorField - symmetric 2x2 matrices stored (t11, t22, t12) per pixel
 *                    in 2-D, a single value in 1-D (values of E w, dual q)
 *
 * The Radon norm of a field is the spacing^d weighted sum of pointwise
 * l2 / Frobenius norms; for symmetric matrices the off-diagonal entry counts
 * twice, sqrt(t11^2 + t22^2 + 2 t12^2), and the inner product carries the
 * matching weight 2 on t12 so that <q, E w> is the full matrix pairing.
 *
 * Storage is channel-major: channel c of pixel k sits at values[c*N + k],
 * pixels row-major.  Reductions run in fixed index order, so equal inputs
 * give bitwise-equal results run to run.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tgv/grid.hpp"

namespace tgv {

struct ScalarField {
    GridShape shape;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridShape& s) : shape(s), v(s.pixel_count(), 0.0) { validate(s); }

    double& at(int i, int j) { return v[shape.index(i, j)]; }
    double at(int i, int j) const { return v[shape.index(i, j)]; }
    std::size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }
};

struct VectorField {
    GridShape shape;
    std::vector<double> v;  // channels()*N, channel-major

    VectorField() = default;
    explicit VectorField(const GridShape& s) : shape(s), v(s.pixel_count() * s.dims, 0.0) { validate(s); }

    int channels() const { return shape.dims; }
    double& at(int c, std::size_t k) { return v[static_cast<std::size_t>(c) * shape.pixel_count() + k]; }
    double at(int c, std::size_t k) const { return v[static_cast<std::size_t>(c) * shape.pixel_count() + k]; }
    double* channel(int c) { return v.data() + static_cast<std::size_t>(c) * shape.pixel_count(); }
    const double* channel(int c) const { return v.data() + static_cast<std::size_t>(c) * shape.pixel_count(); }
    bool empty() const { return v.empty(); }
};

// 2-D channel order: 0 = t11, 1 = t22, 2 = t12.  1-D has the single channel t11.
struct SymTensorField {
    GridShape shape;
    std::vector<double> v;

    SymTensorField() = default;
    explicit SymTensorField(const GridShape& s)
        : shape(s), v(s.pixel_count() * (s.dims == 1 ? 1 : 3), 0.0) { validate(s); }

    int channels() const { return shape.dims == 1 ? 1 : 3; }
    double& at(int c, std::size_t k) { return v[static_cast<std::size_t>(c) * shape.pixel_count() + k]; }
    double at(int c, std::size_t k) const { return v[static_cast<std::size_t>(c) * shape.pixel_count() + k]; }
    double* channel(int c) { return v.data() + static_cast<std::size_t>(c) * shape.pixel_count(); }
    const double* channel(int c) const { return v.data() + static_cast<std::size_t>(c) * shape.pixel_count(); }
    bool empty() const { return v.empty(); }
};

// ||p||_M = h^d sum_k |p(k)|_2
inline double radon_norm_vec(const VectorField& p) {
    const std::size_t n = p.shape.pixel_count();
    double s = 0.0;
    if (p.channels() == 1) {
        const double* a = p.channel(0);
        for (std::size_t k = 0; k < n; ++k) s += std::abs(a[k]);
    } else {
        const double* a = p.channel(0);
        const double* b = p.channel(1);
        for (std::size_t k = 0; k < n; ++k) s += std::sqrt(a[k] * a[k] + b[k] * b[k]);
    }
    return p.shape.cell_measure() * s;
}

// ||q||_M with the pointwise Frobenius norm sqrt(t11^2 + t22^2 + 2 t12^2)
inline double radon_norm_tensor(const SymTensorField& q) {
    const std::size_t n = q.shape.pixel_count();
    double s = 0.0;
    if (q.channels() == 1) {
        const double* a = q.channel(0);
        for (std::size_t k = 0; k < n; ++k) s += std::abs(a[k]);
    } else {
        const double* a = q.channel(0);
        const double* b = q.channel(1);
        const double* c = q.channel(2);
        for (std::size_t k = 0; k < n; ++k)
            s += std::sqrt(a[k] * a[k] + b[k] * b[k] + 2.0 * c[k] * c[k]);
    }
    return q.shape.cell_measure() * s;
}

inline double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(f.shape.cell_measure() * s);
}

inline double inner(const ScalarField& a, const ScalarField& b) {
    if (a.shape != b.shape) throw std::invalid_argument("inner: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return a.shape.cell_measure() * s;
}

inline double inner(const VectorField& a, const VectorField& b) {
    if (a.shape != b.shape) throw std::invalid_argument("inner: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return a.shape.cell_measure() * s;
}

// t12 weighted by 2: <A, B> = sum_ij a_ij b_ij for symmetric matrices
inline double inner(const SymTensorField& a, const SymTensorField& b) {
    if (a.shape != b.shape) throw std::invalid_argument("inner: shape mismatch");
    const std::size_t n = a.shape.pixel_count();
    double s = 0.0;
    if (a.channels() == 1) {
        for (std::size_t k = 0; k < n; ++k) s += a.v[k] * b.v[k];
    } else {
        const double *a11 = a.channel(0), *a22 = a.channel(1), *a12 = a.channel(2);
        const double *b11 = b.channel(0), *b22 = b.channel(1), *b12 = b.channel(2);
        for (std::size_t k = 0; k < n; ++k)
            s += a11[k] * b11[k] + a22[k] * b22[k] + 2.0 * a12[k] * b12[k];
    }
    return a.shape.cell_measure() * s;
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace tgv
