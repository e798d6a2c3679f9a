/* Discrete differential operators.
 *
 * grad      : forward differences, replicated (Neumann) boundary, so the
 *             difference in axis k is zero on the last row/column of that
 *             axis.  Constants are exact kernel members.
 * div_vec   : negative adjoint of grad (backward differences).
 * sym_grad  : t11 = d1 w1, t22 = d2 w2, t12 = (d2 w1 + d1 w2)/2 with the same
 *             forward stencil.  In 1-D it is grad applied to the single
 *             channel.
 * div_tensor: negative adjoint of sym_grad under the t12-weighted pairing.
 *
 * The *_cascade variants are the stencils the TGV solvers iterate with: the
 * cross differences in t12 replicate the last interior difference instead of
 * the last value, which makes every r(x) = Ax + b with skew A an exact kernel
 * member on the whole grid (the plain stencil only annihilates the skew part
 * away from the replicated boundary).  Adjointness of each pair is covered by
 * tests at 1e-12.
 *
 * estimate_op_norm runs power iteration on the requested operator with a
 * fixed deterministic start vector; solvers derive their step sizes from it.
 *
 * The _into forms write into caller-owned buffers; solvers use them to keep
 * their iteration loops allocation-free.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <utility>

#include "tgv/fields.hpp"

namespace tgv {

inline void grad_into(const ScalarField& u, VectorField& g) {
    const GridShape& s = u.shape;
    const int n1 = s.n1, n2 = s.n2;
    const double ih = 1.0 / s.spacing;
    double* g1 = g.channel(0);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            g1[s.index(i, j)] = (i + 1 < n1) ? (u.v[s.index(i + 1, j)] - u.v[s.index(i, j)]) * ih : 0.0;
    if (s.dims == 2) {
        double* g2 = g.channel(1);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                g2[s.index(i, j)] = (j + 1 < n2) ? (u.v[s.index(i, j + 1)] - u.v[s.index(i, j)]) * ih : 0.0;
    }
}

inline VectorField grad(const ScalarField& u) {
    VectorField g(u.shape);
    grad_into(u, g);
    return g;
}

inline void div_vec_into(const VectorField& p, ScalarField& d) {
    const GridShape& s = p.shape;
    const int n1 = s.n1, n2 = s.n2;
    const double ih = 1.0 / s.spacing;
    const double* p1 = p.channel(0);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            double acc = 0.0;
            if (i + 1 < n1) acc += p1[s.index(i, j)];
            if (i >= 1) acc -= p1[s.index(i - 1, j)];
            d.v[s.index(i, j)] = acc * ih;
        }
    if (s.dims == 2) {
        const double* p2 = p.channel(1);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                double acc = 0.0;
                if (j + 1 < n2) acc += p2[s.index(i, j)];
                if (j >= 1) acc -= p2[s.index(i, j - 1)];
                d.v[s.index(i, j)] += acc * ih;
            }
    }
}

inline ScalarField div_vec(const VectorField& p) {
    ScalarField d(p.shape);
    div_vec_into(p, d);
    return d;
}

inline void sym_grad_into(const VectorField& w, SymTensorField& t) {
    const GridShape& s = w.shape;
    const int n1 = s.n1, n2 = s.n2;
    const double ih = 1.0 / s.spacing;
    const double* w1 = w.channel(0);
    double* t11 = t.channel(0);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            t11[s.index(i, j)] = (i + 1 < n1) ? (w1[s.index(i + 1, j)] - w1[s.index(i, j)]) * ih : 0.0;
    if (s.dims == 2) {
        const double* w2 = w.channel(1);
        double* t22 = t.channel(1);
        double* t12 = t.channel(2);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                const std::size_t k = s.index(i, j);
                t22[k] = (j + 1 < n2) ? (w2[s.index(i, j + 1)] - w2[k]) * ih : 0.0;
                const double a = (j + 1 < n2) ? (w1[s.index(i, j + 1)] - w1[k]) * ih : 0.0;
                const double b = (i + 1 < n1) ? (w2[s.index(i + 1, j)] - w2[k]) * ih : 0.0;
                t12[k] = 0.5 * (a + b);
            }
    }
}

inline SymTensorField sym_grad(const VectorField& w) {
    SymTensorField t(w.shape);
    sym_grad_into(w, t);
    return t;
}

inline void div_tensor_into(const SymTensorField& q, VectorField& d) {
    const GridShape& s = q.shape;
    const int n1 = s.n1, n2 = s.n2;
    const double ih = 1.0 / s.spacing;
    const double* q11 = q.channel(0);
    double* d1 = d.channel(0);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            double acc = 0.0;
            if (i + 1 < n1) acc += q11[s.index(i, j)];
            if (i >= 1) acc -= q11[s.index(i - 1, j)];
            d1[s.index(i, j)] = acc * ih;
        }
    if (s.dims == 2) {
        const double* q22 = q.channel(1);
        const double* q12 = q.channel(2);
        double* d2 = d.channel(1);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                const std::size_t k = s.index(i, j);
                double acc = 0.0;
                if (j + 1 < n2) acc += q22[k];
                if (j >= 1) acc -= q22[s.index(i, j - 1)];
                acc += (i + 1 < n1 ? q12[k] : 0.0) - (i >= 1 ? q12[s.index(i - 1, j)] : 0.0);
                d2[k] = acc * ih;
                double acc1 = (j + 1 < n2 ? q12[k] : 0.0) - (j >= 1 ? q12[s.index(i, j - 1)] : 0.0);
                d1[k] += acc1 * ih;
            }
    }
}

inline VectorField div_tensor(const SymTensorField& q) {
    VectorField d(q.shape);
    div_tensor_into(q, d);
    return d;
}

/* Gradient slots that are structural zeros of grad(): channel k's last
 * row/column along axis k.  The cascade solvers exclude them from the
 * alpha-term, so w is not penalised against artificial zeros there. */
inline bool gradient_slot_live(const GridShape& s, int channel, int i, int j) {
    return channel == 0 ? (i + 1 < s.n1) : (j + 1 < s.n2);
}

inline void zero_dead_gradient_slots(VectorField& x) {
    const GridShape& s = x.shape;
    double* x1 = x.channel(0);
    for (int j = 0; j < s.n2; ++j) x1[s.index(s.n1 - 1, j)] = 0.0;
    if (s.dims == 2) {
        double* x2 = x.channel(1);
        for (int i = 0; i < s.n1; ++i) x2[s.index(i, s.n2 - 1)] = 0.0;
    }
}

/* Gradient with the last interior difference replicated into the dead slots
 * (instead of zero), so affine images map to exactly constant fields.  This
 * is the g fed to the differentiation-cascade evaluation and the Ker-E
 * median of grad u. */
inline void grad_cascade_into(const ScalarField& u, VectorField& g) {
    grad_into(u, g);
    const GridShape& s = u.shape;
    double* g1 = g.channel(0);
    if (s.n1 >= 2)
        for (int j = 0; j < s.n2; ++j)
            g1[s.index(s.n1 - 1, j)] = g1[s.index(s.n1 - 2, j)];
    if (s.dims == 2 && s.n2 >= 2) {
        double* g2 = g.channel(1);
        for (int i = 0; i < s.n1; ++i)
            g2[s.index(i, s.n2 - 1)] = g2[s.index(i, s.n2 - 2)];
    }
}

inline VectorField grad_cascade(const ScalarField& u) {
    VectorField g(u.shape);
    grad_cascade_into(u, g);
    return g;
}

inline void sym_grad_cascade_into(const VectorField& w, SymTensorField& t) {
    sym_grad_into(w, t);
    const GridShape& s = w.shape;
    if (s.dims == 1) return;
    const int n1 = s.n1, n2 = s.n2;
    const double ih = 1.0 / s.spacing;
    const double* w1 = w.channel(0);
    const double* w2 = w.channel(1);
    double* t12 = t.channel(2);
    // replicate the last interior cross difference at the boundary
    for (int i = 0; i < n1; ++i) {
        const double a = (w1[s.index(i, n2 - 1)] - w1[s.index(i, n2 - 2)]) * ih;
        const double b = (i + 1 < n1) ? (w2[s.index(i + 1, n2 - 1)] - w2[s.index(i, n2 - 1)]) * ih
                                      : (w2[s.index(i, n2 - 1)] - w2[s.index(i - 1, n2 - 1)]) * ih;
        t12[s.index(i, n2 - 1)] = 0.5 * (a + b);
    }
    for (int j = 0; j < n2; ++j) {
        const double a = (j + 1 < n2) ? (w1[s.index(n1 - 1, j + 1)] - w1[s.index(n1 - 1, j)]) * ih
                                      : (w1[s.index(n1 - 1, j)] - w1[s.index(n1 - 1, j - 1)]) * ih;
        const double b = (w2[s.index(n1 - 1, j)] - w2[s.index(n1 - 2, j)]) * ih;
        t12[s.index(n1 - 1, j)] = 0.5 * (a + b);
    }
}

inline SymTensorField sym_grad_cascade(const VectorField& w) {
    SymTensorField t(w.shape);
    sym_grad_cascade_into(w, t);
    return t;
}

inline void div_tensor_cascade_into(const SymTensorField& q, VectorField& d) {
    const GridShape& s = q.shape;
    if (s.dims == 1) {
        div_tensor_into(q, d);
        return;
    }
    const int n1 = s.n1, n2 = s.n2;
    const double ih = 1.0 / s.spacing;
    const double* q11 = q.channel(0);
    const double* q22 = q.channel(1);
    const double* q12 = q.channel(2);
    double* d1 = d.channel(0);
    double* d2 = d.channel(1);
    // diagonal blocks: plain backward divergences
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const std::size_t k = s.index(i, j);
            double a = 0.0;
            if (i + 1 < n1) a += q11[k];
            if (i >= 1) a -= q11[s.index(i - 1, j)];
            d1[k] = a * ih;
            double b = 0.0;
            if (j + 1 < n2) b += q22[k];
            if (j >= 1) b -= q22[s.index(i, j - 1)];
            d2[k] = b * ih;
        }
    /* cross block: transpose of the replicated stencil.  A boundary t12
     * entry replicates the last interior cross difference, so its dual
     * weight folds onto that difference. */
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            if (j + 1 < n2) {
                // dual weight of the difference w1(i, j+1) - w1(i, j)
                double v = q12[s.index(i, j)];
                if (j + 2 == n2) v += q12[s.index(i, n2 - 1)];
                d1[s.index(i, j)] += v * ih;
                d1[s.index(i, j + 1)] -= v * ih;
            }
            if (i + 1 < n1) {
                // dual weight of the difference w2(i+1, j) - w2(i, j)
                double v = q12[s.index(i, j)];
                if (i + 2 == n1) v += q12[s.index(n1 - 1, j)];
                d2[s.index(i, j)] += v * ih;
                d2[s.index(i + 1, j)] -= v * ih;
            }
        }
}

inline VectorField div_tensor_cascade(const SymTensorField& q) {
    VectorField d(q.shape);
    div_tensor_cascade_into(q, d);
    return d;
}

/* 1-D second difference (u_{i+2} - 2 u_{i+1} + u_i)/h^2, live for i <= n-3,
 * and its plain adjoint.  Affine signals are exact kernel members. */
inline void second_diff_1d_into(const ScalarField& u, ScalarField& r) {
    const int n = u.shape.n1;
    const double ih2 = 1.0 / (u.shape.spacing * u.shape.spacing);
    for (int i = 0; i < n; ++i)
        r.v[i] = (i + 2 < n) ? (u.v[i + 2] - 2.0 * u.v[i + 1] + u.v[i]) * ih2 : 0.0;
}

inline ScalarField second_diff_1d(const ScalarField& u) {
    ScalarField r(u.shape);
    second_diff_1d_into(u, r);
    return r;
}

inline void second_diff_1d_adjoint_into(const ScalarField& r, ScalarField& z) {
    const int n = r.shape.n1;
    const double ih2 = 1.0 / (r.shape.spacing * r.shape.spacing);
    for (int i = 0; i < n; ++i) z.v[i] = 0.0;
    for (int i = 0; i + 2 < n; ++i) {
        z.v[i] += r.v[i] * ih2;
        z.v[i + 1] -= 2.0 * r.v[i] * ih2;
        z.v[i + 2] += r.v[i] * ih2;
    }
}

inline ScalarField second_diff_1d_adjoint(const ScalarField& r) {
    ScalarField z(r.shape);
    second_diff_1d_adjoint_into(r, z);
    return z;
}

struct OpNormEstimate {
    double value = 0.0;     // estimated ||K|| (square root of the Rayleigh quotient)
    int iterations = 0;
    double residual = 0.0;  // relative Rayleigh residual ||K*K x - rho x|| / rho at exit
    bool converged = false;
};

enum class OperatorKind { Grad, SymGradCascade, TgvCascade, SecondDiff1d };

namespace detail {

// fixed pseudo-random start vector, same for every call
inline void fill_start(std::vector<double>& v) {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (double& x : v) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        x = static_cast<double>(state >> 11) * (1.0 / 9007199254740992.0) - 0.5;
    }
}

}  // namespace detail

inline OpNormEstimate estimate_op_norm(const GridShape& shape, OperatorKind kind = OperatorKind::TgvCascade,
                                       int max_iter = 200, double tol = 1e-13) {
    validate(shape);
    const std::size_t nu = shape.pixel_count();
    const std::size_t nw = nu * shape.dims;
    const bool with_w = kind == OperatorKind::TgvCascade || kind == OperatorKind::SymGradCascade;
    const bool with_u = kind != OperatorKind::SymGradCascade;

    ScalarField u(shape);
    VectorField w(shape);
    std::vector<double> seed(nu + nw);
    detail::fill_start(seed);
    if (with_u)
        for (std::size_t k = 0; k < nu; ++k) u.v[k] = seed[k];
    if (with_w)
        for (std::size_t k = 0; k < nw; ++k) w.v[k] = seed[nu + k];

    auto normalize = [&](double inv) {
        if (with_u)
            for (double& x : u.v) x *= inv;
        if (with_w)
            for (double& x : w.v) x *= inv;
    };
    {
        double s = 0.0;
        if (with_u)
            for (double x : u.v) s += x * x;
        if (with_w)
            for (double x : w.v) s += x * x;
        normalize(1.0 / std::sqrt(s));
    }

    ScalarField ubuf(shape), mid(shape);
    VectorField wbuf(shape), a(shape);
    SymTensorField t(shape);

    OpNormEstimate est;
    for (int it = 1; it <= max_iter; ++it) {
        // one application of K*K to the current normalized iterate
        switch (kind) {
            case OperatorKind::Grad:
                grad_into(u, a);
                div_vec_into(a, ubuf);
                for (double& x : ubuf.v) x = -x;
                break;
            case OperatorKind::SecondDiff1d:
                second_diff_1d_into(u, mid);
                second_diff_1d_adjoint_into(mid, ubuf);
                break;
            case OperatorKind::SymGradCascade:
                sym_grad_cascade_into(w, t);
                div_tensor_cascade_into(t, wbuf);
                for (double& x : wbuf.v) x = -x;
                break;
            case OperatorKind::TgvCascade: {
                grad_into(u, a);
                for (std::size_t k = 0; k < a.v.size(); ++k) a.v[k] -= w.v[k];
                zero_dead_gradient_slots(a);
                sym_grad_cascade_into(w, t);
                // K*(a, t) = (-div a, -a - div_cascade t)
                div_vec_into(a, ubuf);
                for (double& x : ubuf.v) x = -x;
                div_tensor_cascade_into(t, wbuf);
                for (std::size_t k = 0; k < wbuf.v.size(); ++k) wbuf.v[k] = -a.v[k] - wbuf.v[k];
                break;
            }
        }
        // Rayleigh quotient rho = <x, Ax> with x normalized, residual ||Ax - rho x||
        double rho = 0.0, ynorm2 = 0.0;
        if (with_u)
            for (std::size_t k = 0; k < u.v.size(); ++k) {
                rho += u.v[k] * ubuf.v[k];
                ynorm2 += ubuf.v[k] * ubuf.v[k];
            }
        if (with_w)
            for (std::size_t k = 0; k < w.v.size(); ++k) {
                rho += w.v[k] * wbuf.v[k];
                ynorm2 += wbuf.v[k] * wbuf.v[k];
            }
        est.iterations = it;
        if (ynorm2 == 0.0) {
            est.value = 0.0;
            est.residual = 0.0;
            est.converged = true;
            return est;
        }
        const double rr = std::sqrt(std::max(ynorm2 - rho * rho, 0.0));  // ||Ax - rho x||, x unit
        est.value = std::sqrt(std::max(rho, 0.0));
        est.residual = rho > 0.0 ? rr / rho : 0.0;
        if (with_u) u.v.swap(ubuf.v);
        if (with_w) w.v.swap(wbuf.v);
        normalize(1.0 / std::sqrt(ynorm2));
        if (est.residual <= tol) {
            est.converged = true;
            return est;
        }
    }
    est.converged = est.residual <= tol;
    return est;
}

/* ||K|| for step-size selection: a longer power run, padded by the exit
 * residual, and cached per (shape, kind) since solvers ask repeatedly. */
inline double op_norm_for_steps(const GridShape& shape, OperatorKind kind) {
    struct Key {
        int dims, n1, n2, kind;
        double spacing;
        bool operator==(const Key&) const = default;
    };
    static std::mutex mutex;
    static std::vector<std::pair<Key, double>> cache;
    const Key key{shape.dims, shape.n1, shape.n2, static_cast<int>(kind), shape.spacing};
    {
        std::lock_guard<std::mutex> lock(mutex);
        for (const auto& kv : cache)
            if (kv.first == key) return kv.second;
    }
    OpNormEstimate e = estimate_op_norm(shape, kind, 3000, 1e-12);
    double v = e.value * (1.0 + e.residual);
    if (!(v > 0.0)) v = 1.0;
    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace_back(key, v);
    return v;
}

}  // namespace tgv
