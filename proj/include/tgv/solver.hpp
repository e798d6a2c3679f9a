/* First-order primal-dual solvers for the TV / TGV^2 model family.
 *
 * All problems are saddle-point forms  min_x max_y <Kx, y> + G(x) - F*(y)
 * where F* is the indicator of pointwise norm balls, solved by the
 * plain primal-dual iteration with extrapolation parameter 1:
 *
 *     y <- proj_ball(y + sigma K xbar)
 *     x <- prox_{tau G}(x - tau K* y)
 *     xbar <- 2 x - x_old
 *
 * Problems (all norms spacing^d-weighted, fidelity exponent p in {1, 2}):
 *
 *  solve_tv      (1/p)||f - u||_p^p + alpha ||D u||_M
 *  solve_tgv2    (1/p)||f - u||_p^p + alpha ||D u - w||_M + beta ||E w||_M
 *  solve_tv2_1d  (1/2)||f - u||^2 + beta ||D^2 u||_M          (1-D, p = 2)
 *  solve_l1_sym  ||g - w||_L1 + lambda ||E w||_M              (both terms nonsmooth)
 *  eval_tgv      alpha * min_w ||D u - w||_L1 + (beta/alpha) ||E w||_M
 *
 * Discretisation: D is the forward-difference gradient with replicated
 * boundary; the alpha-term runs over its live slots only and E is the
 * cascade symmetrised gradient (see diffops.hpp), so affine images have
 * exactly zero TGV^2 and r(x) = Ax + b is reachable at zero cost in w.
 *
 * Step sizes default to tau*sigma*||K||^2 = 0.99 (||K|| from power
 * iteration) with sigma/tau = beta/alpha clamped to [1, 2e4], which keeps
 * the dual ramp short when the second ball is much larger than the first.
 * Convergence is declared on the selected metric: mean relative change of
 * the full primal-dual iterate over a 10-iteration window (default), or
 * the duality gap for p = 2 problems.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tgv/affine.hpp"
#include "tgv/diffops.hpp"
#include "tgv/fields.hpp"

namespace tgv {

enum class ConvergenceMetric { IterateChange, DualityGap };

struct SolverConfig {
    double tau = 0.0;    // <= 0: derive from the operator norm
    double sigma = 0.0;  // <= 0: derive from the operator norm
    int max_iter = 20000;
    double tol = 1e-8;
    ConvergenceMetric metric = ConvergenceMetric::IterateChange;
    int p = 2;           // fidelity exponent
    int check_every = 10;
};

struct Checkpoint {
    int iteration = 0;
    double energy = 0.0;
    double metric = 0.0;
};

struct SolveResult {
    ScalarField u;      // empty for solve_l1_sym
    VectorField w;      // empty for solve_tv / solve_tv2_1d
    VectorField p;      // dual of the alpha-term (empty where absent)
    SymTensorField q;   // dual of the beta/lambda-term; tv2_1d stores its dual here
    double objective = 0.0;
    double fidelity = 0.0;
    double alpha_mass = 0.0;  // ||Du - w|| (TGV), ||Du|| (TV), live slots
    double beta_mass = 0.0;   // ||E w|| (TGV, l1_sym), ||D^2 u|| (tv2_1d)
    std::vector<Checkpoint> history;
    int iterations = 0;
    bool converged = false;
};

inline void validate_config(const SolverConfig& cfg) {
    if (cfg.p != 1 && cfg.p != 2) throw std::invalid_argument("SolverConfig: p must be 1 or 2");
    if (cfg.tol < 0.0) throw std::invalid_argument("SolverConfig: tol must be >= 0");
    if (cfg.max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (cfg.check_every < 1) throw std::invalid_argument("SolverConfig: check_every must be >= 1");
    if (cfg.metric == ConvergenceMetric::DualityGap && cfg.p != 2)
        throw std::invalid_argument("SolverConfig: duality-gap metric needs p = 2");
}

inline void validate_data(const ScalarField& f) {
    validate(f.shape);
    if (f.v.size() != f.shape.pixel_count()) throw std::invalid_argument("field size mismatch");
    if (!all_finite(f.v)) throw std::invalid_argument("non-finite data");
}

// ---- energies ----

inline double fidelity_energy(const ScalarField& f, const ScalarField& u, int p) {
    double s = 0.0;
    if (p == 2) {
        for (std::size_t k = 0; k < f.v.size(); ++k) {
            const double d = f.v[k] - u.v[k];
            s += 0.5 * d * d;
        }
    } else {
        for (std::size_t k = 0; k < f.v.size(); ++k) s += std::abs(f.v[k] - u.v[k]);
    }
    return f.shape.cell_measure() * s;
}

// ||g - w||_L1 with the pointwise l2 norm
inline double l1_fidelity(const VectorField& g, const VectorField& w) {
    const std::size_t n = g.shape.pixel_count();
    double s = 0.0;
    if (g.channels() == 1) {
        const double *a = g.channel(0), *b = w.channel(0);
        for (std::size_t k = 0; k < n; ++k) s += std::abs(a[k] - b[k]);
    } else {
        const double *a1 = g.channel(0), *a2 = g.channel(1);
        const double *b1 = w.channel(0), *b2 = w.channel(1);
        for (std::size_t k = 0; k < n; ++k) {
            const double d1 = a1[k] - b1[k], d2 = a2[k] - b2[k];
            s += std::sqrt(d1 * d1 + d2 * d2);
        }
    }
    return g.shape.cell_measure() * s;
}

// ||Du - w|| over the live gradient slots (w may be empty for plain ||Du||)
inline double graddiff_mass(const ScalarField& u, const VectorField* w) {
    VectorField d = grad(u);
    if (w) {
        for (std::size_t k = 0; k < d.v.size(); ++k) d.v[k] -= w->v[k];
        zero_dead_gradient_slots(d);
    }
    return radon_norm_vec(d);
}

inline double tv_energy(const ScalarField& f, const ScalarField& u, double alpha, int p) {
    return fidelity_energy(f, u, p) + alpha * graddiff_mass(u, nullptr);
}

inline double tgv2_energy(const ScalarField& f, const ScalarField& u, const VectorField& w,
                          double alpha, double beta, int p) {
    return fidelity_energy(f, u, p) + alpha * graddiff_mass(u, &w) +
           beta * radon_norm_tensor(sym_grad_cascade(w));
}

inline double tv2_1d_energy(const ScalarField& f, const ScalarField& u, double beta) {
    ScalarField r = second_diff_1d(u);
    double mass = 0.0;
    for (double x : r.v) mass += std::abs(x);
    return fidelity_energy(f, u, 2) + beta * f.shape.cell_measure() * mass;
}

inline double l1_sym_energy(const VectorField& g, const VectorField& w, double lambda) {
    return l1_fidelity(g, w) + lambda * radon_norm_tensor(sym_grad_cascade(w));
}

// ---- pointwise projections and proxes ----

namespace detail {

inline void project_ball_vec(VectorField& p, double radius) {
    const std::size_t n = p.shape.pixel_count();
    if (p.channels() == 1) {
        double* a = p.channel(0);
        for (std::size_t k = 0; k < n; ++k) {
            if (a[k] > radius) a[k] = radius;
            else if (a[k] < -radius) a[k] = -radius;
        }
    } else {
        double* a = p.channel(0);
        double* b = p.channel(1);
        for (std::size_t k = 0; k < n; ++k) {
            const double m = std::sqrt(a[k] * a[k] + b[k] * b[k]);
            if (m > radius) {
                const double f = radius / m;
                a[k] *= f;
                b[k] *= f;
            }
        }
    }
}

inline void project_ball_tensor(SymTensorField& q, double radius) {
    const std::size_t n = q.shape.pixel_count();
    if (q.channels() == 1) {
        double* a = q.channel(0);
        for (std::size_t k = 0; k < n; ++k) {
            if (a[k] > radius) a[k] = radius;
            else if (a[k] < -radius) a[k] = -radius;
        }
    } else {
        double* a = q.channel(0);
        double* b = q.channel(1);
        double* c = q.channel(2);
        for (std::size_t k = 0; k < n; ++k) {
            const double m = std::sqrt(a[k] * a[k] + b[k] * b[k] + 2.0 * c[k] * c[k]);
            if (m > radius) {
                const double f = radius / m;
                a[k] *= f;
                b[k] *= f;
                c[k] *= f;
            }
        }
    }
}

inline double shrink(double t, double kappa) {
    if (t > kappa) return t - kappa;
    if (t < -kappa) return t + kappa;
    return 0.0;
}

// prox of tau * (1/p)||f - .||_p^p at x
inline double fidelity_prox(double x, double f, double tau, int p) {
    if (p == 2) return (x + tau * f) / (1.0 + tau);
    return f + shrink(x - f, tau);
}

inline double l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double l2(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

/* Default steps keep tau*sigma*||K||^2 = 0.99 with sigma/tau = dual_ratio.
 * A ratio above one shortens the ramp the dual variables need to fill a
 * large norm ball (beta >> alpha), which otherwise dominates the iteration
 * count. */
inline void derive_steps(SolverConfig& cfg, const GridShape& shape, OperatorKind kind,
                         double dual_ratio = 1.0) {
    const double L = op_norm_for_steps(shape, kind);
    if (cfg.tau > 0.0 && cfg.sigma > 0.0) {
        if (cfg.tau * cfg.sigma * L * L >= 1.0)
            throw std::invalid_argument("SolverConfig: tau*sigma*||K||^2 must be < 1");
        return;
    }
    const double r = std::min(std::max(dual_ratio, 1.0), 2e4);
    cfg.tau = std::sqrt(0.99 / r) / L;
    cfg.sigma = std::sqrt(0.99 * r) / L;
}

}  // namespace detail

// ---- duality gaps (p = 2 fidelity) ----

struct DualityGap {
    double value = 0.0;
    bool projected = false;  // dual was outside its ball and had to be scaled
};

namespace detail {

inline double max_pixel_norm_vec(const VectorField& p) {
    const std::size_t n = p.shape.pixel_count();
    double m = 0.0;
    if (p.channels() == 1) {
        const double* a = p.channel(0);
        for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(a[k]));
    } else {
        const double *a = p.channel(0), *b = p.channel(1);
        for (std::size_t k = 0; k < n; ++k)
            m = std::max(m, std::sqrt(a[k] * a[k] + b[k] * b[k]));
    }
    return m;
}

inline double max_pixel_norm_tensor(const SymTensorField& q) {
    const std::size_t n = q.shape.pixel_count();
    double m = 0.0;
    if (q.channels() == 1) {
        const double* a = q.channel(0);
        for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(a[k]));
    } else {
        const double *a = q.channel(0), *b = q.channel(1), *c = q.channel(2);
        for (std::size_t k = 0; k < n; ++k)
            m = std::max(m, std::sqrt(a[k] * a[k] + b[k] * b[k] + 2.0 * c[k] * c[k]));
    }
    return m;
}

// min_u (1/2)||f - u||^2 + <u, z>  =  <f, z> - (1/2)||z||^2
inline double dual_value_from_kstar(const ScalarField& f, const ScalarField& z) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.v.size(); ++k) s += f.v[k] * z.v[k] - 0.5 * z.v[k] * z.v[k];
    return f.shape.cell_measure() * s;
}

}  // namespace detail

inline DualityGap duality_gap_tv(const ScalarField& f, double alpha, const ScalarField& u,
                                 const VectorField& p) {
    DualityGap g;
    const double m = detail::max_pixel_norm_vec(p);
    const double s = m > alpha ? alpha / m : 1.0;
    g.projected = s < 1.0;
    VectorField ps = p;
    if (g.projected)
        for (double& x : ps.v) x *= s;
    ScalarField z = div_vec(ps);
    for (double& x : z.v) x = -x;  // K* p = -div p
    g.value = tv_energy(f, u, alpha, 2) - detail::dual_value_from_kstar(f, z);
    if (g.value < 0.0 && g.value > -1e-13) g.value = 0.0;  // roundoff guard
    return g;
}

/* TGV^2 gap: the w-optimality forces p = -div_E q, so the dual candidate is
 * built from q alone; the pairing of w with the constraint residual (only
 * the dead gradient slots can carry one) is added back, which keeps the
 * bound exact: the result is >= 0 for any state and 0 exactly at a saddle
 * point. */
inline DualityGap duality_gap_tgv2(const ScalarField& f, double alpha, double beta,
                                   const ScalarField& u, const VectorField& w,
                                   const SymTensorField& q) {
    DualityGap g;
    VectorField dq = div_tensor_cascade(q);
    VectorField phat = dq;
    for (double& x : phat.v) x = -x;
    zero_dead_gradient_slots(phat);
    // residual p + div_E q is supported on the dead slots only
    VectorField resid = dq;
    for (std::size_t k = 0; k < resid.v.size(); ++k) resid.v[k] += phat.v[k];

    const double mp = detail::max_pixel_norm_vec(phat);
    const double mq = detail::max_pixel_norm_tensor(q);
    double s = 1.0;
    if (mp > alpha) s = std::min(s, alpha / mp);
    if (mq > beta) s = std::min(s, beta / mq);
    g.projected = s < 1.0;

    for (double& x : phat.v) x *= s;
    ScalarField z = div_vec(phat);
    for (double& x : z.v) x = -x;
    const double primal = tgv2_energy(f, u, w, alpha, beta, 2);
    g.value = primal - detail::dual_value_from_kstar(f, z) + s * inner(w, resid);
    if (g.value < 0.0 && g.value > -1e-13) g.value = 0.0;
    return g;
}

inline DualityGap duality_gap_tv2_1d(const ScalarField& f, double beta, const ScalarField& u,
                                     const ScalarField& r) {
    DualityGap g;
    double m = 0.0;
    for (double x : r.v) m = std::max(m, std::abs(x));
    const double s = m > beta ? beta / m : 1.0;
    g.projected = s < 1.0;
    ScalarField rs = r;
    if (g.projected)
        for (double& x : rs.v) x *= s;
    ScalarField z = second_diff_1d_adjoint(rs);
    g.value = tv2_1d_energy(f, u, beta) - detail::dual_value_from_kstar(f, z);
    if (g.value < 0.0 && g.value > -1e-13) g.value = 0.0;
    return g;
}

// ---- solvers ----

inline SolveResult solve_tv(const ScalarField& f, double alpha, SolverConfig cfg = {}) {
    validate_data(f);
    validate_config(cfg);
    if (!(alpha > 0.0)) throw std::invalid_argument("solve_tv: alpha must be positive");
    const GridShape& s = f.shape;
    detail::derive_steps(cfg, s, OperatorKind::Grad);
    const double tau = cfg.tau, sigma = cfg.sigma;

    ScalarField u = f, uold(s), ubar = f, ucheck = f, dbuf(s);
    VectorField p(s), gbuf(s), pcheck(s);

    SolveResult res;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        grad_into(ubar, gbuf);
        for (std::size_t k = 0; k < p.v.size(); ++k) p.v[k] += sigma * gbuf.v[k];
        detail::project_ball_vec(p, alpha);

        div_vec_into(p, dbuf);
        u.v.swap(uold.v);
        for (std::size_t k = 0; k < u.v.size(); ++k)
            u.v[k] = detail::fidelity_prox(uold.v[k] + tau * dbuf.v[k], f.v[k], tau, cfg.p);
        for (std::size_t k = 0; k < u.v.size(); ++k) ubar.v[k] = 2.0 * u.v[k] - uold.v[k];

        res.iterations = it;
        if (it % cfg.check_every == 0 || it == cfg.max_iter) {
            const double energy = tv_energy(f, u, alpha, cfg.p);
            double metric;
            if (cfg.metric == ConvergenceMetric::DualityGap) {
                metric = duality_gap_tv(f, alpha, u, p).value / (1.0 + std::abs(energy));
            } else {
                metric = (detail::l2_diff(u.v, ucheck.v) + detail::l2_diff(p.v, pcheck.v)) /
                         (cfg.check_every * (detail::l2(u.v) + detail::l2(p.v) + 1e-12));
            }
            res.history.push_back({it, energy, metric});
            ucheck = u;
            pcheck = p;
            if (metric <= cfg.tol) {
                res.converged = true;
                break;
            }
        }
    }
    res.fidelity = fidelity_energy(f, u, cfg.p);
    res.alpha_mass = graddiff_mass(u, nullptr);
    res.objective = res.fidelity + alpha * res.alpha_mass;
    res.u = std::move(u);
    res.p = std::move(p);
    return res;
}

inline SolveResult solve_tgv2(const ScalarField& f, double alpha, double beta, SolverConfig cfg = {}) {
    validate_data(f);
    validate_config(cfg);
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("solve_tgv2: alpha and beta must be positive");
    const GridShape& s = f.shape;
    detail::derive_steps(cfg, s, OperatorKind::TgvCascade, beta / alpha);
    const double tau = cfg.tau, sigma = cfg.sigma;

    ScalarField u = f, uold(s), ubar = f, ucheck = f, dbuf(s);
    VectorField w(s), wold(s), wbar(s), wcheck(s), p(s), pcheck(s), abuf(s), dqbuf(s);
    SymTensorField q(s), qcheck(s), tbuf(s);

    SolveResult res;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        // dual ascent: p on the live gradient slots, q on the cascade E
        grad_into(ubar, abuf);
        for (std::size_t k = 0; k < abuf.v.size(); ++k) abuf.v[k] -= wbar.v[k];
        zero_dead_gradient_slots(abuf);
        for (std::size_t k = 0; k < p.v.size(); ++k) p.v[k] += sigma * abuf.v[k];
        detail::project_ball_vec(p, alpha);

        sym_grad_cascade_into(wbar, tbuf);
        for (std::size_t k = 0; k < q.v.size(); ++k) q.v[k] += sigma * tbuf.v[k];
        detail::project_ball_tensor(q, beta);

        // primal descent
        div_vec_into(p, dbuf);
        u.v.swap(uold.v);
        for (std::size_t k = 0; k < u.v.size(); ++k)
            u.v[k] = detail::fidelity_prox(uold.v[k] + tau * dbuf.v[k], f.v[k], tau, cfg.p);

        div_tensor_cascade_into(q, dqbuf);
        w.v.swap(wold.v);
        for (std::size_t k = 0; k < w.v.size(); ++k)
            w.v[k] = wold.v[k] + tau * (p.v[k] + dqbuf.v[k]);

        for (std::size_t k = 0; k < u.v.size(); ++k) ubar.v[k] = 2.0 * u.v[k] - uold.v[k];
        for (std::size_t k = 0; k < w.v.size(); ++k) wbar.v[k] = 2.0 * w.v[k] - wold.v[k];

        res.iterations = it;
        if (it % cfg.check_every == 0 || it == cfg.max_iter) {
            const double energy = tgv2_energy(f, u, w, alpha, beta, cfg.p);
            double metric;
            if (cfg.metric == ConvergenceMetric::DualityGap) {
                metric = duality_gap_tgv2(f, alpha, beta, u, w, q).value / (1.0 + std::abs(energy));
            } else {
                metric = (detail::l2_diff(u.v, ucheck.v) + detail::l2_diff(w.v, wcheck.v) +
                          detail::l2_diff(p.v, pcheck.v) + detail::l2_diff(q.v, qcheck.v)) /
                         (cfg.check_every * (detail::l2(u.v) + detail::l2(w.v) +
                                             detail::l2(p.v) + detail::l2(q.v) + 1e-12));
            }
            res.history.push_back({it, energy, metric});
            ucheck = u;
            wcheck = w;
            pcheck = p;
            qcheck = q;
            if (metric <= cfg.tol) {
                res.converged = true;
                break;
            }
        }
    }
    res.fidelity = fidelity_energy(f, u, cfg.p);
    res.alpha_mass = graddiff_mass(u, &w);
    res.beta_mass = radon_norm_tensor(sym_grad_cascade(w));
    res.objective = res.fidelity + alpha * res.alpha_mass + beta * res.beta_mass;
    res.u = std::move(u);
    res.w = std::move(w);
    res.p = std::move(p);
    res.q = std::move(q);
    return res;
}

inline SolveResult solve_tv2_1d(const ScalarField& f, double beta, SolverConfig cfg = {}) {
    validate_data(f);
    if (f.shape.dims != 1) throw std::invalid_argument("solve_tv2_1d: 1-D input required");
    if (cfg.p != 2) throw std::invalid_argument("solve_tv2_1d: fidelity is L^2 (p = 2)");
    validate_config(cfg);
    if (!(beta > 0.0)) throw std::invalid_argument("solve_tv2_1d: beta must be positive");
    const GridShape& s = f.shape;
    detail::derive_steps(cfg, s, OperatorKind::SecondDiff1d);
    const double tau = cfg.tau, sigma = cfg.sigma;

    ScalarField u = f, uold(s), ubar = f, ucheck = f, r(s), rcheck(s), kbuf(s), zbuf(s);

    SolveResult res;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        second_diff_1d_into(ubar, kbuf);
        for (std::size_t k = 0; k < r.v.size(); ++k) {
            double x = r.v[k] + sigma * kbuf.v[k];
            if (x > beta) x = beta;
            else if (x < -beta) x = -beta;
            r.v[k] = x;
        }
        second_diff_1d_adjoint_into(r, zbuf);
        u.v.swap(uold.v);
        for (std::size_t k = 0; k < u.v.size(); ++k)
            u.v[k] = detail::fidelity_prox(uold.v[k] - tau * zbuf.v[k], f.v[k], tau, 2);
        for (std::size_t k = 0; k < u.v.size(); ++k) ubar.v[k] = 2.0 * u.v[k] - uold.v[k];

        res.iterations = it;
        if (it % cfg.check_every == 0 || it == cfg.max_iter) {
            const double energy = tv2_1d_energy(f, u, beta);
            double metric;
            if (cfg.metric == ConvergenceMetric::DualityGap) {
                metric = duality_gap_tv2_1d(f, beta, u, r).value / (1.0 + std::abs(energy));
            } else {
                metric = (detail::l2_diff(u.v, ucheck.v) + detail::l2_diff(r.v, rcheck.v)) /
                         (cfg.check_every * (detail::l2(u.v) + detail::l2(r.v) + 1e-12));
            }
            res.history.push_back({it, energy, metric});
            ucheck = u;
            rcheck = r;
            if (metric <= cfg.tol) {
                res.converged = true;
                break;
            }
        }
    }
    res.fidelity = fidelity_energy(f, u, 2);
    {
        ScalarField d2 = second_diff_1d(u);
        double mass = 0.0;
        for (double x : d2.v) mass += std::abs(x);
        res.beta_mass = s.cell_measure() * mass;
    }
    res.objective = res.fidelity + beta * res.beta_mass;
    res.u = std::move(u);
    // the dual of the second-difference term rides in q's single channel
    res.q = SymTensorField(s);
    for (std::size_t k = 0; k < r.v.size(); ++k) res.q.v[k] = r.v[k];
    return res;
}

inline SolveResult solve_l1_sym(const VectorField& g, double lambda, SolverConfig cfg = {}) {
    validate(g.shape);
    if (!all_finite(g.v)) throw std::invalid_argument("solve_l1_sym: non-finite data");
    if (!(lambda > 0.0)) throw std::invalid_argument("solve_l1_sym: lambda must be positive");
    if (cfg.metric == ConvergenceMetric::DualityGap)
        throw std::invalid_argument("solve_l1_sym: duality-gap metric unavailable (L1 fidelity)");
    validate_config(cfg);
    const GridShape& s = g.shape;
    detail::derive_steps(cfg, s, OperatorKind::SymGradCascade, lambda);
    const double tau = cfg.tau, sigma = cfg.sigma;
    const std::size_t n = s.pixel_count();

    VectorField w = g, wold(s), wbar = g, wcheck = g, dqbuf(s);
    SymTensorField q(s), qcheck(s), tbuf(s);

    SolveResult res;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        sym_grad_cascade_into(wbar, tbuf);
        for (std::size_t k = 0; k < q.v.size(); ++k) q.v[k] += sigma * tbuf.v[k];
        detail::project_ball_tensor(q, lambda);

        div_tensor_cascade_into(q, dqbuf);
        w.v.swap(wold.v);
        // prox of tau ||g - .||_L1: pointwise shrink of the pixel vector toward g
        if (s.dims == 1) {
            for (std::size_t k = 0; k < n; ++k) {
                const double x = wold.v[k] + tau * dqbuf.v[k];
                w.v[k] = g.v[k] + detail::shrink(x - g.v[k], tau);
            }
        } else {
            double* w1 = w.channel(0);
            double* w2 = w.channel(1);
            const double* g1 = g.channel(0);
            const double* g2 = g.channel(1);
            const double* o1 = wold.channel(0);
            const double* o2 = wold.channel(1);
            const double* d1 = dqbuf.channel(0);
            const double* d2 = dqbuf.channel(1);
            for (std::size_t k = 0; k < n; ++k) {
                const double v1 = o1[k] + tau * d1[k] - g1[k];
                const double v2 = o2[k] + tau * d2[k] - g2[k];
                const double m = std::sqrt(v1 * v1 + v2 * v2);
                const double fscale = m > tau ? 1.0 - tau / m : 0.0;
                w1[k] = g1[k] + fscale * v1;
                w2[k] = g2[k] + fscale * v2;
            }
        }
        for (std::size_t k = 0; k < w.v.size(); ++k) wbar.v[k] = 2.0 * w.v[k] - wold.v[k];

        res.iterations = it;
        if (it % cfg.check_every == 0 || it == cfg.max_iter) {
            const double energy = l1_sym_energy(g, w, lambda);
            const double metric = (detail::l2_diff(w.v, wcheck.v) + detail::l2_diff(q.v, qcheck.v)) /
                                  (cfg.check_every * (detail::l2(w.v) + detail::l2(q.v) + 1e-12));
            res.history.push_back({it, energy, metric});
            wcheck = w;
            qcheck = q;
            if (metric <= cfg.tol) {
                res.converged = true;
                break;
            }
        }
    }
    res.fidelity = l1_fidelity(g, w);
    res.beta_mass = radon_norm_tensor(sym_grad_cascade(w));
    res.objective = res.fidelity + lambda * res.beta_mass;
    res.w = std::move(w);
    res.q = std::move(q);
    return res;
}

struct EvalTgvResult {
    double value = 0.0;  // TGV^2_{beta,alpha}(u)
    VectorField w;       // minimising vector field
    SolveResult inner;   // the underlying L1-||E.|| solve on g = Du
};

// differentiation-cascade evaluation: inner minimisation over w with u fixed,
// on the replicated-boundary gradient of u
inline EvalTgvResult eval_tgv(const ScalarField& u, double alpha, double beta, SolverConfig cfg = {}) {
    validate_data(u);
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("eval_tgv: alpha and beta must be positive");
    EvalTgvResult out;
    out.inner = solve_l1_sym(grad_cascade(u), beta / alpha, cfg);
    out.value = alpha * out.inner.objective;
    out.w = out.inner.w;
    return out;
}

}  // namespace tgv
