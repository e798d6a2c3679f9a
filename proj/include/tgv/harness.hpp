/* Test images, noise, parameter sweeps and the asymptotic experiments.
 *
 * Generators are bit-deterministic functions of their arguments; the noise
 * generator draws from a hand-rolled Box-Muller transform over mt19937_64 so
 * a (seed, shape) pair always reproduces the same field.
 *
 * Experiments return an ExperimentReport (ordered sweep rows of named
 * metrics plus run metadata) serialisable to CSV at full precision:
 *
 *  experiment_to_data            data recovery as beta -> 0 / alpha -> 0
 *  experiment_tv_equivalence     TGV^2 vs alpha-TV for (a)symmetric data
 *  experiment_regression         collapse onto the affine regression
 *  experiment_affine_correction  TV-like solutions modulo a Ker-E correction
 *
 * Sweep points are independent; run_indexed() optionally fans them out over
 * threads, each point writing its own slot, so the assembled report does not
 * depend on the thread count.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tgv/affine.hpp"
#include "tgv/io.hpp"
#include "tgv/oned.hpp"
#include "tgv/solver.hpp"

namespace tgv {

// ---- deterministic randomness ----

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x106689d45497fdb5ull) {}

    // uniform in [0, 1)
    double uniform() {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 7;
        state_ ^= state_ << 17;
        return static_cast<double>(state_ >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---- generators ----

/* Characteristic function of a disk; radius and centre offsets are fractions
 * of n.  A zero offset gives exact flip and quarter-turn symmetry on the
 * centred grid. */
inline ScalarField gen_disk(int n, double radius_frac = 0.35,
                            double offset1_frac = 0.0, double offset2_frac = 0.0) {
    if (!(radius_frac > 0.0 && radius_frac < 0.5))
        throw std::invalid_argument("gen_disk: radius_frac must be in (0, 0.5)");
    const GridShape shape = grid_2d(n, n);
    const double r = radius_frac * n;
    const double c1 = offset1_frac * n, c2 = offset2_frac * n;
    if (std::abs(c1) + r > 0.5 * n || std::abs(c2) + r > 0.5 * n)
        throw std::invalid_argument("gen_disk: disk leaves the domain");
    ScalarField f(shape);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double d1 = shape.x1(i) - c1, d2 = shape.x2(j) - c2;
            f.at(i, j) = (d1 * d1 + d2 * d2 <= r * r) ? 1.0 : 0.0;
        }
    return f;
}

/* Concentric axis-aligned centred squares with intensities 0 / 1 / 0.5,
 * flip- and rotation-symmetric by construction. */
inline ScalarField gen_squares(int n) {
    const GridShape shape = grid_2d(n, n);
    ScalarField f(shape);
    const double outer = 0.35 * n, inner = 0.175 * n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double m = std::max(std::abs(shape.x1(i)), std::abs(shape.x2(j)));
            f.at(i, j) = m <= inner ? 0.5 : (m <= outer ? 1.0 : 0.0);
        }
    return f;
}

namespace detail {
// inside-test of the ramp-ellipse bump, shared with tests
inline double ellipse_q(const GridShape& s, int i, int j) {
    const int n = s.n1;
    const double c1 = 0.12 * n, c2 = -0.08 * n;
    const double r1 = 0.30 * n, r2 = 0.22 * n;
    const double d1 = (s.x1(i) - c1) / r1, d2 = (s.x2(j) - c2) / r2;
    return d1 * d1 + d2 * d2;
}
}  // namespace detail

/* Affine ramp (clamped to [0, 1]; the coefficients keep the clamp inactive)
 * with a raised smooth elliptic bump, asymmetric on purpose. */
inline ScalarField gen_ramp_ellipse(int n) {
    const GridShape shape = grid_2d(n, n);
    ScalarField f(shape);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = 0.45 + 0.5 * shape.x2(j) / n;
            v = std::min(std::max(v, 0.0), 1.0);
            const double q = detail::ellipse_q(shape, i, j);
            if (q < 1.0) v += 0.3 * (1.0 - q) * (1.0 - q);
            f.at(i, j) = v;
        }
    return f;
}

inline bool ramp_ellipse_inside_bump(const GridShape& s, int i, int j) {
    return detail::ellipse_q(s, i, j) < 1.0;
}

// 1-D unit step at the midpoint
inline ScalarField gen_step_1d(int n) {
    ScalarField f(grid_1d(n));
    for (int i = n / 2; i < n; ++i) f.v[i] = 1.0;
    return f;
}

inline ScalarField add_noise(const ScalarField& f, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
    ScalarField out = f;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    for (double& x : out.v) x += sigma * rng.normal();
    return out;
}

// exact index-lattice symmetries, for symmetry assertions
inline ScalarField flip_axis1(const ScalarField& f) {
    ScalarField out(f.shape);
    for (int i = 0; i < f.shape.n1; ++i)
        for (int j = 0; j < f.shape.n2; ++j) out.at(i, j) = f.at(f.shape.n1 - 1 - i, j);
    return out;
}

inline ScalarField flip_axis2(const ScalarField& f) {
    ScalarField out(f.shape);
    for (int i = 0; i < f.shape.n1; ++i)
        for (int j = 0; j < f.shape.n2; ++j) out.at(i, j) = f.at(i, f.shape.n2 - 1 - j);
    return out;
}

inline ScalarField rot90(const ScalarField& f) {
    if (f.shape.n1 != f.shape.n2) throw std::invalid_argument("rot90: square grid required");
    ScalarField out(f.shape);
    const int n = f.shape.n1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = f.at(j, n - 1 - i);
    return out;
}

/* Average over the full flip/quarter-turn symmetry group (square grids).
 * The eight orbit values are summed in sorted order, so every pixel of an
 * orbit receives the bitwise-identical result and the output is exactly
 * group-symmetric. */
inline ScalarField symmetrize(const ScalarField& f) {
    if (f.shape.n1 != f.shape.n2) throw std::invalid_argument("symmetrize: square grid required");
    const int n = f.shape.n1;
    ScalarField out(f.shape);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double orbit[8] = {f.at(i, j),         f.at(j, i),
                               f.at(n - 1 - i, j), f.at(i, n - 1 - j),
                               f.at(n - 1 - i, n - 1 - j), f.at(j, n - 1 - i),
                               f.at(n - 1 - j, i), f.at(n - 1 - j, n - 1 - i)};
            std::sort(orbit, orbit + 8);
            double s = 0.0;
            for (double v : orbit) s += v;
            out.at(i, j) = 0.125 * s;
        }
    return out;
}

/* Symmetry-diagnostic gradient: centered differences inside, one-sided at
 * the two boundary lines, so index flips map the stencil onto itself exactly
 * (the solver's forward stencil attaches values half a pixel off-centre,
 * which shifts rim fields diagonally by h/2). */
inline VectorField grad_centered(const ScalarField& u) {
    const GridShape& s = u.shape;
    VectorField g(s);
    const double ih = 1.0 / s.spacing;
    for (int i = 0; i < s.n1; ++i)
        for (int j = 0; j < s.n2; ++j) {
            const std::size_t k = s.index(i, j);
            if (i == 0)
                g.at(0, k) = (u.at(1, j) - u.at(0, j)) * ih;
            else if (i + 1 == s.n1)
                g.at(0, k) = (u.at(i, j) - u.at(i - 1, j)) * ih;
            else
                g.at(0, k) = (u.at(i + 1, j) - u.at(i - 1, j)) * 0.5 * ih;
            if (s.dims == 2) {
                if (j == 0)
                    g.at(1, k) = (u.at(i, 1) - u.at(i, 0)) * ih;
                else if (j + 1 == s.n2)
                    g.at(1, k) = (u.at(i, j) - u.at(i, j - 1)) * ih;
                else
                    g.at(1, k) = (u.at(i, j + 1) - u.at(i, j - 1)) * 0.5 * ih;
            }
        }
    return g;
}

// ---- reports ----

struct ExperimentReport {
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    double cell(std::size_t row, const std::string& column) const {
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (columns[c] == column) return rows.at(row).at(c);
        throw std::invalid_argument("ExperimentReport: no column " + column);
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << "# experiment=" << experiment << '\n';
        for (const auto& kv : metadata) out << "# " << kv.first << '=' << kv.second << '\n';
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << columns[c];
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << format_full(row[c]);
            out << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + path);
    }
};

// per-checkpoint solver log: iteration, primal energy, metric value
inline void write_history_csv(const std::string& path, const SolveResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "iteration,energy,metric\n";
    for (const Checkpoint& c : r.history)
        out << c.iteration << ',' << format_full(c.energy) << ',' << format_full(c.metric) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

// FNV-1a over the canonical config text, recorded in report metadata
inline std::string config_hash(const SolverConfig& cfg, const std::string& extra = "") {
    std::string text = "tau=" + format_full(cfg.tau) + ";sigma=" + format_full(cfg.sigma) +
                       ";max_iter=" + std::to_string(cfg.max_iter) + ";tol=" + format_full(cfg.tol) +
                       ";metric=" + (cfg.metric == ConvergenceMetric::DualityGap ? "gap" : "change") +
                       ";p=" + std::to_string(cfg.p) + ";" + extra;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// run fn(0..count-1), optionally across threads; slot-indexed, so the
// assembled output is independent of the thread count
inline void run_indexed(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) fn(k);
    };
    std::vector<std::thread> pool;
    const int nt = std::min<std::size_t>(jobs, count);
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

// pass/fail thresholds shared by the CLI verdict lines and the acceptance suite
namespace thresholds {
inline constexpr double to_data_final_rel = 1e-2;   // ||f-u||/||f|| at the smallest parameter
inline constexpr double to_data_term_rel = 1e-2;    // vanishing term vs ||Df|| scale
inline constexpr double tv_equiv_same = 1e-3;       // symmetric data, large beta/alpha
inline constexpr double tv_equiv_diff = 1e-2;       // broken symmetry or small ratio
inline constexpr double regression_rel = 1e-3;      // distance to the affine regression
inline constexpr double median_zero_slack = 1e-6;   // median objective at 0 vs optimum
inline constexpr double prop2_max_graddiff = 1e-6;  // max|Du - w| below beta*
inline constexpr double prop2_tv2_dist = 1e-4;      // TGV vs second-order TV solutions
inline constexpr double prop3_ew_mass = 1e-6;       // ||E w|| above the lambda threshold
inline constexpr double prop3_obj_rel = 1e-6;       // energy vs ||g - m_E(g)||_L1
inline constexpr double cor4_rel = 1e-4;            // eval_tgv vs alpha||Du - m_E(grad u)||
}  // namespace thresholds

// ---- experiments ----

enum class SweepVar { Beta, Alpha };

/* Fix one parameter, send the other to zero, log data recovery and both
 * regulariser term masses. */
inline ExperimentReport experiment_to_data(const ScalarField& f, SweepVar sweep, double fixed_value,
                                           const std::vector<double>& values, SolverConfig cfg = {},
                                           int jobs = 1) {
    ExperimentReport rep;
    rep.experiment = sweep == SweepVar::Beta ? "to-data-beta" : "to-data-alpha";
    rep.columns = {sweep == SweepVar::Beta ? "beta" : "alpha", "l2_err", "rel_l2_err",
                   "du_minus_w_mass", "ew_mass", "converged"};
    rep.rows.resize(values.size());
    const double fnorm = l2_norm(f);
    run_indexed(values.size(), jobs, [&](std::size_t k) {
        const double alpha = sweep == SweepVar::Beta ? fixed_value : values[k];
        const double beta = sweep == SweepVar::Beta ? values[k] : fixed_value;
        SolveResult r = solve_tgv2(f, alpha, beta, cfg);
        ScalarField diff = f;
        for (std::size_t m = 0; m < diff.v.size(); ++m) diff.v[m] -= r.u.v[m];
        const double err = l2_norm(diff);
        rep.rows[k] = {values[k],      err,         fnorm > 0.0 ? err / fnorm : err,
                       r.alpha_mass,  r.beta_mass, r.converged ? 1.0 : 0.0};
    });
    rep.metadata.emplace_back("n1", std::to_string(f.shape.n1));
    rep.metadata.emplace_back("n2", std::to_string(f.shape.n2));
    rep.metadata.emplace_back("fixed", format_full(fixed_value));
    rep.metadata.emplace_back("config", config_hash(cfg, rep.experiment));
    return rep;
}

/* Distance between the TGV^2 and alpha-TV solutions,
 * with the TGV side's ||E w|| and the gain a Ker-E median correction of
 * grad u would bring (objective at 0 minus optimal objective). */
inline ExperimentReport experiment_tv_equivalence(const ScalarField& f, double alpha, double beta,
                                                  SolverConfig cfg = {}) {
    ExperimentReport rep;
    rep.experiment = "tv-equivalence";
    rep.columns = {"alpha", "beta", "rel_l2_distance", "ew_mass", "median_gain", "converged"};
    SolveResult tgv = solve_tgv2(f, alpha, beta, cfg);
    SolveResult tv = solve_tv(f, alpha, cfg);
    VectorField g = grad_cascade(tgv.u);
    MedianResult med = median_ker_e(g);
    const double gain = median_objective(g, KerEElement{}) - med.objective;
    rep.rows.push_back({alpha, beta, rel_l2_distance(tgv.u, tv.u), tgv.beta_mass, gain,
                        (tgv.converged && tv.converged) ? 1.0 : 0.0});
    rep.metadata.emplace_back("n1", std::to_string(f.shape.n1));
    rep.metadata.emplace_back("n2", std::to_string(f.shape.n2));
    rep.metadata.emplace_back("config", config_hash(cfg, rep.experiment));
    return rep;
}

/* Distance of the TGV^2 solution to the affine regression of the data
 * along an (alpha, beta) ladder: above some rung the solution collapses
 * onto the regression. */
inline ExperimentReport experiment_regression(const ScalarField& f,
                                              const std::vector<std::pair<double, double>>& ladder,
                                              SolverConfig cfg = {}, int jobs = 1) {
    ExperimentReport rep;
    rep.experiment = "regression";
    rep.columns = {"alpha", "beta", "rel_dist_to_regression", "converged"};
    rep.rows.resize(ladder.size());
    const ScalarField fstar = regression_field(linear_regression(f), f.shape);
    run_indexed(ladder.size(), jobs, [&](std::size_t k) {
        SolveResult r = solve_tgv2(f, ladder[k].first, ladder[k].second, cfg);
        rep.rows[k] = {ladder[k].first, ladder[k].second, rel_l2_distance(r.u, fstar),
                       r.converged ? 1.0 : 0.0};
    });
    rep.metadata.emplace_back("n1", std::to_string(f.shape.n1));
    rep.metadata.emplace_back("n2", std::to_string(f.shape.n2));
    rep.metadata.emplace_back("config", config_hash(cfg, rep.experiment));
    return rep;
}

/* At large beta/alpha the TGV solution is TV-like
 * modulo an affine correction: w collapses into Ker E while the solutions
 * still differ from plain TV. */
inline ExperimentReport experiment_affine_correction(const ScalarField& f, double alpha, double beta,
                                                     SolverConfig cfg = {}) {
    ExperimentReport rep;
    rep.experiment = "affine-correction";
    rep.columns = {"alpha", "beta", "ew_mass", "rel_l2_distance_to_tv", "median_gain", "converged"};
    SolveResult tgv = solve_tgv2(f, alpha, beta, cfg);
    SolveResult tv = solve_tv(f, alpha, cfg);
    VectorField g = grad_cascade(tgv.u);
    MedianResult med = median_ker_e(g);
    const double gain = median_objective(g, KerEElement{}) - med.objective;
    rep.rows.push_back({alpha, beta, tgv.beta_mass, rel_l2_distance(tgv.u, tv.u), gain,
                        (tgv.converged && tv.converged) ? 1.0 : 0.0});
    rep.metadata.emplace_back("n1", std::to_string(f.shape.n1));
    rep.metadata.emplace_back("n2", std::to_string(f.shape.n2));
    rep.metadata.emplace_back("config", config_hash(cfg, rep.experiment));
    return rep;
}

inline ExperimentReport beta_star_report(const BetaStarResult& r, double alpha) {
    ExperimentReport rep;
    rep.experiment = "beta-star";
    rep.columns = {"beta", "max_abs_Du_minus_w", "dist_to_tv2"};
    for (const auto& row : r.table)
        rep.rows.push_back({row.beta, row.max_abs_du_minus_w, row.dist_to_tv2});
    rep.metadata.emplace_back("alpha", format_full(alpha));
    rep.metadata.emplace_back("beta_star", format_full(r.beta_star));
    rep.metadata.emplace_back("found", r.found ? "1" : "0");
    return rep;
}

// geometric sweep helper: count values from hi down to lo (or up), log-spaced
inline std::vector<double> geometric_values(double from, double to, int count) {
    std::vector<double> v;
    if (count <= 1) {
        v.push_back(from);
        return v;
    }
    const double ratio = std::pow(to / from, 1.0 / (count - 1));
    double x = from;
    for (int k = 0; k < count; ++k) {
        v.push_back(x);
        x *= ratio;
    }
    v.back() = to;
    return v;
}

}  // namespace tgv
