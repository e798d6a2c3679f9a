#include <gtest/gtest.h>

#include "tgv/harness.hpp"
#include "tgv/oned.hpp"

using namespace tgv;

TEST(BuildDual, ZeroResidualGivesZeroDual) {
    ScalarField f = gen_step_1d(16);
    ScalarField v = build_dual(f, f);
    for (double x : v.v) EXPECT_EQ(x, 0.0);
}

// double integral of 1 on [0,1): x^2/2 up to the one-sided quadrature offset O(h)
TEST(BuildDual, DoubleIntegralOfOne) {
    const int n = 64;
    const double h = 1.0 / n;
    ScalarField u(grid_1d(n, h));
    ScalarField f(grid_1d(n, h));
    for (double& x : f.v) x = 1.0;
    ScalarField v = build_dual(f, u);
    for (int i = 0; i < n; ++i) {
        const double x = i * h;
        EXPECT_NEAR(v.v[i], 0.5 * x * x, h);
    }
}

TEST(BuildDual, SecondDifferenceReproducesResidual) {
    Rng rng(3);
    ScalarField f(grid_1d(40, 0.25));
    ScalarField u(grid_1d(40, 0.25));
    for (double& x : f.v) x = rng.normal();
    for (double& x : u.v) x = rng.normal();
    ScalarField v = build_dual(f, u);
    std::vector<double> d2 = dual_second_difference(v);
    for (std::size_t i = 0; i < d2.size(); ++i) {
        const double target = f.v[i] - u.v[i];
        EXPECT_NEAR(d2[i], target, 1e-12 * (1.0 + std::abs(target)));
    }
}

TEST(CheckSgn, BallAndAlignment) {
    // zero measure: any dual inside the ball passes
    EXPECT_EQ(check_sgn_inclusion({0.0, 0.0}, {0.3, -0.4}, 0.5, 1e-9), 0.0);
    // positive measure with dual at the bound: aligned
    EXPECT_EQ(check_sgn_inclusion({1.0}, {0.5}, 0.5, 1e-9), 0.0);
    // ball excess shows up in the violation
    EXPECT_GE(check_sgn_inclusion({0.0}, {0.6}, 0.5, 1e-9), 0.1 - 1e-15);
    // misaligned dual on a live measure
    EXPECT_NEAR(check_sgn_inclusion({1.0}, {-0.5}, 0.5, 1e-9), 1.0, 1e-15);
}

// end-to-end certificate: a tightly converged 1-D TGV pair admits the dual
TEST(Optimality, CertificateForConvergedSolve) {
    ScalarField f = add_noise(gen_step_1d(48), 0.05, 21);
    const double alpha = 0.3, beta = 0.1;
    SolverConfig cfg;
    cfg.max_iter = 400000;
    cfg.tol = 1e-14;
    SolveResult r = solve_tgv2(f, alpha, beta, cfg);
    OptimalityReport rep = optimality_report(f, r.u, r.w, alpha, beta, 1e-7, 2e-5);
    EXPECT_LE(rep.v_a, 1e-12);
    EXPECT_LE(rep.dv_a, 1e-12);
    EXPECT_LE(rep.v_b, 2e-5) << "v(b) residual";
    EXPECT_LE(rep.dv_b, 2e-5) << "v'(b) residual";
    EXPECT_LE(rep.c_alpha_violation, 2e-5);
    EXPECT_LE(rep.c_beta_violation, 2e-5);
    EXPECT_TRUE(rep.passed);
}

TEST(BetaStar, AffineSignalQualifiesEverywhere) {
    ScalarField f(grid_1d(32));
    for (int i = 0; i < 32; ++i) f.v[i] = 0.5 + 0.01 * i;
    SolverConfig cfg;
    cfg.max_iter = 60000;
    cfg.tol = 1e-13;
    BetaStarOptions opt;
    opt.bisect_steps = 4;
    BetaStarResult r = find_beta_star(f, 0.5, cfg, opt);
    EXPECT_TRUE(r.found);
    EXPECT_DOUBLE_EQ(r.beta_star, opt.beta_hi);
}

TEST(BetaStar, StepSignalThresholdAndAgreement) {
    ScalarField f = gen_step_1d(64);
    SolverConfig cfg;
    cfg.max_iter = 200000;
    cfg.tol = 1e-13;
    BetaStarOptions opt;
    opt.bisect_steps = 8;
    BetaStarResult r = find_beta_star(f, 0.1, cfg, opt);
    ASSERT_TRUE(r.found);
    EXPECT_GT(r.beta_star, 0.0);
    EXPECT_LT(r.beta_star, opt.beta_hi);

    // below the threshold: gradients match w and the solution solves
    // the second-order TV problem
    SolveResult tg = solve_tgv2(f, 0.1, r.beta_star / 2.0, cfg);
    SolveResult t2 = solve_tv2_1d(f, r.beta_star / 2.0, cfg);
    EXPECT_LE(max_abs_graddiff(tg.u, tg.w), 1e-6);
    EXPECT_LE(rel_l2_distance(tg.u, t2.u), 1e-4);

    // detection indicator is monotone across the sampled grid
    bool seen_fail = false;
    for (const BetaStarRow& row : r.table) {
        const bool ok = row.max_abs_du_minus_w <= opt.detection_tol;
        if (!ok) seen_fail = true;
        if (seen_fail) {
            EXPECT_FALSE(ok) << "indicator flapped at beta=" << row.beta;
        }
    }
}

TEST(BetaStar, NoSwitchInsideBracketIsFlagged) {
    ScalarField f = gen_step_1d(32);
    SolverConfig cfg;
    cfg.max_iter = 60000;
    cfg.tol = 1e-13;
    BetaStarOptions opt;
    opt.beta_lo = 0.3;  // already above the switch for this signal
    opt.beta_hi = 1.0;
    opt.bisect_steps = 2;
    BetaStarResult r = find_beta_star(f, 0.1, cfg, opt);
    EXPECT_FALSE(r.found);
    EXPECT_TRUE(std::isnan(r.beta_star));
}
