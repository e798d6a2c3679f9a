#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "tgv/affine.hpp"
#include "tgv/harness.hpp"

using namespace tgv;

TEST(Affine, EvalKerEConstant) {
    GridShape s = grid_2d(6, 6);
    VectorField r = eval_ker_e(KerEElement{0.0, 1.0, 0.0}, s);
    for (std::size_t k = 0; k < s.pixel_count(); ++k) {
        EXPECT_EQ(r.at(0, k), 1.0);
        EXPECT_EQ(r.at(1, k), 0.0);
    }
}

TEST(Affine, EvalKerERotationFixesCentre) {
    GridShape s = grid_2d(9, 9);  // odd: the centre pixel sits at the origin
    VectorField r = eval_ker_e(KerEElement{1.0, 0.0, 0.0}, s);
    const std::size_t c = s.index(4, 4);
    EXPECT_EQ(r.at(0, c), 0.0);
    EXPECT_EQ(r.at(1, c), 0.0);
}

TEST(Affine, MedianExactFitHasZeroObjective) {
    GridShape s = grid_2d(8, 8);
    KerEElement e0{0.35, -0.2, 0.6};
    VectorField g = eval_ker_e(e0, s);
    MedianResult m = median_ker_e(g);
    EXPECT_LE(m.objective, 1e-8);
    EXPECT_TRUE(m.converged);
}

// data with the symmetries of a gradient of a rotation-invariant function:
// zero is a minimiser, so the objective at zero cannot beat the optimum
TEST(Affine, MedianSymmetricDataAdmitsZero) {
    GridShape s = grid_2d(12, 12);
    VectorField g(s);
    for (int i = 0; i < s.n1; ++i)
        for (int j = 0; j < s.n2; ++j) {
            const double x1 = s.x1(i), x2 = s.x2(j);
            const double psi = std::exp(-(x1 * x1 + x2 * x2) / 18.0);
            g.at(0, s.index(i, j)) = x1 * psi;
            g.at(1, s.index(i, j)) = x2 * psi;
        }
    MedianResult m = median_ker_e(g);
    const double at_zero = median_objective(g, KerEElement{});
    EXPECT_LE(at_zero, m.objective + 1e-9 * (1.0 + at_zero));
}

TEST(Affine, MedianMatchesGridSearchOracle) {
    GridShape s = grid_2d(8, 8);
    Rng rng(42);
    for (int rep = 0; rep < 3; ++rep) {
        VectorField g(s);
        for (double& x : g.v) x = rng.normal();
        MedianResult m = median_ker_e(g);
        const double oracle = oracle::median_grid_search(g);
        EXPECT_NEAR(m.objective, oracle, 1e-3);
        EXPECT_LE(m.objective, oracle + 1e-3);               // never worse than the oracle grid
        EXPECT_LE(m.objective, median_objective(g, KerEElement{}) + 1e-12);
    }
}

TEST(Affine, MedianDeterministic) {
    GridShape s = grid_2d(8, 8);
    Rng rng(43);
    VectorField g(s);
    for (double& x : g.v) x = rng.normal();
    MedianResult a = median_ker_e(g);
    MedianResult b = median_ker_e(g);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(a.element.skew, b.element.skew);
}

TEST(Affine, Median1DIsTheUsualMedian) {
    GridShape s = grid_1d(7);
    VectorField g(s);
    const double vals[7] = {5.0, -1.0, 2.0, 9.0, 0.0, 2.5, 2.0};
    for (int i = 0; i < 7; ++i) g.at(0, i) = vals[i];
    MedianResult m = median_ker_e(g);
    EXPECT_DOUBLE_EQ(m.element.b1, 2.0);
    double obj = 0.0;
    for (double v : vals) obj += std::abs(v - 2.0);
    EXPECT_DOUBLE_EQ(m.objective, obj);
}

TEST(Affine, RegressionRecoversAffineExactly) {
    GridShape s = grid_2d(10, 14);
    ScalarField f(s);
    for (int i = 0; i < s.n1; ++i)
        for (int j = 0; j < s.n2; ++j) f.at(i, j) = 1.5 - 0.25 * s.x1(i) + 0.75 * s.x2(j);
    AffineFit fit = linear_regression(f);
    EXPECT_NEAR(fit.c0, 1.5, 1e-12);
    EXPECT_NEAR(fit.c1, -0.25, 1e-12);
    EXPECT_NEAR(fit.c2, 0.75, 1e-12);
}

TEST(Affine, RegressionInterceptIsMeanOnCentredGrid) {
    GridShape s = grid_2d(9, 9);
    Rng rng(44);
    ScalarField f(s);
    double mean = 0.0;
    for (double& x : f.v) {
        x = rng.normal();
        mean += x;
    }
    mean /= static_cast<double>(f.v.size());
    AffineFit fit = linear_regression(f);
    EXPECT_NEAR(fit.c0, mean, 1e-12 * (1.0 + std::abs(mean)));
}

TEST(Affine, RegressionMatchesQrOracle) {
    GridShape s = grid_2d(16, 16);
    Rng rng(45);
    ScalarField f(s);
    for (double& x : f.v) x = rng.normal();
    AffineFit a = linear_regression(f);
    AffineFit b = oracle::regression_qr(f);
    EXPECT_NEAR(a.c0, b.c0, 1e-10);
    EXPECT_NEAR(a.c1, b.c1, 1e-10);
    EXPECT_NEAR(a.c2, b.c2, 1e-10);
}

TEST(Affine, RegressionIdempotent) {
    GridShape s = grid_2d(11, 8);
    Rng rng(46);
    ScalarField f(s);
    for (double& x : f.v) x = rng.normal();
    AffineFit fit = linear_regression(f);
    AffineFit refit = linear_regression(regression_field(fit, s));
    EXPECT_NEAR(fit.c0, refit.c0, 1e-12);
    EXPECT_NEAR(fit.c1, refit.c1, 1e-12);
    EXPECT_NEAR(fit.c2, refit.c2, 1e-12);
}

TEST(Affine, Regression1D) {
    GridShape s = grid_1d(20);
    ScalarField f(s);
    for (int i = 0; i < s.n1; ++i) f.v[i] = -2.0 + 0.5 * s.x1(i);
    AffineFit fit = linear_regression(f);
    EXPECT_NEAR(fit.c0, -2.0, 1e-12);
    EXPECT_NEAR(fit.c1, 0.5, 1e-12);
    AffineFit qr = oracle::regression_qr(f);
    EXPECT_NEAR(fit.c1, qr.c1, 1e-10);
}
