#include <gtest/gtest.h>

#include "tgv/fields.hpp"
#include "tgv/harness.hpp"

using namespace tgv;

namespace {

VectorField random_vec(const GridShape& s, Rng& rng) {
    VectorField v(s);
    for (double& x : v.v) x = rng.normal();
    return v;
}

SymTensorField random_tensor(const GridShape& s, Rng& rng) {
    SymTensorField t(s);
    for (double& x : t.v) x = rng.normal();
    return t;
}

}  // namespace

TEST(Fields, RadonNormVecZeroAndPixel) {
    GridShape s = grid_2d(4, 4);
    VectorField p(s);
    EXPECT_EQ(radon_norm_vec(p), 0.0);
    p.at(0, s.index(1, 2)) = 3.0;
    p.at(1, s.index(1, 2)) = 4.0;
    EXPECT_DOUBLE_EQ(radon_norm_vec(p), 5.0);
}

// the norm is the plain sum of per-pixel norms
TEST(Fields, RadonNormVecMatchesResummation) {
    GridShape s = grid_2d(8, 8);
    Rng rng(11);
    VectorField p = random_vec(s, rng);
    double expect = 0.0;
    for (std::size_t k = 0; k < s.pixel_count(); ++k)
        expect += std::sqrt(p.at(0, k) * p.at(0, k) + p.at(1, k) * p.at(1, k));
    EXPECT_NEAR(radon_norm_vec(p), expect, 1e-12 * expect);
}

TEST(Fields, RadonNormVecSpacingWeight) {
    GridShape s = grid_2d(4, 4, 0.5);
    VectorField p(s);
    p.at(0, s.index(2, 2)) = 2.0;
    EXPECT_DOUBLE_EQ(radon_norm_vec(p), 0.25 * 2.0);
}

TEST(Fields, RadonNormTensorFrobenius) {
    GridShape s = grid_2d(3, 3);
    SymTensorField q(s);
    EXPECT_EQ(radon_norm_tensor(q), 0.0);
    q.at(0, 0) = 1.0;  // identity matrix at one pixel
    q.at(1, 0) = 1.0;
    EXPECT_DOUBLE_EQ(radon_norm_tensor(q), std::sqrt(2.0));
    SymTensorField q2(s);
    q2.at(2, 0) = 1.0;  // off-diagonal counted twice
    EXPECT_DOUBLE_EQ(radon_norm_tensor(q2), std::sqrt(2.0));
}

TEST(Fields, InnerSymmetricAndT12Weight) {
    GridShape s = grid_2d(5, 5);
    Rng rng(3);
    SymTensorField a = random_tensor(s, rng), b = random_tensor(s, rng);
    EXPECT_DOUBLE_EQ(inner(a, b), inner(b, a));
    SymTensorField c(s), d(s);
    c.at(2, 7) = 1.0;
    d.at(2, 7) = 1.0;
    EXPECT_DOUBLE_EQ(inner(c, d), 2.0);  // <A, B> = sum a_ij b_ij over full matrices
}

TEST(Fields, InnerBilinearAndZero) {
    GridShape s = grid_2d(6, 6);
    Rng rng(5);
    VectorField a = random_vec(s, rng), b = random_vec(s, rng), c = random_vec(s, rng);
    VectorField bc(s);
    for (std::size_t k = 0; k < bc.v.size(); ++k) bc.v[k] = 2.0 * b.v[k] - 3.0 * c.v[k];
    EXPECT_NEAR(inner(a, bc), 2.0 * inner(a, b) - 3.0 * inner(a, c), 1e-12 * std::abs(inner(a, bc)) + 1e-12);
    VectorField zero(s);
    EXPECT_EQ(inner(a, zero), 0.0);
}

TEST(Fields, InnerShapeMismatchThrows) {
    ScalarField a(grid_2d(4, 4)), b(grid_2d(4, 5));
    EXPECT_THROW(inner(a, b), std::invalid_argument);
}

TEST(Fields, RadonHomogeneityAndTriangle) {
    GridShape s = grid_2d(7, 5);
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        VectorField a = random_vec(s, rng), b = random_vec(s, rng);
        const double c = rng.uniform(-3.0, 3.0);
        VectorField ca(s), apb(s);
        for (std::size_t k = 0; k < a.v.size(); ++k) {
            ca.v[k] = c * a.v[k];
            apb.v[k] = a.v[k] + b.v[k];
        }
        EXPECT_NEAR(radon_norm_vec(ca), std::abs(c) * radon_norm_vec(a),
                    1e-12 * radon_norm_vec(ca) + 1e-15);
        EXPECT_LE(radon_norm_vec(apb),
                  (radon_norm_vec(a) + radon_norm_vec(b)) * (1.0 + 1e-12));

        SymTensorField ta = random_tensor(s, rng), tb = random_tensor(s, rng);
        SymTensorField tsum(s);
        for (std::size_t k = 0; k < ta.v.size(); ++k) tsum.v[k] = ta.v[k] + tb.v[k];
        EXPECT_LE(radon_norm_tensor(tsum),
                  (radon_norm_tensor(ta) + radon_norm_tensor(tb)) * (1.0 + 1e-12));
    }
}

TEST(Fields, RadonZeroIffAllComponentsZero) {
    GridShape s = grid_2d(4, 6);
    VectorField p(s);
    EXPECT_EQ(radon_norm_vec(p), 0.0);
    p.at(1, 13) = 1e-150;
    EXPECT_GT(radon_norm_vec(p), 0.0);
}

TEST(Fields, GridShapeValidation) {
    EXPECT_THROW(validate(GridShape{2, 1, 4, 1.0}), std::invalid_argument);
    EXPECT_THROW(validate(GridShape{2, 4, 4, 0.0}), std::invalid_argument);
    EXPECT_THROW(validate(GridShape{1, 4, 2, 1.0}), std::invalid_argument);
    EXPECT_NO_THROW(validate(grid_1d(2)));
    EXPECT_NO_THROW(validate(grid_2d(2, 2)));
}

TEST(Fields, CentredCoordinates) {
    GridShape s = grid_2d(4, 5, 2.0);
    EXPECT_DOUBLE_EQ(s.x1(0), -3.0);
    EXPECT_DOUBLE_EQ(s.x1(3), 3.0);
    EXPECT_DOUBLE_EQ(s.x2(2), 0.0);
}
