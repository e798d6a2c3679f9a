#include <gtest/gtest.h>

#include "tgv/affine.hpp"
#include "tgv/diffops.hpp"
#include "tgv/harness.hpp"

using namespace tgv;

namespace {

ScalarField random_scalar(const GridShape& s, Rng& rng) {
    ScalarField f(s);
    for (double& x : f.v) x = rng.normal();
    return f;
}

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

TEST(DiffOps, GradOfConstantIsZero) {
    ScalarField u(grid_2d(6, 7));
    for (double& x : u.v) x = 4.25;
    VectorField g = grad(u);
    for (double x : g.v) EXPECT_EQ(x, 0.0);
}

TEST(DiffOps, GradOfRamp) {
    const double h = 0.5;
    GridShape s = grid_2d(5, 4, h);
    ScalarField u(s);
    for (int i = 0; i < s.n1; ++i)
        for (int j = 0; j < s.n2; ++j) u.at(i, j) = i * h;
    VectorField g = grad(u);
    for (int i = 0; i < s.n1; ++i)
        for (int j = 0; j < s.n2; ++j) {
            EXPECT_DOUBLE_EQ(g.at(0, s.index(i, j)), i + 1 < s.n1 ? 1.0 : 0.0);
            EXPECT_DOUBLE_EQ(g.at(1, s.index(i, j)), 0.0);
        }
}

TEST(DiffOps, AdjointnessGradDiv) {
    Rng rng(101);
    for (const GridShape& s : {grid_2d(16, 16), grid_1d(64), grid_2d(5, 9, 0.25)}) {
        for (int rep = 0; rep < 25; ++rep) {
            ScalarField u = random_scalar(s, rng);
            VectorField p = random_vec(s, rng);
            const double lhs = inner(grad(u), p);
            const double rhs = -inner(u, div_vec(p));
            EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0));
        }
    }
}

TEST(DiffOps, AdjointnessSymGradDivTensor) {
    Rng rng(102);
    for (const GridShape& s : {grid_2d(16, 16), grid_1d(64), grid_2d(7, 5, 2.0)}) {
        for (int rep = 0; rep < 25; ++rep) {
            VectorField w = random_vec(s, rng);
            SymTensorField q = random_tensor(s, rng);
            const double lhs = inner(sym_grad(w), q);
            const double rhs = -inner(w, div_tensor(q));
            EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0));
        }
    }
}

TEST(DiffOps, AdjointnessCascadePair) {
    Rng rng(103);
    for (const GridShape& s : {grid_2d(16, 16), grid_2d(4, 11), grid_1d(32)}) {
        for (int rep = 0; rep < 25; ++rep) {
            VectorField w = random_vec(s, rng);
            SymTensorField q = random_tensor(s, rng);
            const double lhs = inner(sym_grad_cascade(w), q);
            const double rhs = -inner(w, div_tensor_cascade(q));
            EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0));
        }
    }
}

TEST(DiffOps, SecondDiffAffineKernelAndAdjoint) {
    GridShape s = grid_1d(17, 0.5);
    ScalarField u(s);
    for (int i = 0; i < s.n1; ++i) u.v[i] = 3.0 - 1.25 * s.x1(i);
    ScalarField r = second_diff_1d(u);
    for (double x : r.v) EXPECT_NEAR(x, 0.0, 1e-13);

    Rng rng(104);
    for (int rep = 0; rep < 20; ++rep) {
        ScalarField a = random_scalar(s, rng), b = random_scalar(s, rng);
        const double lhs = inner(second_diff_1d(a), b);
        const double rhs = inner(a, second_diff_1d_adjoint(b));
        EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + 1.0));
    }
}

// discretised r(x) = Ax + b with skew A: exact zeros away from the replicated boundary
TEST(DiffOps, PlainSymGradKernelInterior) {
    GridShape s = grid_2d(9, 9);
    Rng rng(105);
    for (int rep = 0; rep < 10; ++rep) {
        KerEElement e{rng.normal(), rng.normal(), rng.normal()};
        SymTensorField t = sym_grad(eval_ker_e(e, s));
        for (int i = 0; i + 1 < s.n1; ++i)
            for (int j = 0; j + 1 < s.n2; ++j) {
                const std::size_t k = s.index(i, j);
                EXPECT_EQ(t.at(0, k), 0.0);
                EXPECT_EQ(t.at(1, k), 0.0);
                EXPECT_NEAR(t.at(2, k), 0.0, 1e-14 * (1.0 + std::abs(e.skew) * s.n1));
            }
    }
}

// the cascade stencil annihilates Ker E on the whole grid
TEST(DiffOps, CascadeSymGradKernelFullGrid) {
    GridShape s = grid_2d(8, 12);
    Rng rng(106);
    for (int rep = 0; rep < 10; ++rep) {
        KerEElement e{rng.normal(), rng.normal(), rng.normal()};
        SymTensorField t = sym_grad_cascade(eval_ker_e(e, s));
        for (double x : t.v) EXPECT_NEAR(x, 0.0, 1e-14 * (1.0 + std::abs(e.skew) * s.n1));
    }
}

TEST(DiffOps, SymGradReducesToGradIn1D) {
    GridShape s = grid_1d(23);
    Rng rng(107);
    VectorField w = random_vec(s, rng);
    SymTensorField t = sym_grad(w);
    ScalarField wu(s);
    for (int i = 0; i < s.n1; ++i) wu.v[i] = w.at(0, i);
    VectorField g = grad(wu);
    for (int i = 0; i < s.n1; ++i) EXPECT_DOUBLE_EQ(t.at(0, i), g.at(0, i));
}

TEST(DiffOps, DivOfZeroAndConstant1D) {
    GridShape s = grid_1d(12);
    VectorField p(s);
    ScalarField d = div_vec(p);
    for (double x : d.v) EXPECT_EQ(x, 0.0);
    for (double& x : p.v) x = 2.0;
    d = div_vec(p);
    for (int i = 1; i + 1 < s.n1; ++i) EXPECT_EQ(d.v[i], 0.0);  // interior
}

TEST(DiffOps, GradCascadeReplicatesLastDifference) {
    GridShape s = grid_2d(5, 6);
    Rng rng(108);
    ScalarField u = random_scalar(s, rng);
    VectorField g = grad_cascade(u);
    for (int j = 0; j < s.n2; ++j)
        EXPECT_DOUBLE_EQ(g.at(0, s.index(s.n1 - 1, j)), g.at(0, s.index(s.n1 - 2, j)));
    for (int i = 0; i < s.n1; ++i)
        EXPECT_DOUBLE_EQ(g.at(1, s.index(i, s.n2 - 1)), g.at(1, s.index(i, s.n2 - 2)));
}

TEST(DiffOps, OpNormGradClassicalBounds) {
    OpNormEstimate e2 = estimate_op_norm(grid_2d(24, 24), OperatorKind::Grad);
    EXPECT_LE(e2.value * e2.value, 8.0 + 1e-9);
    EXPECT_GT(e2.value * e2.value, 7.0);  // tight for moderately large grids

    OpNormEstimate e1 = estimate_op_norm(grid_1d(64), OperatorKind::Grad);
    EXPECT_LE(e1.value * e1.value, 4.0 + 1e-9);
    EXPECT_GT(e1.value * e1.value, 3.5);

    OpNormEstimate eh = estimate_op_norm(grid_2d(16, 16, 0.5), OperatorKind::Grad);
    EXPECT_LE(eh.value * eh.value, 8.0 / 0.25 + 1e-9);
}

TEST(DiffOps, OpNormTgvStableAcrossCaps) {
    OpNormEstimate a = estimate_op_norm(grid_2d(32, 32), OperatorKind::TgvCascade, 4000, 1e-14);
    OpNormEstimate b = estimate_op_norm(grid_2d(32, 32), OperatorKind::TgvCascade, 8000, 1e-14);
    EXPECT_NEAR(a.value, b.value, 1e-6 * a.value);
    EXPECT_TRUE(a.converged);
    EXPECT_TRUE(b.converged);
}

// the reported residual bounds the distance to the converged value
TEST(DiffOps, OpNormResidualBoundsError) {
    OpNormEstimate rough = estimate_op_norm(grid_2d(32, 32), OperatorKind::TgvCascade, 200, 0.0);
    OpNormEstimate fine = estimate_op_norm(grid_2d(32, 32), OperatorKind::TgvCascade, 20000, 1e-15);
    const double lam_rough = rough.value * rough.value;
    const double lam_fine = fine.value * fine.value;
    EXPECT_LE(std::abs(lam_rough - lam_fine), rough.residual * lam_rough * 1.5);
}

TEST(DiffOps, OpNormDeterministic) {
    OpNormEstimate a = estimate_op_norm(grid_2d(12, 12), OperatorKind::TgvCascade);
    OpNormEstimate b = estimate_op_norm(grid_2d(12, 12), OperatorKind::TgvCascade);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.iterations, b.iterations);
}
