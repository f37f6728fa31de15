#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rfspec/numeric.hpp"
#include "rfspec/spectrum.hpp"

using namespace rfspec;

namespace {

ComplexMatrix random_matrix(std::mt19937_64 &rng, std::size_t n, double scale) {
    std::normal_distribution<double> nd;
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = scale * complex(nd(rng), nd(rng));
    return a;
}

ComplexVector random_vector(std::mt19937_64 &rng, std::size_t n) {
    std::normal_distribution<double> nd;
    ComplexVector v(n);
    for (auto &z : v)
        z = complex(nd(rng), nd(rng));
    return v;
}

double max_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
    return (a - b).max_abs();
}

complex det(ComplexMatrix a) {
    const std::size_t n = a.rows();
    complex d = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k)))
                p = i;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(a(k, j), a(p, j));
            d = -d;
        }
        d *= a(k, k);
        if (a(k, k) == complex{})
            return 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            const complex f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j)
                a(i, j) -= f * a(k, j);
        }
    }
    return d;
}

} // namespace

TEST(SolveLinear, Identity) {
    const ComplexVector b{1.0, 2.0 * I, -1.0};
    const ComplexVector x = solve_linear(ComplexMatrix::identity(3), b);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(x[i], b[i]);
}

TEST(SolveLinear, Diagonal) {
    const ComplexMatrix a{{2.0, 0.0}, {0.0, I}};
    const ComplexVector x = solve_linear(a, ComplexVector{2.0, I});
    EXPECT_NEAR(std::abs(x[0] - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(x[1] - 1.0), 0.0, 1e-15);
}

TEST(SolveLinear, ResidualOnRandomSystems) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + trial % 8;
        ComplexMatrix a = random_matrix(rng, n, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            a(i, i) += 3.0 * static_cast<double>(n);
        const ComplexVector b = random_vector(rng, n);
        const ComplexVector x = solve_linear(a, b);
        const double residual = (a * x - b).norm_inf();
        EXPECT_LE(residual, 1e-12 * (a.norm_inf() * x.norm_inf() + b.norm_inf()));
    }
}

TEST(SolveLinear, SingularThrows) {
    const ComplexMatrix a{{1.0, 2.0}, {2.0, 4.0}};
    EXPECT_THROW(solve_linear(a, ComplexVector{1.0, 1.0}), SingularMatrix);
    EXPECT_THROW(solve_linear(ComplexMatrix(2, 2), ComplexVector{1.0, 1.0}),
                 SingularMatrix);
}

TEST(SolveLinear, RejectsBadShapes) {
    EXPECT_THROW(solve_linear(ComplexMatrix(2, 3), ComplexVector{1.0, 1.0}),
                 InvalidInput);
    EXPECT_THROW(solve_linear(ComplexMatrix::identity(2), ComplexVector{1.0}),
                 InvalidInput);
    EXPECT_THROW(solve_linear(ComplexMatrix::identity(300), ComplexVector(300)),
                 InvalidInput);
    ComplexMatrix bad = ComplexMatrix::identity(2);
    bad(0, 1) = std::nan("");
    EXPECT_THROW(solve_linear(bad, ComplexVector{1.0, 1.0}), InvalidInput);
}

TEST(SolveLinear, PivotTieGoesToLowestRow) {
    // both rows offer a pivot of modulus 1; either choice solves the system,
    // the rule only fixes which one and therefore the exact bits
    const ComplexMatrix a{{1.0, 1.0}, {-1.0, 1.0}};
    const ComplexVector x1 = solve_linear(a, ComplexVector{2.0, 0.0});
    const ComplexVector x2 = solve_linear(a, ComplexVector{2.0, 0.0});
    EXPECT_EQ(x1[0], x2[0]);
    EXPECT_EQ(x1[0], complex(1.0));
    EXPECT_EQ(x1[1], complex(1.0));
}

TEST(MatExp, ZeroTimeIsIdentity) {
    std::mt19937_64 rng(3);
    const ComplexMatrix a = random_matrix(rng, 4, 1.0);
    EXPECT_EQ(max_diff(mat_exp(a, 0.0), ComplexMatrix::identity(4)), 0.0);
}

TEST(MatExp, Diagonal) {
    const ComplexMatrix e = mat_exp(ComplexMatrix{{-1.0, 0.0}, {0.0, -2.0}}, 1.0);
    EXPECT_NEAR(std::abs(e(0, 0) - std::exp(-1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e(1, 1) - std::exp(-2.0)), 0.0, 1e-15);
    EXPECT_EQ(std::abs(e(0, 1)), 0.0);
}

TEST(MatExp, NilpotentSeriesTerminates) {
    const ComplexMatrix a{{0.0, 0.0}, {1.0, 0.0}};
    const ComplexMatrix e = mat_exp(a, 1.0);
    EXPECT_LE(max_diff(e, ComplexMatrix::identity(2) + a), 1e-15);
}

TEST(MatExp, RotationGenerator) {
    const ComplexMatrix a{{0.0, 1.0}, {-1.0, 0.0}};
    for (double t : {0.3, 2.0, 40.0, 99.0}) {
        const ComplexMatrix e = mat_exp(a, t);
        EXPECT_NEAR(std::abs(e(0, 0) - std::cos(t)), 0.0, 1e-12 * std::max(1.0, t));
        EXPECT_NEAR(std::abs(e(0, 1) - std::sin(t)), 0.0, 1e-12 * std::max(1.0, t));
    }
}

TEST(MatExp, SemigroupProperty) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        ComplexMatrix a = random_matrix(rng, 3 + trial % 3, 0.5);
        for (std::size_t i = 0; i < a.rows(); ++i)
            a(i, i) -= 2.0;
        const double s = 0.1 + 0.05 * trial, t = 1.3;
        EXPECT_LE(max_diff(mat_exp(a, s) * mat_exp(a, t), mat_exp(a, s + t)), 1e-10);
    }
}

TEST(MatExp, OverflowGuard) {
    const ComplexMatrix a{{1000.0, 0.0}, {0.0, 1.0}};
    EXPECT_THROW(mat_exp(a, 1.0), Overflow);
    EXPECT_THROW(mat_exp(a, -1.0), InvalidInput);
}

TEST(MatExp, SemigroupLongHorizon) {
    const ComplexMatrix a{{-1.0, 5.0}, {0.0, -2.0}};
    const ComplexMatrix e = semigroup(a, 300.0);
    EXPECT_TRUE(e.all_finite());
    EXPECT_LE(e.max_abs(), 1e-100);
    const ComplexMatrix r = semigroup(ComplexMatrix{{0.0, 1.0}, {-1.0, 0.0}}, 1000.0);
    EXPECT_NEAR(std::abs(r(0, 0) - std::cos(1000.0)), 0.0, 1e-10);
}

TEST(Eigvals, DiagonalSorted) {
    const auto ev = eigvals(ComplexMatrix{{1.0, 0.0}, {0.0, 2.0 * I}});
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_NEAR(std::abs(ev[0] - 2.0 * I), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(ev[1] - 1.0), 0.0, 1e-14);
}

TEST(Eigvals, RotationGenerator) {
    const auto ev = eigvals(ComplexMatrix{{0.0, 1.0}, {-1.0, 0.0}});
    EXPECT_NEAR(std::abs(ev[0] + I), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(ev[1] - I), 0.0, 1e-14);
}

TEST(Eigvals, CharacteristicPolynomialResidual) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + trial % 5;
        const ComplexMatrix a = random_matrix(rng, n, 1.0);
        const double scale = std::pow(a.norm_inf(), static_cast<double>(n));
        for (complex lambda : eigvals(a)) {
            ComplexMatrix shifted = a;
            for (std::size_t i = 0; i < n; ++i)
                shifted(i, i) -= lambda;
            EXPECT_LE(std::abs(det(shifted)), 1e-8 * scale);
        }
    }
}

TEST(Eigvals, PermutationSimilarity) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + trial % 4;
        const ComplexMatrix a = random_matrix(rng, n, 1.0);
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i)
            perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        ComplexMatrix p(n, n);
        for (std::size_t i = 0; i < n; ++i)
            p(i, perm[i]) = 1.0;
        const auto e1 = eigvals(a);
        const auto e2 = eigvals(p * a * p.adjoint());
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_LE(std::abs(e1[i] - e2[i]), 1e-8);
    }
}

TEST(Integrate, Constant) {
    EXPECT_NEAR(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, 1e-12), 1.0,
                1e-14);
}

TEST(Integrate, ArctanAntiderivative) {
    const double v = integrate_adaptive([](double x) { return 1.0 / (1.0 + x * x); },
                                        -100.0, 100.0, 1e-10);
    EXPECT_NEAR(v, 2.0 * std::atan(100.0), 1e-9);
}

TEST(Integrate, Errors) {
    auto one = [](double) { return 1.0; };
    EXPECT_THROW(integrate_adaptive(one, 1.0, 0.0, 1e-8), InvalidInput);
    EXPECT_THROW(integrate_adaptive(one, 0.0, 1.0, 0.0), InvalidInput);
    EXPECT_THROW(integrate_adaptive([](double x) { return 1.0 / x; }, -1.0, 1.0, 1e-8),
                 MaxSubdivisions);
}

TEST(Integrate, StrengthOfFigureOneSpectrum) {
    const ModelParams p = presets::modified(0.0, 0.0);
    const TotalSpectrum sigma(p);
    double total = 0.0;
    for (double a = -500.0; a < 500.0; a += 10.0)
        total += integrate_adaptive(sigma, a, a + 10.0, 1e-10);
    EXPECT_NEAR(total / strength(p), 1.0, 1e-2);
}

TEST(Kron, Shape) {
    const ComplexMatrix a{{1.0, 2.0}, {3.0, 4.0}};
    const ComplexMatrix k = kron(a, ComplexMatrix::identity(2));
    EXPECT_EQ(k.rows(), 4u);
    EXPECT_EQ(k(2, 0), complex(3.0));
    EXPECT_EQ(k(3, 1), complex(3.0));
    EXPECT_EQ(k(2, 1), complex(0.0));
}
