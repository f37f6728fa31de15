#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rfspec/spectrum.hpp"
#include "rfspec/superop.hpp"
#include "test_support.hpp"

using namespace rfspec;

namespace {

ComplexMatrix excited() { return ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}; }
ComplexMatrix ground() { return ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}}; }

ModelParams no_drive() {
    ModelParams p = presets::usual(0.0, 0.0);
    p.omega2 = 0.0;
    return p;
}

} // namespace

TEST(Vectorization, ColumnStacking) {
    const ComplexMatrix r{{1.0, 2.0}, {3.0, 4.0}};
    const ComplexVector v = vec(r);
    EXPECT_EQ(v[0], complex(1.0));
    EXPECT_EQ(v[1], complex(3.0));
    EXPECT_EQ(v[2], complex(2.0));
    EXPECT_EQ(v[3], complex(4.0));
    EXPECT_EQ((unvec(v, 2) - r).max_abs(), 0.0);
    EXPECT_THROW(unvec(v, 3), InvalidInput);
}

TEST(Liouvillian, PureDecay) {
    const Superoperator l = build_liouvillian_2lvl(no_drive());
    // d rho11 / dt = -rho11
    EXPECT_EQ(l.matrix(0, 0), complex(-1.0));
    EXPECT_EQ(l.matrix(3, 0), complex(1.0));
    EXPECT_LE(trace_defect(l), 1e-12);
}

TEST(Liouvillian, TracePreservingAndFixedPoint) {
    const ModelParams p = presets::modified(0.0, 0.5);
    const Superoperator l = build_liouvillian_2lvl(p);
    EXPECT_LE(trace_defect(l), 1e-12);
    const ComplexMatrix rho = steady_state(p).rho_inf;
    EXPECT_LE(l.apply(rho).max_abs(), 1e-11);
}

TEST(Liouvillian, FixedPointOverRandomParameters) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const ModelParams p = fixtures::random_params(rng);
        const Superoperator l = build_liouvillian_2lvl(p);
        EXPECT_LE(trace_defect(l), 1e-12);
        EXPECT_LE(l.apply(steady_state(p).rho_inf).max_abs(), 1e-11);
    }
}

TEST(Liouvillian, BlockAndLindbladFormsAgree) {
    std::mt19937_64 rng(6);
    std::vector<ModelParams> sets = fixtures::figure_sets();
    for (int i = 0; i < 200; ++i)
        sets.push_back(fixtures::random_params(rng));
    const LevelStructure ls = two_level_structure();
    for (const ModelParams &p : sets) {
        const Superoperator a = assemble_block_liouvillian(ls, p);
        const Superoperator b = assemble_lindblad_liouvillian(ls, p);
        EXPECT_LE((a.matrix - b.matrix).max_abs(), 1e-12);
    }
}

TEST(SpectrumGenerator, ZeroBandwidthEqualsLiouvillian) {
    const ModelParams p = presets::modified(2.5, 0.0);
    EXPECT_EQ((build_K_super(p).matrix - build_liouvillian_2lvl(p).matrix).max_abs(), 0.0);
}

TEST(SpectrumGenerator, TracePreserving) {
    for (double y : {0.5, 4.0, 50.0})
        EXPECT_LE(trace_defect(build_K_super(presets::modified(-2.5, y))), 1e-12);
}

// The spectrum generator is not a contraction in general: at zero drive
// the coherence mode rho_21 grows at rate (y - 1)/2 when y > 1. What the
// resolvent needs is Re lambda < Re q = (gamma + y)/2 for every eigenvalue.
TEST(SpectrumGenerator, ResolventBelowSpectralAbscissa) {
    std::mt19937_64 rng(8);
    std::vector<ModelParams> sets = fixtures::figure_sets();
    for (int i = 0; i < 200; ++i)
        sets.push_back(fixtures::random_params(rng));
    for (const ModelParams &p : sets) {
        for (complex lambda : eigvals(build_K_super(p).matrix))
            EXPECT_LT(lambda.real(), 0.5 * (p.gamma + p.y));
    }
    for (const ModelParams &p : fixtures::figure_sets())
        if (p.z == 0.0) {
            for (complex lambda : eigvals(build_K_super(p).matrix))
                EXPECT_LE(lambda.real(), 1e-12);
        }
    ModelParams growing = no_drive();
    growing.y = 3.0;
    const auto ev = eigvals(build_K_super(growing).matrix);
    EXPECT_NEAR(ev.back().real(), 1.0, 1e-12);
}

TEST(SteadyStateSuper, GroundStateWithoutDrive) {
    const ComplexMatrix rho = steady_state_super(build_liouvillian_2lvl(no_drive()));
    EXPECT_LE((rho - ground()).max_abs(), 1e-14);
}

TEST(SteadyStateSuper, MatchesClosedForm) {
    const ModelParams p = presets::modified(0.0, 0.5);
    const ComplexMatrix rho = steady_state_super(build_liouvillian_2lvl(p));
    EXPECT_LE((rho - steady_state(p).rho_inf).max_abs(), 1e-10);
    EXPECT_LE((rho - rho.adjoint()).max_abs(), 1e-12);
    const ComplexMatrix u =
        steady_state_super(build_liouvillian_2lvl(presets::usual(0.0, 0.0)));
    EXPECT_NEAR(u(0, 0).real(), 28.0 / 57.0, 1e-12);
}

TEST(SteadyStateSuper, DegenerateNullSpace) {
    Superoperator zero{2, ComplexMatrix(4, 4)};
    EXPECT_THROW(steady_state_super(zero), NonUniqueSteadyState);
}

TEST(Propagate, Basics) {
    const Superoperator l = build_liouvillian_2lvl(no_drive());
    EXPECT_LE((propagate(l, excited(), 0.0) - excited()).max_abs(), 0.0);
    for (double t : {0.5, 1.0, 3.0, 10.0}) {
        const ComplexMatrix r = propagate(l, excited(), t);
        EXPECT_NEAR(r(0, 0).real(), std::exp(-t), 1e-10);
        EXPECT_NEAR(std::abs(r.trace() - 1.0), 0.0, 1e-12);
    }
    const ModelParams p = presets::modified(2.5, 1.0);
    const Superoperator lb = build_liouvillian_2lvl(p);
    const ComplexMatrix late = propagate(lb, excited(), 200.0);
    EXPECT_LE((late - steady_state_super(lb)).max_abs(), 1e-10);
    EXPECT_THROW(propagate(lb, excited(), -1.0), InvalidInput);
}

TEST(CpCheck, LiouvillianIsCompletelyPositive) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i)
        EXPECT_GE(cp_check(build_liouvillian_2lvl(fixtures::random_params(rng))), -1e-10);
    for (const ModelParams &p : fixtures::figure_sets())
        EXPECT_GE(cp_check(build_liouvillian_2lvl(p)), -1e-10);
}

TEST(CpCheck, SpectrumGeneratorFails) {
    EXPECT_LT(cp_check(build_K_super(presets::usual(0.0, 4.0))), -1e-6);
    EXPECT_LT(cp_check(build_K_super(presets::modified(0.0, 4.0))), -1e-6);
}

TEST(CpCheck, PureDecayKossakowskiMatrix) {
    const Superoperator l = build_liouvillian_2lvl(no_drive());
    const auto ev = eigvals(gks_matrix(l));
    ASSERT_EQ(ev.size(), 4u);
    EXPECT_NEAR(ev[0].real(), 0.0, 1e-14);
    EXPECT_NEAR(ev[1].real(), 0.0, 1e-14);
    EXPECT_NEAR(ev[2].real(), 0.0, 1e-14);
    EXPECT_NEAR(ev[3].real(), 1.0, 1e-14);
}

TEST(CpCheck, HamiltonianIsInvisible) {
    const ComplexMatrix h{{0.3, complex(1.0, -2.0)}, {complex(1.0, 2.0), -0.7}};
    const Superoperator l = from_map(
        2, [&](const ComplexMatrix &r) { return complex(0.0, -1.0) * (h * r - r * h); });
    EXPECT_LE(gks_matrix(l).max_abs(), 1e-14);
    EXPECT_GE(cp_check(l), -1e-14);
}

TEST(Oracle, MatchesClosedFormOnFigureSets) {
    const double frozen[][3] = {
        {0.03920074870199841, 0.11289275762950318, 0.018304566987780626},
        {0.03649309692579021, 0.09581715923408891, 0.02510370514533842},
        {0.012360041416726935, 0.03780942396697845, 0.03770139772291929},
        {0.056756972280249396, 0.04575872465085823, 0.03477791660287403},
        {0.013270477258746643, 0.017673425672320827, 0.028710708220839688},
    };
    const ModelParams sets[] = {presets::usual(0.0, 0.0), presets::modified(0.0, 0.5),
                                presets::modified(2.5, 1.0), presets::modified(-2.5, 4.0),
                                presets::usual(-2.5, 0.5)};
    const double xs[] = {-5.3, 0.0, 2.5};
    for (int s = 0; s < 5; ++s)
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(sigma_oracle(sets[s], xs[i]), frozen[s][i], 1e-12);
            EXPECT_NEAR(sigma_total(sets[s], xs[i]), frozen[s][i], 1e-12);
        }
}

TEST(Oracle, LaserPhaseIsGauge) {
    ModelParams p = presets::modified(2.5, 1.0);
    const double ref = sigma_oracle(p, 1.7);
    for (double phase : {1.0, 2.5}) {
        p.laser_phase = phase;
        EXPECT_NEAR(sigma_oracle(p, 1.7), ref, 1e-12);
    }
}

TEST(Oracle, RealizationIndependent) {
    // Any unitary rotation of the abstract axes leaves the traces unchanged.
    const ModelParams p = presets::modified(-2.5, 0.5);
    const LevelStructure ls = two_level_structure();
    const Superoperator lb = assemble_block_liouvillian(ls, p);
    const Superoperator k = add_bandwidth_term(lb, ls, p.y);
    const ComplexMatrix rho = steady_state_super(lb);
    const GramRealization g = realize_gram(p);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
    for (int trial = 0; trial < 5; ++trial) {
        const double th = u(rng), a = u(rng), b = u(rng);
        const complex m00 = std::exp(I * a) * std::cos(th);
        const complex m01 = -std::exp(I * b) * std::sin(th);
        const complex m10 = std::exp(-I * b) * std::sin(th);
        const complex m11 = std::exp(-I * a) * std::cos(th);
        GramRealization r;
        r.g_plus[0] = m00 * g.g_plus[0] + m01 * g.g_plus[1];
        r.g_plus[1] = m10 * g.g_plus[0] + m11 * g.g_plus[1];
        r.g_minus[0] = m00 * g.g_minus[0] + m01 * g.g_minus[1];
        r.g_minus[1] = m10 * g.g_minus[0] + m11 * g.g_minus[1];
        for (double x : {-4.0, 0.3, 6.0}) {
            const complex q = spectral_q(p, x);
            const double a1 = correlation_resolvent(k, rho, emission_operators(p, g), q).real();
            const double a2 = correlation_resolvent(k, rho, emission_operators(p, r), q).real();
            EXPECT_NEAR(a1 / pi, a2 / pi, 1e-12);
        }
    }
}

TEST(Oracle, TimeDomainResolventIdentity) {
    const ModelParams p = presets::modified(0.0, 1.0);
    const LevelStructure ls = two_level_structure();
    const Superoperator lb = assemble_block_liouvillian(ls, p);
    const Superoperator k = add_bandwidth_term(lb, ls, p.y);
    const ComplexMatrix rho = steady_state_super(lb);
    const auto ops = emission_operators(p, realize_gram(p));
    for (double x : {-6.0, 0.0, 5.0}) {
        const complex q = spectral_q(p, x);
        const double resolvent = correlation_resolvent(k, rho, ops, q).real() / pi;
        const double quad = integrate_adaptive(
            [&](double t) {
                return (std::exp(-q * t) * correlation_at(k, rho, ops, t)).real() / pi;
            },
            0.0, 200.0, 1e-10);
        EXPECT_NEAR(quad, resolvent, 1e-6 * std::abs(resolvent));
    }
}

TEST(Oracle, NoDriveGivesZero) {
    ModelParams p = presets::modified(1.0, 1.0);
    p.omega2 = 0.0;
    EXPECT_EQ(sigma_oracle(p, 0.5), 0.0);
}

TEST(Gram, RealizationReproducesGramData) {
    const ModelParams p = presets::modified(0.0, 0.0);
    const GramRealization g = realize_gram(p);
    auto inner = [](const complex *a, const complex *b) {
        return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
    };
    EXPECT_NEAR(std::abs(inner(g.g_plus, g.g_plus) - p.g_plus_norm2), 0.0, 1e-16);
    EXPECT_NEAR(std::abs(inner(g.g_minus, g.g_minus) - p.g_minus_norm2), 0.0, 1e-16);
    EXPECT_NEAR(std::abs(inner(g.g_plus, g.g_minus) - p.g_inner), 0.0, 1e-16);
    ModelParams bad = p;
    bad.g_inner = 0.1;
    EXPECT_THROW(realize_gram(bad), GramNotRealizable);
}
