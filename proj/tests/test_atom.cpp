#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "rfspec/atom.hpp"
#include "rfspec/superop.hpp"

using namespace rfspec;

namespace {

// Coupled states |J M> in the product basis |j1 m1>|j2 m2>, built from the
// top state with the lowering operator and Gram-Schmidt; the sign follows
// Condon-Shortley (<j1 j1; j2 J-j1 | J J> > 0). Quantum numbers are twice
// their values. Returns coefficients keyed by (J, M, m1).
std::map<std::array<int, 3>, double> coupled_states(int j1, int j2) {
    auto lower_coef = [](int j, int m) {
        return std::sqrt(0.25 * (j * (j + 2) - m * (m - 2)));
    };
    std::map<std::array<int, 3>, double> out;
    for (int jj = j1 + j2; jj >= std::abs(j1 - j2); jj -= 2) {
        // top state: orthogonal to all higher-J states with M = J
        std::map<int, double> top;
        const int mm = jj;
        for (int m1 = -j1; m1 <= j1; m1 += 2) {
            const int m2 = mm - m1;
            if (std::abs(m2) <= j2)
                top[m1] = 0.0;
        }
        bool found = false;
        for (auto &[seed, unused] : top) {
            std::map<int, double> v;
            for (auto &[m1, c] : top)
                v[m1] = m1 == seed ? 1.0 : 0.0;
            for (int jh = j1 + j2; jh > jj; jh -= 2) {
                double dot = 0.0;
                for (auto &[m1, c] : v)
                    dot += out[{jh, mm, m1}] * c;
                for (auto &[m1, c] : v)
                    c -= dot * out[{jh, mm, m1}];
            }
            double norm = 0.0;
            for (auto &[m1, c] : v)
                norm += c * c;
            if (norm < 1e-8)
                continue;
            const double sgn = v.count(j1) && v[j1] < 0.0 ? -1.0 : 1.0;
            for (auto &[m1, c] : v)
                out[{jj, mm, m1}] = sgn * c / std::sqrt(norm);
            found = true;
            break;
        }
        EXPECT_TRUE(found);
        for (int m = jj; m > -jj; m -= 2) {
            std::map<int, double> next;
            for (int m1 = -j1; m1 <= j1; m1 += 2) {
                const int m2 = m - m1;
                if (std::abs(m2) > j2)
                    continue;
                const double c = out[{jj, m, m1}];
                if (m1 - 2 >= -j1)
                    next[m1 - 2] += c * lower_coef(j1, m1);
                if (m2 - 2 >= -j2)
                    next[m1] += c * lower_coef(j2, m2);
            }
            const double scale = lower_coef(jj, m);
            for (auto &[m1, c] : next)
                out[{jj, m - 2, m1}] = c / scale;
        }
    }
    return out;
}

} // namespace

TEST(ClebschGordan, KnownValues) {
    EXPECT_NEAR(cg_coefficient_twice(4, 4, 2, 2, 6, 6), 1.0, 1e-15);
    EXPECT_NEAR(cg_coefficient_twice(4, 4, 2, 0, 6, 4), std::sqrt(1.0 / 3.0), 1e-15);
    EXPECT_NEAR(cg_coefficient(HalfInt::integer(2), HalfInt::integer(2), HalfInt::integer(1),
                               HalfInt::integer(0), HalfInt::integer(3), HalfInt::integer(2)),
                std::sqrt(1.0 / 3.0), 1e-15);
    // <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt(2)
    EXPECT_NEAR(cg_coefficient_twice(1, 1, 1, -1, 0, 0), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(cg_coefficient_twice(1, -1, 1, 1, 0, 0), -std::sqrt(0.5), 1e-15);
}

TEST(ClebschGordan, SelectionRulesGiveZero) {
    EXPECT_EQ(cg_coefficient_twice(4, 4, 2, 0, 6, 2), 0.0);
    EXPECT_EQ(cg_coefficient_twice(4, 0, 2, 0, 10, 0), 0.0);
    EXPECT_THROW(cg_coefficient_twice(4, 6, 2, 0, 6, 6), InvalidQuantumNumbers);
    EXPECT_THROW(cg_coefficient_twice(4, 1, 2, 1, 6, 2), InvalidQuantumNumbers);
    EXPECT_THROW(cg_coefficient_twice(-2, 0, 2, 0, 2, 0), InvalidQuantumNumbers);
}

TEST(ClebschGordan, MatchesLoweringOperatorConstruction) {
    for (int j1 : {0, 1, 2, 3, 4, 5})
        for (int j2 : {1, 2, 3}) {
            const auto states = coupled_states(j1, j2);
            for (const auto &[key, c] : states) {
                const int jj = key[0], mm = key[1], m1 = key[2];
                EXPECT_NEAR(cg_coefficient_twice(j1, m1, j2, mm - m1, jj, mm), c, 1e-12)
                    << j1 << " " << j2 << " " << jj << " " << mm << " " << m1;
            }
        }
}

TEST(ClebschGordan, Orthonormality) {
    for (int j1 : {1, 2, 4})
        for (int j2 : {1, 2}) {
            for (int ja = std::abs(j1 - j2); ja <= j1 + j2; ja += 2)
                for (int jb = std::abs(j1 - j2); jb <= j1 + j2; jb += 2)
                    for (int ma = -ja; ma <= ja; ma += 2)
                        for (int mb = -jb; mb <= jb; mb += 2) {
                            double s = 0.0;
                            for (int m1 = -j1; m1 <= j1; m1 += 2)
                                for (int m2 = -j2; m2 <= j2; m2 += 2)
                                    s += cg_coefficient_twice(j1, m1, j2, m2, ja, ma) *
                                         cg_coefficient_twice(j1, m1, j2, m2, jb, mb);
                            EXPECT_NEAR(s, (ja == jb && ma == mb) ? 1.0 : 0.0, 1e-12);
                        }
        }
}

TEST(DecayOperators, SingletLowerLevel) {
    const AtomLevels lv(HalfInt::integer(0));
    const DecayOperators ops = build_decay_operators(lv);
    EXPECT_EQ(lv.dim(), 4u);
    for (int m = -1; m <= 1; ++m) {
        const ComplexMatrix &a = ops.a_m(m);
        EXPECT_NEAR(std::abs(a(0, lv.upper_index(2 * m)) - 1.0), 0.0, 1e-15);
        EXPECT_NEAR(a.max_abs(), 1.0, 1e-15);
        double total = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                total += std::abs(a(i, j));
        EXPECT_NEAR(total, 1.0, 1e-15);
    }
}

TEST(DecayOperators, CompletenessAndSelectionRule) {
    for (int tf : {0, 1, 2, 4}) {
        const AtomLevels lv(HalfInt::from_twice(tf));
        const LevelStructure ls = level_structure(lv);
        ComplexMatrix sum(lv.dim(), lv.dim());
        for (int m = -1; m <= 1; ++m)
            sum += ls.a_m(m).adjoint() * ls.a_m(m);
        EXPECT_LE((sum - ls.p_plus).max_abs(), 1e-12);
        for (int m = -1; m <= 1; ++m)
            for (int m1 = -tf; m1 <= tf; m1 += 2)
                for (int mu = -tf - 2; mu <= tf + 2; mu += 2)
                    if (mu != m1 + 2 * m) {
                        EXPECT_EQ(ls.a_m(m)(lv.lower_index(m1), lv.upper_index(mu)),
                                  complex(0.0));
                    }
        EXPECT_NEAR(std::abs(ls.a_m(1)(lv.lower_stretched(), lv.upper_stretched()) - 1.0), 0.0,
                    1e-14);
    }
}

TEST(AtomLevels, Indexing) {
    const AtomLevels lv;
    EXPECT_EQ(lv.f_minus.twice, 4);
    EXPECT_EQ(lv.f_plus().twice, 6);
    EXPECT_EQ(lv.dim(), 12u);
    EXPECT_EQ(lv.lower_stretched(), 4u);
    EXPECT_EQ(lv.upper_stretched(), 11u);
    EXPECT_THROW(lv.lower_index(6), InvalidQuantumNumbers);
    EXPECT_THROW(AtomLevels(HalfInt::from_twice(-1)), InvalidQuantumNumbers);
}

TEST(VacuumLiouvillian, UpperPopulationDecays) {
    for (int tf : {0, 1, 4}) {
        const AtomLevels lv(HalfInt::from_twice(tf));
        const Superoperator l = build_vacuum_liouvillian(lv, 0.7);
        EXPECT_LE(trace_defect(l), 1e-12);
        const std::size_t n = lv.dim();
        ComplexMatrix rho(n, n);
        // a coherent upper-level superposition plus some lower population
        for (std::size_t i = lv.dim_lower(); i < n; ++i)
            for (std::size_t j = lv.dim_lower(); j < n; ++j)
                rho(i, j) = 0.6 / static_cast<double>(lv.dim_upper());
        rho(0, 0) = 0.4;
        const LevelStructure ls = level_structure(lv);
        for (double t : {0.5, 2.0, 7.0}) {
            const ComplexMatrix r = propagate(l, rho, t);
            EXPECT_NEAR((ls.p_plus * r).trace().real(), 0.6 * std::exp(-t), 1e-10);
            EXPECT_NEAR(r.trace().real(), 1.0, 1e-12);
        }
    }
}

TEST(VacuumLiouvillian, BranchingToLowerSublevels) {
    const AtomLevels lv;
    const Superoperator l = build_vacuum_liouvillian(lv);
    const int fm = 4, fp = 6;
    for (int mu = -fp; mu <= fp; mu += 2) {
        ComplexMatrix rho(lv.dim(), lv.dim());
        rho(lv.upper_index(mu), lv.upper_index(mu)) = 1.0;
        const ComplexMatrix r = propagate(l, rho, 60.0);
        for (int m1 = -fm; m1 <= fm; m1 += 2) {
            const int m = (mu - m1) / 2;
            const double w =
                std::abs(m) <= 1 ? std::pow(cg_coefficient_twice(fm, m1, 2, 2 * m, fp, mu), 2)
                                 : 0.0;
            EXPECT_NEAR(r(lv.lower_index(m1), lv.lower_index(m1)).real(), w, 1e-12);
        }
    }
}

TEST(DrivenLiouvillian, RestrictionIsTwoLevelModel) {
    for (int tf : {0, 1, 2, 4}) {
        const AtomLevels lv(HalfInt::from_twice(tf));
        for (const ModelParams &p : {presets::usual(0.0, 0.0), presets::modified(2.5, 1.0)}) {
            const Superoperator full = build_driven_liouvillian(lv, p);
            EXPECT_LE(trace_defect(full), 1e-12);
            const Superoperator r =
                restrict_superoperator(full, {lv.upper_stretched(), lv.lower_stretched()});
            EXPECT_LE((r.matrix - build_liouvillian_2lvl(p).matrix).max_abs(), 1e-12);
        }
    }
}

TEST(DrivenLiouvillian, LindbladFormOnFullSpace) {
    for (int tf : {0, 2}) {
        const AtomLevels lv(HalfInt::from_twice(tf));
        const ModelParams p = presets::modified(-2.5, 0.5);
        const LevelStructure ls = level_structure(lv);
        const Superoperator a = assemble_block_liouvillian(ls, p);
        const Superoperator b = assemble_lindblad_liouvillian(ls, p);
        const Superoperator r = restrict_superoperator(a, {lv.upper_stretched(), lv.lower_stretched()});
        const Superoperator rb =
            restrict_superoperator(b, {lv.upper_stretched(), lv.lower_stretched()});
        EXPECT_LE((r.matrix - rb.matrix).max_abs(), 1e-12);
    }
}

TEST(DrivenLiouvillian, NoDriveIsVacuum) {
    const AtomLevels lv;
    ModelParams p = presets::modified(1.7, 0.0);
    p.omega2 = 0.0;
    const Superoperator driven = build_driven_liouvillian(lv, p);
    const Superoperator vacuum = build_vacuum_liouvillian(lv, -p.z);
    EXPECT_LE((driven.matrix - vacuum.matrix).max_abs(), 1e-12);
}

TEST(FullSteadyState, SupportedOnStretchedStates) {
    for (int tf : {4, 0}) {
        const AtomLevels lv(HalfInt::from_twice(tf));
        for (const ModelParams &p : {presets::usual(0.0, 0.0), presets::modified(2.5, 1.0)}) {
            const FullSteadyState st = steady_state_full(lv, p);
            EXPECT_LT(st.off_extreme_population, 1e-8);
            EXPECT_LE((st.extreme_block - steady_state(p).rho_inf).max_abs(), 1e-8);
            EXPECT_LE(st.convergence, 1e-10);
        }
    }
    ModelParams dark = presets::usual(0.0, 0.0);
    dark.omega2 = 0.0;
    EXPECT_THROW(steady_state_full(AtomLevels(), dark), InvalidInput);
}
