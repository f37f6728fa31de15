#pragma once

// Liouvillians as explicit matrices on column-stacked density matrices:
// vec(rho)[i + n*j] = rho(i, j). Every superoperator in the library uses this
// convention.

#include <cmath>
#include <functional>
#include <vector>

#include "model.hpp"
#include "numeric.hpp"

namespace rfspec {

struct Superoperator {
    std::size_t dim = 0; ///< Hilbert-space dimension n
    ComplexMatrix matrix; ///< n^2 x n^2

    ComplexMatrix apply(const ComplexMatrix &rho) const;
};

inline ComplexVector vec(const ComplexMatrix &rho) {
    const std::size_t n = rho.rows();
    ComplexVector v(n * rho.cols());
    for (std::size_t j = 0; j < rho.cols(); ++j)
        for (std::size_t i = 0; i < n; ++i)
            v[i + n * j] = rho(i, j);
    return v;
}

inline ComplexMatrix unvec(const ComplexVector &v, std::size_t n) {
    if (v.size() != n * n)
        throw InvalidInput("unvec: length is not n^2");
    ComplexMatrix rho(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            rho(i, j) = v[i + n * j];
    return rho;
}

inline ComplexMatrix Superoperator::apply(const ComplexMatrix &rho) const {
    return unvec(matrix * vec(rho), dim);
}

/// Matrix of a linear map on n x n matrices, column by column.
inline Superoperator
from_map(std::size_t n,
         const std::function<ComplexMatrix(const ComplexMatrix &)> &f) {
    Superoperator s{n, ComplexMatrix(n * n, n * n)};
    for (std::size_t k = 0; k < n * n; ++k) {
        const ComplexVector col = vec(f(unvec(ComplexVector::unit(n * n, k), n)));
        for (std::size_t r = 0; r < n * n; ++r)
            s.matrix(r, k) = col[r];
    }
    return s;
}

/// Largest deviation of Tr(L[.]) from zero: the trace functional must be a
/// left null vector of a trace-preserving generator.
inline double trace_defect(const Superoperator &s) {
    double worst = 0.0;
    const std::size_t n = s.dim;
    for (std::size_t k = 0; k < n * n; ++k) {
        complex t = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            t += s.matrix(i + n * i, k);
        worst = std::max(worst, std::abs(t));
    }
    return worst;
}

/// Operators defining a two-manifold atom: projectors on the upper and lower
/// manifolds and the three dipole lowering operators A_m, all n x n.
struct LevelStructure {
    std::size_t dim = 0;
    ComplexMatrix p_plus;
    ComplexMatrix p_minus;
    ComplexMatrix a[3]; ///< A_{-1}, A_0, A_{+1}

    const ComplexMatrix &a_m(int m) const { return a[m + 1]; }
};

/// Basis |1> = upper stretched state, |2> = lower stretched state; only the
/// circular component A_1 = sigma_- survives.
inline LevelStructure two_level_structure() {
    LevelStructure ls;
    ls.dim = 2;
    ls.p_plus = ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}};
    ls.p_minus = ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}};
    ls.a[0] = ComplexMatrix(2, 2);
    ls.a[1] = ComplexMatrix(2, 2);
    ls.a[2] = ComplexMatrix{{0.0, 0.0}, {1.0, 0.0}};
    return ls;
}

inline ComplexMatrix sigma_minus() {
    return ComplexMatrix{{0.0, 0.0}, {1.0, 0.0}};
}

/// Driven Liouvillian assembled block by block from its projections on the
/// upper and lower manifolds.
inline Superoperator assemble_block_liouvillian(const LevelStructure &ls,
                                                const ModelParams &p) {
    const DerivedParams dp = derive(p);
    const double omega = std::sqrt(p.omega2);
    const ComplexMatrix &pp = ls.p_plus;
    const ComplexMatrix &pm = ls.p_minus;
    const ComplexMatrix &a1 = ls.a_m(1);
    const ComplexMatrix l_plus =
        (-0.5 * omega * std::exp(-I * (p.laser_phase + 2.0 * p.delta_plus))) * a1;
    const ComplexMatrix l_minus =
        (-0.5 * omega * std::exp(-I * (p.laser_phase + 2.0 * p.delta_minus))) * a1;
    const ComplexMatrix l_minus_adj = l_minus.adjoint();
    const ComplexMatrix l_plus_adj = l_plus.adjoint();
    const double ss = std::sin(dp.s);
    const complex coef =
        I * (-p.z + p.omega2 * (p.epsilon - 0.25 * std::sin(2.0 * dp.s))) -
        0.5 * (1.0 + p.y + p.omega2 * (ss * ss + dp.dg_norm2));

    ComplexMatrix a_adj[3];
    for (int k = 0; k < 3; ++k)
        a_adj[k] = ls.a[k].adjoint();

    auto f = [&](const ComplexMatrix &rho) {
        const ComplexMatrix upup = pp * rho * pp;
        const ComplexMatrix updn = pp * rho * pm;
        const ComplexMatrix dnup = pm * rho * pp;
        const ComplexMatrix dndn = pm * rho * pm;

        ComplexMatrix out = complex(-1.0) * upup;
        out -= l_minus_adj * dnup;
        out -= updn * l_minus;

        for (int k = 0; k < 3; ++k)
            out += ls.a[k] * upup * a_adj[k];
        out += l_minus * updn;
        out += dnup * l_minus_adj;

        // lower-upper coherence block and its adjoint partner
        out += l_plus * upup;
        out -= dndn * l_minus;
        out += coef * dnup;
        out += upup * l_plus_adj;
        out -= l_minus_adj * dndn;
        out += std::conj(coef) * updn;
        return out;
    };
    return from_map(ls.dim, f);
}

/// The same generator written as Hamiltonian plus Lindblad dissipators.
inline Superoperator assemble_lindblad_liouvillian(const LevelStructure &ls,
                                                   const ModelParams &p) {
    const DerivedParams dp = derive(p);
    const double omega = std::sqrt(p.omega2);
    const ComplexMatrix &pp = ls.p_plus;
    const ComplexMatrix &pm = ls.p_minus;
    const ComplexMatrix sz = pp - pm;

    const complex shift_phase = std::exp(-I * dp.s) * std::sin(p.delta_plus) *
                                std::sin(p.delta_minus) + p.g_inner;
    const double level_shift =
        p.omega2 * (p.epsilon - 0.25 * std::sin(2.0 * dp.s)) -
        p.omega2 * shift_phase.imag();
    const ComplexMatrix x =
        (-0.5 * omega * std::exp(-I * p.laser_phase) *
         (1.0 + std::exp(-2.0 * I * p.delta_minus))) *
        ls.a_m(1);
    ComplexMatrix h = complex(-0.5 * p.z) * sz;
    h += (0.5 * I) * (x - x.adjoint());
    h += complex(level_shift) * pp;

    const complex lp = std::exp(I * p.laser_phase);
    std::vector<ComplexMatrix> jumps;
    jumps.push_back(ls.a_m(-1));
    jumps.push_back(ls.a_m(0));
    jumps.push_back(ls.a_m(1) +
                    (omega * lp) *
                        (-I * std::exp(I * p.delta_plus) * std::sin(p.delta_plus) * pp -
                         I * std::exp(I * p.delta_minus) * std::sin(p.delta_minus) * pm));
    const double gp = std::sqrt(p.g_plus_norm2);
    complex gm1, gm2;
    if (gp > 0.0) {
        gm1 = p.g_inner / gp;
        gm2 = std::sqrt(std::max(p.g_minus_norm2 - std::norm(gm1), 0.0));
    } else {
        gm1 = std::sqrt(p.g_minus_norm2);
        gm2 = 0.0;
    }
    jumps.push_back((omega * lp) * (gp * pp + gm1 * pm));
    jumps.push_back((omega * lp) * (gm2 * pm));

    auto f = [&](const ComplexMatrix &rho) {
        ComplexMatrix out = complex(0.0, -1.0) * (h * rho - rho * h);
        for (const auto &d : jumps) {
            const ComplexMatrix dd = d.adjoint();
            const ComplexMatrix ddd = dd * d;
            out += d * rho * dd;
            out -= complex(0.5) * (ddd * rho + rho * ddd);
        }
        out += complex(0.25 * p.y) * (sz * rho * sz - rho);
        return out;
    };
    return from_map(ls.dim, f);
}

inline Superoperator build_liouvillian_2lvl(const ModelParams &p) {
    require_valid(p);
    return assemble_block_liouvillian(two_level_structure(), p);
}

/// Adds the bandwidth term -y P+ rho P- + y P- rho P+ of the spectrum
/// generator to a Liouvillian.
inline Superoperator add_bandwidth_term(const Superoperator &lb,
                                        const LevelStructure &ls, double y) {
    Superoperator k = lb;
    k.matrix += from_map(ls.dim, [&](const ComplexMatrix &rho) {
                    return complex(-y) * (ls.p_plus * rho * ls.p_minus) +
                           complex(y) * (ls.p_minus * rho * ls.p_plus);
                }).matrix;
    return k;
}

inline Superoperator build_K_super(const ModelParams &p) {
    return add_bandwidth_term(build_liouvillian_2lvl(p), two_level_structure(),
                              p.y);
}

/// Unit-trace fixed point of L from its one-dimensional null space.
inline ComplexMatrix steady_state_super(const Superoperator &l) {
    const NullVector nv = null_vector(l.matrix);
    if (!(nv.next > 1e6 * nv.smallest))
        throw NonUniqueSteadyState(
            "singular values " + std::to_string(nv.smallest) + " and " +
            std::to_string(nv.next) + " are not separated by 1e6");
    ComplexMatrix rho = unvec(nv.vector, l.dim);
    const complex tr = rho.trace();
    if (std::abs(tr) < 1e-300)
        throw NonUniqueSteadyState("null vector has zero trace");
    rho *= 1.0 / tr;
    // symmetrize away roundoff so the result is Hermitian to machine precision
    ComplexMatrix herm = complex(0.5) * (rho + rho.adjoint());
    return herm;
}

/// exp(L t) applied to rho0.
inline ComplexMatrix propagate(const Superoperator &l, const ComplexMatrix &rho0,
                               double t) {
    if (!(t >= 0.0))
        throw InvalidInput("propagate: t must be non-negative");
    return unvec(semigroup(l.matrix, t) * vec(rho0), l.dim);
}

/// Value of sum_k Tr{X_k^dag (q - K)^{-1}[X_k rho]} for a set of emission
/// operators; the spectrum is (1/2pi) * 2 Re of it.
inline complex correlation_resolvent(const Superoperator &k,
                                     const ComplexMatrix &rho,
                                     const std::vector<ComplexMatrix> &ops,
                                     complex q) {
    const std::size_t n2 = k.matrix.rows();
    ComplexMatrix r = complex(-1.0) * k.matrix;
    for (std::size_t i = 0; i < n2; ++i)
        r(i, i) += q;
    const LuFactorization lu(std::move(r));
    complex total = 0.0;
    for (const auto &xop : ops) {
        const ComplexMatrix y = unvec(lu.solve(vec(xop * rho)), k.dim);
        total += (xop.adjoint() * y).trace();
    }
    return total;
}

/// sum_k Tr{X_k^dag exp(K t)[X_k rho]}; the time-domain counterpart of
/// correlation_resolvent.
inline complex correlation_at(const Superoperator &k, const ComplexMatrix &rho,
                              const std::vector<ComplexMatrix> &ops, double t) {
    const ComplexMatrix e = semigroup(k.matrix, t);
    complex total = 0.0;
    for (const auto &xop : ops) {
        const ComplexMatrix y = unvec(e * vec(xop * rho), k.dim);
        total += (xop.adjoint() * y).trace();
    }
    return total;
}

/// Two-dimensional vectors with the Gram data of (g+, g-): g+ on the first
/// axis, g- completed by Cholesky.
struct GramRealization {
    complex g_plus[2];
    complex g_minus[2];
};

inline GramRealization realize_gram(const ModelParams &p) {
    GramRealization r{};
    if (std::norm(p.g_inner) > p.g_plus_norm2 * p.g_minus_norm2 * (1.0 + 1e-12) +
                                   1e-300)
        throw GramNotRealizable("|<g+|g->|^2 exceeds |g+|^2 |g-|^2");
    const double a = std::sqrt(std::max(p.g_plus_norm2, 0.0));
    if (a > 0.0) {
        r.g_plus[0] = a;
        r.g_minus[0] = p.g_inner / a;
        r.g_minus[1] =
            std::sqrt(std::max(p.g_minus_norm2 - std::norm(r.g_minus[0]), 0.0));
    } else {
        r.g_minus[0] = std::sqrt(std::max(p.g_minus_norm2, 0.0));
    }
    return r;
}

/// Emission operators of the two-level reduction, scaled by Omega: the dipole
/// channel with its direct-scattering phases and one operator per abstract
/// axis of the direct-scattering amplitudes.
inline std::vector<ComplexMatrix> emission_operators(const ModelParams &p,
                                                     const GramRealization &g) {
    const LevelStructure ls = two_level_structure();
    const double omega = std::sqrt(p.omega2);
    std::vector<ComplexMatrix> ops;
    ops.push_back(std::exp(-I * p.laser_phase) * sigma_minus() -
                  (I * omega * std::exp(I * p.delta_plus) * std::sin(p.delta_plus)) *
                      ls.p_plus -
                  (I * omega * std::exp(I * p.delta_minus) * std::sin(p.delta_minus)) *
                      ls.p_minus);
    for (int a = 0; a < 2; ++a)
        ops.push_back(complex(omega) * (g.g_plus[a] * ls.p_plus + g.g_minus[a] * ls.p_minus));
    return ops;
}

inline complex spectral_q(const ModelParams &p, double x) {
    return complex(0.5 * (p.gamma + p.y), x - p.z);
}

struct OracleResult {
    double sigma = 0.0;
    complex bracket{}; ///< complex sum before adding the conjugate
};

/// Total spectrum from explicit superoperators: steady state from the null
/// space of L_B, resolvent of the spectrum generator by a dense solve.
inline OracleResult sigma_oracle_detail(const ModelParams &p, double x) {
    require_valid(p);
    const LevelStructure ls = two_level_structure();
    const Superoperator lb = assemble_block_liouvillian(ls, p);
    const Superoperator k = add_bandwidth_term(lb, ls, p.y);
    const ComplexMatrix rho = steady_state_super(lb);
    const auto ops = emission_operators(p, realize_gram(p));
    const complex q = spectral_q(p, x);
    OracleResult r;
    r.bracket = correlation_resolvent(k, rho, ops, q);
    r.sigma = r.bracket.real() / pi;
    return r;
}

inline double sigma_oracle(const ModelParams &p, double x) {
    return sigma_oracle_detail(p, x).sigma;
}

/// Choi matrix sum_ij |i><j| (x) L(|i><j|) of a superoperator.
inline ComplexMatrix choi_matrix(const Superoperator &l) {
    const std::size_t n = l.dim;
    ComplexMatrix c(n * n, n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t m = 0; m < n; ++m)
                    c(i * n + k, j * n + m) = l.matrix(k + n * m, i + n * j);
    return c;
}

/// Hermitian part of the Choi matrix projected on the complement of the
/// maximally entangled vector. For a generator this is the Kossakowski
/// matrix of its dissipative part; a Hamiltonian commutator contributes
/// nothing to it.
inline ComplexMatrix gks_matrix(const Superoperator &l) {
    const std::size_t n = l.dim;
    const std::size_t n2 = n * n;
    const ComplexMatrix c = choi_matrix(l);
    ComplexMatrix proj = ComplexMatrix::identity(n2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            proj(i * n + i, j * n + j) -= 1.0 / static_cast<double>(n);
    const ComplexMatrix m = proj * c * proj;
    return complex(0.5) * (m + m.adjoint());
}

namespace detail {

inline double min_hermitian_eigenvalue(const ComplexMatrix &h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(h),
                                                            Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NoConvergence("Hermitian eigenvalue iteration did not converge");
    return solver.eigenvalues()(0);
}

} // namespace detail

/// Most negative eigenvalue among the Kossakowski matrix and the
/// anti-Hermitian part of the Choi matrix (i(C - C^dag)/2). A Lindblad
/// generator gives a non-negative Kossakowski matrix and a Hermitian Choi
/// matrix, so the result is zero up to roundoff; a map that fails to
/// preserve Hermiticity or positivity yields a negative value.
inline double cp_check(const Superoperator &l) {
    detail::require_square(l.matrix, "cp_check");
    const double k_min = detail::min_hermitian_eigenvalue(gks_matrix(l));
    const ComplexMatrix c = choi_matrix(l);
    const ComplexMatrix anti = complex(0.0, 0.5) * (c - c.adjoint());
    const double a_min = detail::min_hermitian_eigenvalue(anti);
    return std::min(k_min, a_min);
}

} // namespace rfspec
