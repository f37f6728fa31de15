#pragma once

// Full degenerate-level atom F- -> F+ = F- + 1: Clebsch-Gordan
// coefficients, dipole decay operators and the vacuum and driven
// Liouvillians on C^{2F-+1} (+) C^{2F++1}.

#include <array>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "model.hpp"
#include "superop.hpp"

namespace rfspec {

/// Integer or half-integer quantum number, stored as twice its value.
struct HalfInt {
    int twice = 0;

    static constexpr HalfInt from_twice(int t) { return HalfInt{t}; }
    static constexpr HalfInt integer(int v) { return HalfInt{2 * v}; }
    double value() const noexcept { return 0.5 * twice; }
    bool operator==(const HalfInt &) const = default;
};

namespace detail {

inline double factorial(int n) {
    static const auto table = [] {
        std::array<double, 171> t{};
        t[0] = 1.0;
        for (int i = 1; i < 171; ++i)
            t[i] = t[i - 1] * i;
        return t;
    }();
    if (n < 0 || n > 170)
        throw InvalidQuantumNumbers("factorial argument " + std::to_string(n));
    return table[static_cast<std::size_t>(n)];
}

/// (twice value)/2 when it is an integer; throws otherwise.
inline int half(int twice, const char *what) {
    if (twice % 2 != 0)
        throw InvalidQuantumNumbers(std::string(what) + " is not an integer");
    return twice / 2;
}

} // namespace detail

/// <j1 m1; j2 m2 | J M> with the Condon-Shortley phase, by the Racah
/// formula. Arguments are given as twice their values.
inline double cg_coefficient_twice(int j1, int m1, int j2, int m2, int jj, int mm) {
    for (int j : {j1, j2, jj})
        if (j < 0)
            throw InvalidQuantumNumbers("negative angular momentum");
    if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(mm) > jj)
        throw InvalidQuantumNumbers("|m| exceeds j");
    if ((j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (jj + mm) % 2 != 0)
        throw InvalidQuantumNumbers("j and m must both be integer or both half-integer");
    if (mm != m1 + m2)
        return 0.0;
    if (jj > j1 + j2 || jj < std::abs(j1 - j2) || (j1 + j2 + jj) % 2 != 0)
        return 0.0;
    using detail::factorial;
    using detail::half;
    const int a = half(jj + j1 - j2, "J+j1-j2");
    const int b = half(jj - j1 + j2, "J-j1+j2");
    const int c = half(j1 + j2 - jj, "j1+j2-J");
    const int d = half(j1 + j2 + jj, "j1+j2+J") + 1;
    const double pre = std::sqrt((jj + 1) * factorial(a) * factorial(b) * factorial(c) /
                                 factorial(d));
    const double norm = std::sqrt(
        factorial(half(jj + mm, "J+M")) * factorial(half(jj - mm, "J-M")) *
        factorial(half(j1 - m1, "j1-m1")) * factorial(half(j1 + m1, "j1+m1")) *
        factorial(half(j2 - m2, "j2-m2")) * factorial(half(j2 + m2, "j2+m2")));
    const int k1 = c;
    const int k2 = half(j1 - m1, "j1-m1");
    const int k3 = half(j2 + m2, "j2+m2");
    const int k4 = half(jj - j2 + m1, "J-j2+m1");
    const int k5 = half(jj - j1 - m2, "J-j1-m2");
    double sum = 0.0;
    const int kmin = std::max({0, -k4, -k5});
    const int kmax = std::min({k1, k2, k3});
    for (int k = kmin; k <= kmax; ++k) {
        const double term = 1.0 / (factorial(k) * factorial(k1 - k) * factorial(k2 - k) *
                                   factorial(k3 - k) * factorial(k4 + k) * factorial(k5 + k));
        sum += (k % 2 == 0) ? term : -term;
    }
    return pre * norm * sum;
}

inline double cg_coefficient(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt jj,
                             HalfInt mm) {
    return cg_coefficient_twice(j1.twice, m1.twice, j2.twice, m2.twice, jj.twice, mm.twice);
}

/// Lower level F-, upper level F+ = F- + 1. Basis |F-, M> for increasing M,
/// followed by |F+, M> for increasing M.
struct AtomLevels {
    HalfInt f_minus;

    explicit AtomLevels(HalfInt fm = HalfInt::integer(2)) : f_minus(fm) {
        if (fm.twice < 0)
            throw InvalidQuantumNumbers("F- must be non-negative");
        if (fm.twice > 40)
            throw InvalidQuantumNumbers("F- too large for dense superoperators");
    }

    HalfInt f_plus() const noexcept { return HalfInt{f_minus.twice + 2}; }
    std::size_t dim_lower() const noexcept { return static_cast<std::size_t>(f_minus.twice + 1); }
    std::size_t dim_upper() const noexcept { return static_cast<std::size_t>(f_minus.twice + 3); }
    std::size_t dim() const noexcept { return dim_lower() + dim_upper(); }

    /// Index of |F-, M> with M given as twice its value.
    std::size_t lower_index(int twice_m) const {
        if (std::abs(twice_m) > f_minus.twice || (twice_m + f_minus.twice) % 2 != 0)
            throw InvalidQuantumNumbers("M outside the lower level");
        return static_cast<std::size_t>((twice_m + f_minus.twice) / 2);
    }
    std::size_t upper_index(int twice_m) const {
        const int fp = f_plus().twice;
        if (std::abs(twice_m) > fp || (twice_m + fp) % 2 != 0)
            throw InvalidQuantumNumbers("M outside the upper level");
        return dim_lower() + static_cast<std::size_t>((twice_m + fp) / 2);
    }
    std::size_t lower_stretched() const { return lower_index(f_minus.twice); }
    std::size_t upper_stretched() const { return upper_index(f_plus().twice); }
};

struct DecayOperators {
    ComplexMatrix a[3]; ///< A_{-1}, A_0, A_{+1} as dim x dim matrices

    const ComplexMatrix &a_m(int m) const { return a[m + 1]; }
};

/// A_m = sum_{m1} |F-, m1> <F-, m1; 1, m | F+, m1 + m> <F+, m1 + m|.
inline DecayOperators build_decay_operators(const AtomLevels &lv) {
    DecayOperators ops;
    const std::size_t n = lv.dim();
    const int fm = lv.f_minus.twice;
    const int fp = lv.f_plus().twice;
    for (int m = -1; m <= 1; ++m) {
        ComplexMatrix a(n, n);
        for (int m1 = -fm; m1 <= fm; m1 += 2) {
            const int mu = m1 + 2 * m;
            if (std::abs(mu) > fp)
                continue;
            a(lv.lower_index(m1), lv.upper_index(mu)) =
                cg_coefficient_twice(fm, m1, 2, 2 * m, fp, mu);
        }
        ops.a[m + 1] = a;
    }
    return ops;
}

inline LevelStructure level_structure(const AtomLevels &lv) {
    LevelStructure ls;
    ls.dim = lv.dim();
    ls.p_plus = ComplexMatrix(ls.dim, ls.dim);
    ls.p_minus = ComplexMatrix(ls.dim, ls.dim);
    for (std::size_t i = 0; i < lv.dim_lower(); ++i)
        ls.p_minus(i, i) = 1.0;
    for (std::size_t i = lv.dim_lower(); i < ls.dim; ++i)
        ls.p_plus(i, i) = 1.0;
    const DecayOperators ops = build_decay_operators(lv);
    for (int k = 0; k < 3; ++k)
        ls.a[k] = ops.a[k];
    return ls;
}

/// Spontaneous emission only: -(i/2) omega0 [P+ - P-, rho] - (1/2){P+, rho}
/// + sum_m A_m rho A_m^dag.
inline Superoperator build_vacuum_liouvillian(const AtomLevels &lv, double omega0 = 0.0) {
    const LevelStructure ls = level_structure(lv);
    const ComplexMatrix sz = ls.p_plus - ls.p_minus;
    ComplexMatrix a_adj[3];
    for (int k = 0; k < 3; ++k)
        a_adj[k] = ls.a[k].adjoint();
    return from_map(ls.dim, [&](const ComplexMatrix &rho) {
        ComplexMatrix out = complex(0.0, -0.5 * omega0) * (sz * rho - rho * sz);
        out -= complex(0.5) * (ls.p_plus * rho + rho * ls.p_plus);
        for (int k = 0; k < 3; ++k)
            out += ls.a[k] * rho * a_adj[k];
        return out;
    });
}

inline Superoperator build_driven_liouvillian(const AtomLevels &lv, const ModelParams &p) {
    require_valid(p);
    return assemble_block_liouvillian(level_structure(lv), p);
}

/// Restriction of a superoperator to the operators supported on the given
/// basis states.
inline Superoperator restrict_superoperator(const Superoperator &l,
                                            const std::vector<std::size_t> &states) {
    const std::size_t n = l.dim;
    const std::size_t k = states.size();
    Superoperator r{k, ComplexMatrix(k * k, k * k)};
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            for (std::size_t c = 0; c < k; ++c)
                for (std::size_t d = 0; d < k; ++d)
                    r.matrix(a + k * b, c + k * d) =
                        l.matrix(states[a] + n * states[b], states[c] + n * states[d]);
    return r;
}

struct FullSteadyState {
    ComplexMatrix rho;
    ComplexMatrix extreme_block; ///< 2x2 block on (upper stretched, lower stretched)
    double off_extreme_population = 0.0; ///< population outside the stretched pair
    double off_extreme_coherence = 0.0;  ///< largest |rho_ij| with i or j outside it
    double convergence = 0.0;            ///< max difference of the last two propagations
};

/// Equilibrium of the full driven atom by propagating the maximally mixed
/// state: first for `horizon`, then repeatedly for the total time so far,
/// until two successive states agree to 1e-12 (at most 2^12 horizons).
inline FullSteadyState steady_state_full(const AtomLevels &lv, const ModelParams &p,
                                         double horizon = 1000.0) {
    require_valid(p);
    if (!(p.omega2 > 0.0))
        throw InvalidInput("full-model steady state needs omega2 > 0");
    if (!(horizon > 0.0))
        throw InvalidInput("horizon must be positive");
    const Superoperator l = build_driven_liouvillian(lv, p);
    const std::size_t n = lv.dim();
    ComplexMatrix rho = ComplexMatrix::identity(n);
    rho *= 1.0 / static_cast<double>(n);
    ComplexMatrix u = semigroup(l.matrix, horizon);
    ComplexVector first = u * vec(rho);
    ComplexVector next = u * first;
    FullSteadyState out;
    out.convergence = (next - first).norm_inf();
    for (int k = 0; k < 12 && out.convergence > 1e-12; ++k) {
        u = u * u;
        first = next;
        next = u * first;
        out.convergence = (next - first).norm_inf();
    }
    if (out.convergence > 1e-12) {
        std::ostringstream msg;
        msg << "successive propagations differ by " << out.convergence;
        throw NonConvergence(msg.str());
    }
    const ComplexMatrix second = unvec(next, n);
    out.rho = second;
    const std::size_t up = lv.upper_stretched();
    const std::size_t lo = lv.lower_stretched();
    out.extreme_block = ComplexMatrix{{second(up, up), second(up, lo)},
                                      {second(lo, up), second(lo, lo)}};
    for (std::size_t i = 0; i < n; ++i) {
        if (i != up && i != lo)
            out.off_extreme_population += std::abs(second(i, i));
        for (std::size_t j = 0; j < n; ++j)
            if ((i != up && i != lo) || (j != up && j != lo))
                out.off_extreme_coherence = std::max(out.off_extreme_coherence,
                                                     std::abs(second(i, j)));
    }
    return out;
}

} // namespace rfspec
