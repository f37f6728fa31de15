#pragma once

// Direction- and polarization-resolved spectra. The direct-scattering
// amplitudes g_eps(theta; +-) are free functions constrained only by
// orthogonality to the dipole pattern; they are realized here as two
// orthonormal polynomial profiles in cos(theta) carrying the Gram data.

#include <cmath>
#include <string>
#include <vector>

#include "model.hpp"
#include "spectrum.hpp"
#include "superop.hpp"

namespace rfspec {

enum class Polarization { plus, minus };

/// Pair of real polynomials in c = cos(theta), one per detector
/// polarization; coefficient k multiplies c^k.
struct PolyProfile {
    std::vector<double> plus;
    std::vector<double> minus;

    double eval(Polarization pol, double c) const {
        const auto &coef = pol == Polarization::plus ? plus : minus;
        double r = 0.0;
        for (std::size_t k = coef.size(); k-- > 0;)
            r = r * c + coef[k];
        return r;
    }
};

namespace detail {

inline double poly_moment(const std::vector<double> &a, const std::vector<double> &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if ((i + j) % 2 == 0)
                s += a[i] * b[j] * 2.0 / static_cast<double>(i + j + 1);
    return s;
}

inline void axpy(std::vector<double> &y, double a, const std::vector<double> &x) {
    if (y.size() < x.size())
        y.resize(x.size(), 0.0);
    for (std::size_t k = 0; k < x.size(); ++k)
        y[k] += a * x[k];
}

} // namespace detail

/// <f|h> = 2 pi * integral over [0, pi] of sin(theta) (f+ h+ + f- h-).
inline double profile_inner(const PolyProfile &f, const PolyProfile &h) {
    return 2.0 * pi *
           (detail::poly_moment(f.plus, h.plus) + detail::poly_moment(f.minus, h.minus));
}

/// Angular shape of the dipole channel, (1 + c, -(1 - c)).
inline PolyProfile dipole_pattern() { return PolyProfile{{1.0, 1.0}, {-1.0, 1.0}}; }

inline std::vector<std::string> profile_families() { return {"polynomial", "quadratic"}; }

struct AngularProfileSet {
    std::string family;
    bool empty = true; ///< g_eps vanishes identically
    PolyProfile axes[2];
    complex u_plus[2];  ///< coefficients of g+ on the two axes
    complex u_minus[2];

    /// g_eps(theta; pol) at c = cos(theta).
    complex amplitude(int eps, Polarization pol, double c) const {
        if (empty)
            return 0.0;
        const complex *u = eps > 0 ? u_plus : u_minus;
        return u[0] * axes[0].eval(pol, c) + u[1] * axes[1].eval(pol, c);
    }
};

/// Two orthonormal profiles orthogonal to the dipole pattern, by exact
/// Gram-Schmidt on the candidate list of the family, with Cholesky
/// coefficients reproducing the Gram data of p.
inline AngularProfileSet build_profiles(const ModelParams &p,
                                        const std::string &family = "polynomial") {
    std::vector<PolyProfile> candidates;
    if (family == "polynomial") {
        candidates = {PolyProfile{{1.0}, {}}, PolyProfile{{}, {1.0}},
                      PolyProfile{{0.0, 1.0}, {}}, PolyProfile{{}, {0.0, 1.0}}};
    } else if (family == "quadratic") {
        candidates = {PolyProfile{{0.0, 0.0, 1.0}, {}}, PolyProfile{{}, {0.0, 0.0, 1.0}},
                      PolyProfile{{0.0, 0.0, 0.0, 1.0}, {}}};
    } else {
        throw InvalidInput("unknown profile family '" + family + "'");
    }
    const GramRealization g = realize_gram(p);

    AngularProfileSet set;
    set.family = family;
    std::vector<PolyProfile> basis{dipole_pattern()};
    const double dip_norm = std::sqrt(profile_inner(basis[0], basis[0]));
    for (auto &v : basis[0].plus)
        v /= dip_norm;
    for (auto &v : basis[0].minus)
        v /= dip_norm;
    for (const PolyProfile &cand : candidates) {
        if (basis.size() == 3)
            break;
        PolyProfile f = cand;
        // two passes of classical Gram-Schmidt
        for (int pass = 0; pass < 2; ++pass)
            for (const PolyProfile &b : basis) {
                const double c = profile_inner(b, f);
                detail::axpy(f.plus, -c, b.plus);
                detail::axpy(f.minus, -c, b.minus);
            }
        const double n = std::sqrt(profile_inner(f, f));
        if (n < 1e-10)
            continue;
        for (auto &v : f.plus)
            v /= n;
        for (auto &v : f.minus)
            v /= n;
        basis.push_back(f);
    }
    if (basis.size() != 3)
        throw InvalidInput("profile family '" + family + "' spans fewer than two axes");
    set.axes[0] = basis[1];
    set.axes[1] = basis[2];
    for (int a = 0; a < 2; ++a) {
        set.u_plus[a] = g.g_plus[a];
        set.u_minus[a] = g.g_minus[a];
    }
    set.empty = p.g_plus_norm2 == 0.0 && p.g_minus_norm2 == 0.0;
    return set;
}

/// Resolvent images of the three operator directions an angular emission
/// operator is built from, at one frequency.
struct AngularResolvent {
    ComplexMatrix dipole; ///< (q - K)^{-1}[X_0 rho]
    ComplexMatrix upper;  ///< (q - K)^{-1}[Omega P+ rho]
    ComplexMatrix lower;  ///< (q - K)^{-1}[Omega P- rho]
};

/// Sigma_+-(x; theta) for a fixed parameter set and profile family.
class AngularSpectrum {
  public:
    AngularSpectrum(const ModelParams &p, AngularProfileSet profiles)
        : p_(p), profiles_(std::move(profiles)) {
        require_valid(p);
        const LevelStructure ls = two_level_structure();
        const Superoperator lb = assemble_block_liouvillian(ls, p);
        k_ = add_bandwidth_term(lb, ls, p.y);
        rho_ = steady_state(p).rho_inf;
        const double omega = std::sqrt(p.omega2);
        x0_ = emission_operators(p, GramRealization{})[0];
        xp_ = complex(omega) * ls.p_plus;
        xm_ = complex(omega) * ls.p_minus;
    }

    const AngularProfileSet &profiles() const noexcept { return profiles_; }

    AngularResolvent at(double x) const {
        const std::size_t n2 = k_.matrix.rows();
        ComplexMatrix r = complex(-1.0) * k_.matrix;
        const complex q = spectral_q(p_, x);
        for (std::size_t i = 0; i < n2; ++i)
            r(i, i) += q;
        const LuFactorization lu(std::move(r));
        return {unvec(lu.solve(vec(x0_ * rho_)), 2), unvec(lu.solve(vec(xp_ * rho_)), 2),
                unvec(lu.solve(vec(xm_ * rho_)), 2)};
    }

    double value(const AngularResolvent &res, double theta, Polarization pol) const {
        if (!(theta > 0.0 && theta <= pi))
            throw InvalidInput("theta must lie in (0, pi]");
        const double c = std::cos(theta);
        const double sgn = pol == Polarization::plus ? 1.0 : -1.0;
        const double dip = sgn * 0.25 * std::sqrt(3.0 / (2.0 * pi)) * (1.0 + sgn * c);
        const complex gp = profiles_.amplitude(+1, pol, c);
        const complex gm = profiles_.amplitude(-1, pol, c);
        const ComplexMatrix xop = complex(dip) * x0_ + gp * xp_ + gm * xm_;
        const ComplexMatrix img = complex(dip) * res.dipole + gp * res.upper + gm * res.lower;
        return (xop.adjoint() * img).trace().real() / pi;
    }

    double operator()(double x, double theta, Polarization pol) const {
        return value(at(x), theta, pol);
    }

    /// 2 pi * integral over theta of sin(theta) (Sigma_+ + Sigma_-).
    double solid_angle_integral(double x, double tol = 1e-12) const {
        const AngularResolvent res = at(x);
        auto f = [&](double theta) {
            if (theta <= 0.0)
                return 0.0;
            return 2.0 * pi * std::sin(theta) *
                   (value(res, theta, Polarization::plus) + value(res, theta, Polarization::minus));
        };
        return integrate_adaptive(f, 0.0, pi, tol);
    }

  private:
    ModelParams p_;
    AngularProfileSet profiles_;
    Superoperator k_;
    ComplexMatrix rho_;
    ComplexMatrix x0_, xp_, xm_;
};

inline double sigma_angular(const ModelParams &p, const AngularProfileSet &profiles,
                            double x, double theta, Polarization pol) {
    return AngularSpectrum(p, profiles)(x, theta, pol);
}

inline double integrate_solid_angle(const ModelParams &p, const AngularProfileSet &profiles,
                                    double x) {
    return AngularSpectrum(p, profiles).solid_angle_integral(x);
}

} // namespace rfspec
