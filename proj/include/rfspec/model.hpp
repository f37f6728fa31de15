#pragma once

// Physical parameters of the driven two-level atom, the quantities derived
// from them, and the closed-form equilibrium state. All rates and
// frequencies are in units of the natural line width.

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace rfspec {

struct ModelParams {
    double gamma = 0.0;      ///< reduced instrumental width
    double omega2 = 0.0;     ///< laser intensity parameter (Rabi squared)
    double z = 0.0;          ///< reduced laser detuning
    double y = 0.0;          ///< reduced laser bandwidth
    double delta_plus = 0.0; ///< phase shift of the frozen upper level
    double delta_minus = 0.0;
    double g_plus_norm2 = 0.0;  ///< squared norm of the upper-level amplitude
    double g_minus_norm2 = 0.0;
    complex g_inner{};          ///< <g+|g->
    double epsilon = 0.0;       ///< intensity-dependent shift
    double laser_phase = 0.0;   ///< gauge phase of the laser, cancels in spectra

    bool operator==(const ModelParams &) const = default;
};

/// Copy of `p` with every direct-scattering parameter set to zero.
inline ModelParams usual_model(ModelParams p) {
    p.delta_plus = p.delta_minus = 0.0;
    p.g_plus_norm2 = p.g_minus_norm2 = 0.0;
    p.g_inner = 0.0;
    p.epsilon = 0.0;
    return p;
}

/// The reflection x -> -x, z -> -z, eps -> -eps, delta -> -delta,
/// <g-|g+> -> <g+|g->, which leaves the total spectrum unchanged.
inline ModelParams reflected(ModelParams p) {
    p.z = -p.z;
    p.epsilon = -p.epsilon;
    p.delta_plus = -p.delta_plus;
    p.delta_minus = -p.delta_minus;
    p.g_inner = std::conj(p.g_inner);
    return p;
}

/// Names of the correction parameters that are non-zero, i.e. the fields a
/// usual-model formula silently ignores.
inline std::vector<std::string> ignored_by_usual_model(const ModelParams &p) {
    std::vector<std::string> out;
    if (p.delta_plus != 0.0)
        out.emplace_back("delta_plus");
    if (p.delta_minus != 0.0)
        out.emplace_back("delta_minus");
    if (p.g_plus_norm2 != 0.0)
        out.emplace_back("g_plus_norm2");
    if (p.g_minus_norm2 != 0.0)
        out.emplace_back("g_minus_norm2");
    if (p.g_inner != complex{})
        out.emplace_back("g_inner");
    if (p.epsilon != 0.0)
        out.emplace_back("epsilon");
    return out;
}

struct Violation {
    std::string invariant;
    std::string detail;
};

inline double delta_g_norm2(const ModelParams &p) {
    return p.g_plus_norm2 + p.g_minus_norm2 - 2.0 * p.g_inner.real();
}

/// Every violated parameter invariant; empty means the parameters are valid.
inline std::vector<Violation> validate(const ModelParams &p) {
    std::vector<Violation> out;
    auto fmt = [](auto... parts) {
        std::ostringstream os;
        os.precision(12);
        (os << ... << parts);
        return os.str();
    };
    const double scalars[] = {p.gamma,       p.omega2,        p.z,
                              p.y,           p.delta_plus,    p.delta_minus,
                              p.g_plus_norm2, p.g_minus_norm2, p.g_inner.real(),
                              p.g_inner.imag(), p.epsilon,     p.laser_phase};
    for (double v : scalars)
        if (!std::isfinite(v)) {
            out.push_back({"finite", "all parameters must be finite numbers"});
            return out;
        }
    if (p.gamma < 0.0)
        out.push_back({"gamma >= 0", fmt("gamma = ", p.gamma)});
    if (p.omega2 < 0.0)
        out.push_back({"omega2 >= 0", fmt("omega2 = ", p.omega2)});
    if (p.y < 0.0)
        out.push_back({"y >= 0", fmt("y = ", p.y)});
    if (p.g_plus_norm2 < 0.0)
        out.push_back({"g_plus_norm2 >= 0", fmt("g_plus_norm2 = ", p.g_plus_norm2)});
    if (p.g_minus_norm2 < 0.0)
        out.push_back(
            {"g_minus_norm2 >= 0", fmt("g_minus_norm2 = ", p.g_minus_norm2)});
    const double cs_bound = p.g_plus_norm2 * p.g_minus_norm2;
    if (std::norm(p.g_inner) > cs_bound * (1.0 + 1e-12) + 1e-300)
        out.push_back({"Cauchy-Schwarz |<g+|g->| <= |g+||g->|",
                       fmt("|g_inner| = ", std::abs(p.g_inner), " > ",
                           std::sqrt(std::max(cs_bound, 0.0)))});
    if (delta_g_norm2(p) <= 1e-15 && p.epsilon != 0.0)
        out.push_back({"|Delta g| = 0 implies epsilon = 0",
                       fmt("|Delta g|^2 = ", delta_g_norm2(p),
                           ", epsilon = ", p.epsilon)});
    if (!(p.gamma + p.y > 0.0))
        out.push_back({"gamma + y > 0",
                       fmt("gamma = ", p.gamma, ", y = ", p.y)});
    return out;
}

inline std::string describe(const std::vector<Violation> &violations) {
    std::string s;
    for (const auto &v : violations) {
        if (!s.empty())
            s += "; ";
        s += v.invariant + " (" + v.detail + ")";
    }
    return s;
}

inline void require_valid(const ModelParams &p) {
    const auto v = validate(p);
    if (!v.empty())
        throw InvalidInput("invalid parameters: " + describe(v));
}

struct DerivedParams {
    double s = 0.0;          ///< delta_plus - delta_minus
    double z_tilde = 0.0;    ///< z - omega2 * epsilon
    double dg_norm2 = 0.0;   ///< |g+ - g-|^2
    complex dg_gminus{};     ///< <Delta g|g->
    complex gminus_dg{};     ///< <g-|Delta g>
    complex dg_gplus{};      ///< <Delta g|g+>
    complex b{};             ///< diagonal coherence entry of G
    double gamma2_cap = 0.0; ///< Gamma^2 of the steady-state denominator
};

inline DerivedParams derive(const ModelParams &p) {
    DerivedParams d;
    const double o2 = p.omega2;
    d.s = p.delta_plus - p.delta_minus;
    d.z_tilde = p.z - o2 * p.epsilon;
    d.dg_norm2 = delta_g_norm2(p);
    d.dg_gminus = p.g_inner - p.g_minus_norm2;
    d.gminus_dg = std::conj(d.dg_gminus);
    d.dg_gplus = p.g_plus_norm2 - std::conj(p.g_inner);
    const double sin_s = std::sin(d.s);
    d.b = 0.5 * (1.0 + p.y + o2 * (d.dg_norm2 + sin_s * sin_s)) -
          I * (d.z_tilde + 0.25 * o2 * std::sin(2.0 * d.s));
    const double a = 1.0 + p.y + o2 * d.dg_norm2;
    d.gamma2_cap = a * a + o2 * (2.0 + 2.0 * p.y + 2.0 * o2 * d.dg_norm2 +
                                 o2 * sin_s * sin_s);
    return d;
}

struct SteadyState {
    complex d{};
    ComplexVector d_vec;  ///< (Re d, d, conj d)
    ComplexMatrix rho_inf; ///< basis |1> = upper stretched, |2> = lower
};

/// Equilibrium of the mean master equation in closed form.
inline SteadyState steady_state(const DerivedParams &dp, const ModelParams &p) {
    const double o2 = p.omega2;
    const double denom = 4.0 * dp.z_tilde * dp.z_tilde + dp.gamma2_cap;
    if (!(denom >= 1e-14))
        throw DegenerateSteadyState("4 z~^2 + Gamma^2 = " +
                                    std::to_string(denom));
    const double ss = std::sin(dp.s);
    const complex num = (1.0 + p.y + o2 * (dp.dg_norm2 + ss * ss)) +
                        I * (2.0 * dp.z_tilde - o2 * ss * std::cos(dp.s));
    SteadyState st;
    st.d = num / denom;
    st.d_vec = ComplexVector{st.d.real(), st.d, std::conj(st.d)};

    const double omega = std::sqrt(o2);
    const complex phase = std::exp(I * (p.laser_phase + 2.0 * p.delta_minus));
    const double excited = o2 * st.d_vec[0].real();
    st.rho_inf = ComplexMatrix{{excited, omega * phase * st.d_vec[1]},
                               {omega * std::conj(phase) * st.d_vec[2],
                                1.0 - excited}};
    return st;
}

inline SteadyState steady_state(const ModelParams &p) {
    return steady_state(derive(p), p);
}

/// Right-hand side of G d = w.
inline ComplexVector steady_state_rhs() { return ComplexVector{0.0, 0.5, 0.5}; }

inline ComplexMatrix build_G(const DerivedParams &dp, const ModelParams &p) {
    const double o2c = p.omega2 * std::cos(dp.s);
    return ComplexMatrix{{1.0, -0.5, -0.5},
                         {o2c * std::exp(I * dp.s), dp.b, 0.0},
                         {o2c * std::exp(-I * dp.s), 0.0, std::conj(dp.b)}};
}

inline ComplexMatrix build_K(const DerivedParams &dp, const ModelParams &p) {
    ComplexMatrix k = build_G(dp, p);
    k(1, 1) += p.y;
    k(2, 2) -= p.y;
    return k;
}

/// Parameter sets of the published figure comparisons.
namespace presets {

inline ModelParams usual(double z, double y, double omega2 = 28.0) {
    ModelParams p;
    p.gamma = 0.6;
    p.omega2 = omega2;
    p.z = z;
    p.y = y;
    return p;
}

inline ModelParams modified(double z, double y, double omega2 = 28.0) {
    ModelParams p = usual(z, y, omega2);
    p.delta_plus = -0.03;
    p.delta_minus = 0.13;
    p.g_plus_norm2 = 0.0045;
    p.g_minus_norm2 = 0.0055;
    p.g_inner = complex(-0.004, 0.002);
    p.epsilon = -0.001;
    return p;
}

inline ModelParams make(bool modified_model, double z, double y,
                        double omega2 = 28.0) {
    return modified_model ? modified(z, y, omega2) : usual(z, y, omega2);
}

inline constexpr double figure_detunings[] = {0.0, 2.5, -2.5};
inline constexpr double figure_bandwidths[] = {0.0, 0.5, 1.0, 4.0};

} // namespace presets

} // namespace rfspec
