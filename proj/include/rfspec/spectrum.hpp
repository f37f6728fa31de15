#pragma once

// Closed-form fluorescence spectra: the total spectrum through three 3x3
// resolvent solves, its integrated strength, and the usual-model,
// weak-drive and broadband-laser limits.

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "model.hpp"
#include "numeric.hpp"

namespace rfspec {

/// Deliberate coefficient errors used by the validation suite to prove that
/// its checks can fail.
enum class Mutation { none, usual_coefficient, total_coefficient };

struct ResolventVectors {
    ComplexVector v; ///< (K + q)^{-1} w
    ComplexVector c; ///< (K + q)^{-1} d
    ComplexVector u; ///< (K + q)^{-1} e_3
    complex q{};
};

inline ResolventVectors resolvent_vectors(const ComplexMatrix &k,
                                          const ComplexVector &d_vec,
                                          const ModelParams &p, double x) {
    if (!(p.gamma + p.y > 0.0))
        throw InvalidInput("resolvent needs gamma + y > 0");
    ResolventVectors r;
    r.q = complex(0.5 * (p.gamma + p.y), x - p.z);
    ComplexMatrix m = k;
    for (std::size_t i = 0; i < 3; ++i)
        m(i, i) += r.q;
    const LuFactorization lu(std::move(m));
    r.v = lu.solve(steady_state_rhs());
    r.c = lu.solve(d_vec);
    r.u = lu.solve(ComplexVector::unit(3, 2));
    return r;
}

/// Precomputed parameter-dependent parts of the total spectrum, evaluated
/// at many frequencies.
class TotalSpectrum {
  public:
    explicit TotalSpectrum(const ModelParams &p, Mutation m = Mutation::none)
        : p_(p), mutation_(m) {
        require_valid(p);
        dp_ = derive(p);
        st_ = steady_state(dp_, p);
        k_ = build_K(dp_, p);
    }

    const ModelParams &params() const noexcept { return p_; }
    const DerivedParams &derived() const noexcept { return dp_; }
    const SteadyState &steady() const noexcept { return st_; }
    const ComplexMatrix &k_matrix() const noexcept { return k_; }

    /// The complex bracket whose real part, times Omega^2/pi, is Sigma(x).
    complex bracket(double x) const {
        const ResolventVectors r = resolvent_vectors(k_, st_.d_vec, p_, x);
        const double o2 = p_.omega2;
        const double s = dp_.s;
        const double sin_s = std::sin(s);
        const complex e_is = std::exp(I * s);
        const double dm = p_.delta_minus;
        const double dpl = p_.delta_plus;
        const complex d1 = st_.d_vec[0];
        const complex d2 = st_.d_vec[1];
        const complex d3 = st_.d_vec[2];
        const complex &q = r.q;
        const auto &v = r.v;
        const auto &c = r.c;
        const auto &u = r.u;
        const double dg2 = mutation_ == Mutation::total_coefficient
                               ? 2.0 * dp_.dg_norm2
                               : dp_.dg_norm2;

        const complex elastic =
            (1.0 / q) *
            (v[2] + I * std::exp(I * dm) * std::sin(dm) +
             I * o2 * v[0] * std::conj(e_is) * sin_s) *
            (d2 - I * std::exp(-I * dm) * std::sin(dm) - I * o2 * d1 * e_is * sin_s);
        const complex upper_phase =
            std::exp(-I * dm) * std::sin(dpl) * (o2 * c[0] * sin_s - I * e_is * c[2]);
        const complex dipole =
            (d1 + I * d3 * e_is * sin_s) * (u[2] + I * o2 * u[0] * std::conj(e_is) * sin_s);
        const complex lower_amp = (1.0 / q) * (p_.g_minus_norm2 + o2 * d1 * dp_.gminus_dg);
        const complex cross_plus = o2 * dp_.dg_gplus * c[0];
        const complex cross_coh = -o2 * d3 * dg2 * u[0];
        const complex cross_minus = (o2 / q) * (dp_.dg_gminus + o2 * d1 * dg2) * v[0];
        return elastic + upper_phase + dipole + lower_amp + cross_plus + cross_coh +
               cross_minus;
    }

    double operator()(double x) const {
        return p_.omega2 / (2.0 * pi) * 2.0 * bracket(x).real();
    }

  private:
    ModelParams p_;
    Mutation mutation_;
    DerivedParams dp_;
    SteadyState st_;
    ComplexMatrix k_;
};

inline double sigma_total(const ModelParams &p, double x,
                          Mutation m = Mutation::none) {
    return TotalSpectrum(p, m)(x);
}

/// Dedicated formula for vanishing direct-scattering parameters. Correction
/// fields of `p` are ignored; see ignored_by_usual_model().
inline double sigma_usual(const ModelParams &p, double x,
                          Mutation m = Mutation::none) {
    require_valid(usual_model(p));
    const double o2 = p.omega2;
    const double y = p.y;
    const double z = p.z;
    const double g = p.gamma;
    const complex q(0.5 * (g + y), x - z);
    const complex d = complex(1.0 + y, 2.0 * z) /
                      (4.0 * z * z + (1.0 + y) * (1.0 + y + 2.0 * o2));
    const complex a(2.0 + g + y, 2.0 * (x - z));
    const complex b(1.0 + g + 4.0 * y, 2.0 * (x - 2.0 * z));
    const double drive = m == Mutation::usual_coefficient ? 2.0 : 4.0;
    const complex n = drive * o2 * complex(1.0 + g + 2.0 * y, 2.0 * (x - z)) +
                      a * b * complex(1.0 + g, 2.0 * x);
    const complex v3 = a * b / n;
    const complex bracket = (1.0 / q) * v3 * d + (2.0 * v3 + 4.0 * o2 / n) * d.real();
    return o2 / (2.0 * pi) * 2.0 * bracket.real();
}

/// Integral of Sigma over all frequencies in closed form.
inline double strength(const ModelParams &p) {
    require_valid(p);
    const DerivedParams dp = derive(p);
    const SteadyState st = steady_state(dp, p);
    const double o2 = p.omega2;
    const double d1 = st.d.real();
    const double sp = std::sin(p.delta_plus);
    const double sm = std::sin(p.delta_minus);
    return o2 * (d1 * (1.0 + o2 * sp * sp) + (1.0 - o2 * d1) * (sm * sm + p.g_minus_norm2) +
                 (st.d * (std::exp(2.0 * I * p.delta_minus) - 1.0)).real() +
                 o2 * d1 * p.g_plus_norm2);
}

/// c(x, D) = 1 / (D + 2 i x), the Lorentzian amplitude of the limit formulas.
inline complex lorentz_amplitude(double x, double width) {
    return 1.0 / complex(width, 2.0 * x);
}

/// Leading order in Omega^2, returned on the Sigma scale.
inline double sigma_low_intensity(const ModelParams &p, double x) {
    require_valid(p);
    const double g = p.gamma;
    const double y = p.y;
    const double z = p.z;
    const double dm = p.delta_minus;
    const complex a = lorentz_amplitude(-z, 1.0 + y) - I * std::exp(-I * dm) * std::sin(dm);
    const complex c_xz = lorentz_amplitude(x - z, g + y);
    const complex c_x = lorentz_amplitude(-x, 1.0 + g);
    const complex c_z = lorentz_amplitude(-z, 1.0 + y);
    const double scaled =
        (g + y) * std::norm(c_xz) * (p.g_minus_norm2 + g / (g + y) * std::norm(a)) +
        y * std::norm(c_xz * a + c_x * c_z) + g * y * std::norm(c_x) * std::norm(c_z);
    return scaled * 2.0 * p.omega2 / pi;
}

/// Light shift eta of the broadband line.
inline double broadband_shift(const ModelParams &p) {
    const double s = p.delta_plus - p.delta_minus;
    return p.omega2 * (p.epsilon - 0.25 * std::sin(2.0 * s));
}

/// Extra width kappa of the broadband line.
inline double broadband_width(const ModelParams &p) {
    const double s = std::sin(p.delta_plus - p.delta_minus);
    return p.gamma + p.omega2 * (s * s + delta_g_norm2(p));
}

struct BroadbandValue {
    double scaled = 0.0; ///< (pi y / 2 Omega^2) Sigma in the limit y -> infinity
    double sigma = 0.0;  ///< the same limit rescaled to Sigma at the y of p
    bool has_sigma = false;
};

inline BroadbandValue sigma_broadband(const ModelParams &p, double x) {
    require_valid(p);
    const double eta = broadband_shift(p);
    const double kappa = broadband_width(p);
    const complex c = lorentz_amplitude(x - eta, 1.0 + kappa);
    BroadbandValue r;
    r.scaled = std::norm(c + I * std::exp(I * p.delta_minus) * std::sin(p.delta_minus)) +
               kappa * std::norm(c) + p.g_minus_norm2;
    if (p.y > 0.0) {
        r.sigma = r.scaled * 2.0 * p.omega2 / (pi * p.y);
        r.has_sigma = true;
    }
    return r;
}

/// Mean heterodyne output power: shot-noise floor plus the spectrum.
inline double power(double k1, double k2, double sigma) {
    return k1 * k1 * k2 / (4.0 * pi) + k1 * k1 * k2 * sigma;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    if (n == 0)
        throw InvalidInput("linspace: need at least one point");
    if (!(std::isfinite(a) && std::isfinite(b)))
        throw InvalidInput("linspace: bounds must be finite");
    if (n == 1) {
        if (a != b)
            throw InvalidInput("linspace: a single point needs xmin == xmax");
        return {a};
    }
    if (!(a < b))
        throw InvalidInput("linspace: need xmin < xmax");
    std::vector<double> xs(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = a + h * static_cast<double>(i);
    xs.back() = b;
    return xs;
}

/// f over a grid, split across hardware threads. Each value depends only
/// on its own x, so the result does not depend on the thread count.
inline std::vector<double> evaluate_grid(const std::function<double(double)> &f,
                                         const std::vector<double> &xs,
                                         unsigned threads = 0) {
    std::vector<double> out(xs.size());
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, std::max<std::size_t>(1, xs.size() / 64)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            out[i] = f(xs[i]);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (xs.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                const std::size_t lo = t * chunk;
                const std::size_t hi = std::min(xs.size(), lo + chunk);
                for (std::size_t i = lo; i < hi; ++i)
                    out[i] = f(xs[i]);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto &th : pool)
        th.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

struct SpectrumCurve {
    std::vector<double> xs;
    std::vector<double> values;
    ModelParams params;
    std::string method; ///< closed, oracle, usual, low-intensity, broadband
};

} // namespace rfspec
