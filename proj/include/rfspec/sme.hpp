#pragma once

// Trajectories of the Ito stochastic master equation for the
// phase-diffusion laser,
//   d rho = L_B[rho] dt + (i/2) sqrt(y) [P+ - P-, rho] dW,
// whose ensemble mean obeys the ordinary master equation with L_B.

#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "model.hpp"
#include "numeric.hpp"
#include "superop.hpp"

namespace rfspec {

/// Philox4x32-10 counter-based generator (Salmon et al.), usable as a
/// UniformRandomBitGenerator. The key is the 64-bit stream seed.
class Philox4x32 {
  public:
    using result_type = std::uint32_t;
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == 4) {
            block_ = generate(counter_, key_);
            for (auto &c : counter_)
                if (++c != 0)
                    break;
            pos_ = 0;
        }
        return block_[pos_++];
    }

    /// The bijection itself: ten rounds on one counter block.
    static counter_type generate(counter_type ctr, key_type key) {
        constexpr std::uint64_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = m0 * ctr[0];
            const std::uint64_t p1 = m1 * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }

  private:
    key_type key_;
    counter_type counter_{};
    counter_type block_{};
    int pos_ = 4;
};

enum class SmeScheme {
    /// rho_12 *= exp(i sqrt(y) dW + y dt / 2), then rho' = exp(L_B dt) rho:
    /// each factor solves its part of the Ito equation exactly, so the mean
    /// is exact and the combined noise is a pure phase rotation
    exponential_euler,
    euler_maruyama, ///< rho' = rho + L_B[rho] dt + (i/2) sqrt(y) [P+ - P-, rho] dW
};

struct TrajectoryConfig {
    double dt = 1e-3;
    std::uint64_t n_steps = 1000;
    std::uint64_t seed = 0;
    std::uint64_t n_traj = 1;
    std::uint64_t record_every = 1; ///< record every k-th step (step 0 always)
    SmeScheme scheme = SmeScheme::exponential_euler;
};

inline std::vector<Violation> validate(const TrajectoryConfig &cfg, const ModelParams &p) {
    std::vector<Violation> v;
    if (!(std::isfinite(cfg.dt) && cfg.dt > 0.0))
        v.push_back({"dt > 0", "dt = " + std::to_string(cfg.dt)});
    if (cfg.n_steps == 0)
        v.push_back({"n_steps > 0", "n_steps = 0"});
    if (cfg.n_traj == 0)
        v.push_back({"n_traj > 0", "n_traj = 0"});
    if (cfg.record_every == 0)
        v.push_back({"record_every > 0", "record_every = 0"});
    const double stiff = cfg.dt * std::max({1.0, p.y, p.omega2});
    if (!(stiff <= 0.05))
        v.push_back({"dt * max(1, y, Omega^2) <= 0.05",
                     "dt * max(1, y, Omega^2) = " + std::to_string(stiff)});
    return v;
}

struct TrajectoryPath {
    std::vector<double> t;
    std::vector<ComplexMatrix> rho;
};

namespace detail {

/// Two-level state stored as rho_11 and rho_12; the trace and Hermiticity
/// of the represented matrix are exact by construction.
struct QubitState {
    double p11;
    complex c12;

    ComplexMatrix matrix() const {
        return ComplexMatrix{{p11, c12}, {std::conj(c12), 1.0 - p11}};
    }
    double min_eigenvalue() const {
        const double a = 2.0 * p11 - 1.0;
        return 0.5 * (1.0 - std::sqrt(a * a + 4.0 * std::norm(c12)));
    }
};

inline QubitState to_state(const ComplexMatrix &rho0) {
    if (rho0.rows() != 2 || rho0.cols() != 2)
        throw InvalidInput("rho0 must be 2x2");
    if (!rho0.all_finite())
        throw InvalidInput("rho0 has non-finite entries");
    if ((rho0 - rho0.adjoint()).max_abs() > 1e-12)
        throw InvalidInput("rho0 is not Hermitian");
    if (std::abs(rho0.trace() - 1.0) > 1e-12)
        throw InvalidInput("rho0 does not have unit trace");
    const QubitState s{rho0(0, 0).real(), rho0(0, 1)};
    if (s.min_eigenvalue() < -1e-12)
        throw InvalidInput("rho0 is not positive semidefinite");
    return s;
}

/// One drift step as an affine map on (rho_11, rho_12), read off the
/// 4x4 step matrix acting on vec(rho) = (rho_11, rho_21, rho_12, rho_22).
struct DriftStep {
    complex m[4][4];

    QubitState apply(const QubitState &s) const {
        const complex v[4] = {s.p11, std::conj(s.c12), s.c12, 1.0 - s.p11};
        complex r0 = 0.0, r2 = 0.0;
        for (int k = 0; k < 4; ++k) {
            r0 += m[0][k] * v[k];
            r2 += m[2][k] * v[k];
        }
        return {r0.real(), r2};
    }
};

inline DriftStep make_drift(const ComplexMatrix &step) {
    DriftStep d;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            d.m[i][j] = step(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return d;
}

/// Integrates one path, calling record(step_index, state) at step 0 and
/// every record_every steps.
template <class Record>
void integrate_path(const DriftStep &drift, double sqrt_y, const QubitState &start,
                    const TrajectoryConfig &cfg, std::uint64_t seed, Record &&record) {
    Philox4x32 gen(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(cfg.dt));
    QubitState s = start;
    record(std::uint64_t{0}, s);
    const double floor = -10.0 * cfg.dt;
    const double ito = 0.5 * sqrt_y * sqrt_y * cfg.dt;
    for (std::uint64_t n = 1; n <= cfg.n_steps; ++n) {
        const double dw = normal(gen);
        if (cfg.scheme == SmeScheme::exponential_euler) {
            QubitState kicked = s;
            kicked.c12 *= std::exp(complex(ito, sqrt_y * dw));
            s = drift.apply(kicked);
        } else {
            const QubitState d = drift.apply(s);
            s = {s.p11 + d.p11, s.c12 + d.c12 + complex(0.0, sqrt_y * dw) * s.c12};
        }
        if (!(s.min_eigenvalue() >= floor))
            throw StepInstability("eigenvalue " + std::to_string(s.min_eigenvalue()) +
                                  " below -10 dt at step " + std::to_string(n));
        if (n % cfg.record_every == 0)
            record(n, s);
    }
}

inline DriftStep drift_for(const ModelParams &p, const TrajectoryConfig &cfg) {
    const Superoperator lb = build_liouvillian_2lvl(p);
    if (cfg.scheme == SmeScheme::exponential_euler)
        return make_drift(mat_exp(lb.matrix, cfg.dt));
    return make_drift(complex(cfg.dt) * lb.matrix);
}

inline void require_valid_config(const TrajectoryConfig &cfg, const ModelParams &p) {
    require_valid(p);
    const auto v = validate(cfg, p);
    if (!v.empty())
        throw InvalidInput(describe(v));
}

} // namespace detail

/// One stochastic path from rho0 using the generator stream `seed`.
inline TrajectoryPath simulate_trajectory(const ModelParams &p, const ComplexMatrix &rho0,
                                          const TrajectoryConfig &cfg, std::uint64_t seed) {
    detail::require_valid_config(cfg, p);
    const detail::QubitState start = detail::to_state(rho0);
    const detail::DriftStep drift = detail::drift_for(p, cfg);
    TrajectoryPath path;
    detail::integrate_path(drift, std::sqrt(p.y), start, cfg, seed,
                           [&](std::uint64_t n, const detail::QubitState &s) {
                               path.t.push_back(static_cast<double>(n) * cfg.dt);
                               path.rho.push_back(s.matrix());
                           });
    return path;
}

struct EnsembleResult {
    std::vector<double> t;
    std::vector<ComplexMatrix> mean;
    /// Standard error of the mean per entry: real part holds the SE of
    /// Re rho_ij, imaginary part the SE of Im rho_ij.
    std::vector<ComplexMatrix> std_error;
    std::uint64_t n_traj = 0;
};

/// Sample mean and standard error over trajectories seeded cfg.seed + k,
/// k = 0..n_traj-1. Trajectories are summed in fixed blocks that are
/// combined in index order, so the result does not depend on `threads`.
inline EnsembleResult ensemble_mean(const ModelParams &p, const ComplexMatrix &rho0,
                                    const TrajectoryConfig &cfg, unsigned threads = 0) {
    detail::require_valid_config(cfg, p);
    if (cfg.n_traj < 100)
        throw InvalidInput("ensemble_mean needs n_traj >= 100");
    const detail::QubitState start = detail::to_state(rho0);
    const detail::DriftStep drift = detail::drift_for(p, cfg);
    const double sqrt_y = std::sqrt(p.y);
    const std::size_t n_rec = static_cast<std::size_t>(cfg.n_steps / cfg.record_every) + 1;

    // per record and quantity (p11, Re c12, Im c12): count, mean, M2
    struct Moments {
        double n = 0.0, mean = 0.0, m2 = 0.0;

        void add(double v) {
            n += 1.0;
            const double d = v - mean;
            mean += d / n;
            m2 += d * (v - mean);
        }
        void merge(const Moments &o) {
            if (o.n == 0.0)
                return;
            const double tot = n + o.n;
            const double d = o.mean - mean;
            mean += d * (o.n / tot);
            m2 += o.m2 + d * d * (n * o.n / tot);
            n = tot;
        }
    };
    constexpr std::uint64_t block = 64;
    const std::uint64_t n_blocks = (cfg.n_traj + block - 1) / block;
    std::vector<std::vector<Moments>> acc(n_blocks, std::vector<Moments>(n_rec * 3));

    auto run_block = [&](std::uint64_t b) {
        auto &m = acc[b];
        const std::uint64_t end = std::min(cfg.n_traj, (b + 1) * block);
        for (std::uint64_t k = b * block; k < end; ++k)
            detail::integrate_path(drift, sqrt_y, start, cfg, cfg.seed + k,
                                   [&](std::uint64_t n, const detail::QubitState &s) {
                                       Moments *r = &m[(n / cfg.record_every) * 3];
                                       r[0].add(s.p11);
                                       r[1].add(s.c12.real());
                                       r[2].add(s.c12.imag());
                                   });
    };

    unsigned nt = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    nt = static_cast<unsigned>(std::min<std::uint64_t>(nt, n_blocks));
    if (nt <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b)
            run_block(b);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(nt);
        for (unsigned w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::uint64_t b = w; b < n_blocks; b += nt)
                        run_block(b);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto &th : pool)
            th.join();
        for (auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    std::vector<Moments> total(n_rec * 3);
    for (const auto &m : acc)
        for (std::size_t i = 0; i < total.size(); ++i)
            total[i].merge(m[i]);

    EnsembleResult out;
    out.n_traj = cfg.n_traj;
    for (std::size_t r = 0; r < n_rec; ++r) {
        const Moments *a = &total[r * 3];
        double mean[3], se[3];
        for (int i = 0; i < 3; ++i) {
            mean[i] = a[i].mean;
            se[i] = std::sqrt(a[i].m2 / (a[i].n - 1.0) / a[i].n);
        }
        const complex c12(mean[1], mean[2]);
        out.t.push_back(static_cast<double>(r * cfg.record_every) * cfg.dt);
        out.mean.push_back(ComplexMatrix{{mean[0], c12}, {std::conj(c12), 1.0 - mean[0]}});
        out.std_error.push_back(ComplexMatrix{{complex(se[0], 0.0), complex(se[1], se[2])},
                                              {complex(se[1], se[2]), complex(se[0], 0.0)}});
    }
    return out;
}

/// z-scores of an ensemble mean against reference matrices, one per
/// (record, entry, re/im) with a nonzero standard error.
struct ZScoreReport {
    double max_abs_z = 0.0;
    std::size_t checked = 0;
    std::size_t within_3 = 0;
};

inline ZScoreReport z_scores(const EnsembleResult &ens, const std::vector<ComplexMatrix> &ref,
                             double skip_below = 1e-12) {
    if (ref.size() != ens.mean.size())
        throw InvalidInput("reference path length mismatch");
    ZScoreReport r;
    for (std::size_t k = 0; k < ref.size(); ++k)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                const complex d = ens.mean[k](i, j) - ref[k](i, j);
                const complex se = ens.std_error[k](i, j);
                for (auto [diff, s] : {std::pair{d.real(), se.real()}, {d.imag(), se.imag()}}) {
                    if (s <= skip_below)
                        continue;
                    const double z = std::abs(diff) / s;
                    ++r.checked;
                    if (z <= 3.0)
                        ++r.within_3;
                    r.max_abs_z = std::max(r.max_abs_z, z);
                }
            }
    return r;
}

/// e^{L_B t}[rho0] at the record times of an ensemble.
inline std::vector<ComplexMatrix> mean_path_oracle(const ModelParams &p, const ComplexMatrix &rho0,
                                                   const std::vector<double> &times) {
    const Superoperator lb = build_liouvillian_2lvl(p);
    std::vector<ComplexMatrix> out;
    out.reserve(times.size());
    for (double t : times)
        out.push_back(propagate(lb, rho0, t));
    return out;
}

} // namespace rfspec
