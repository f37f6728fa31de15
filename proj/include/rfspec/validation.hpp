#pragma once

// Cross-module check suite shared by the `validate` command and the
// acceptance runner. Each criterion is a list of sub-checks with a measured
// value and a bound; the criterion passes when all of them do.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "angular.hpp"
#include "atom.hpp"
#include "figures.hpp"
#include "io.hpp"
#include "model.hpp"
#include "sme.hpp"
#include "spectrum.hpp"
#include "superop.hpp"

namespace rfspec {

/// Random parameters satisfying every invariant, spread over the figure
/// regime and beyond it.
inline ModelParams random_valid_params(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.gamma = 0.05 + 2.0 * u(rng);
    p.omega2 = 60.0 * u(rng) * u(rng);
    p.z = -6.0 + 12.0 * u(rng);
    p.y = u(rng) < 0.2 ? 0.0 : 6.0 * u(rng);
    p.delta_plus = -0.6 + 1.2 * u(rng);
    p.delta_minus = -0.6 + 1.2 * u(rng);
    p.g_plus_norm2 = 0.02 * u(rng);
    p.g_minus_norm2 = 0.02 * u(rng);
    const double bound = std::sqrt(p.g_plus_norm2 * p.g_minus_norm2);
    const double r = bound * u(rng);
    const double phi = 2.0 * pi * u(rng);
    p.g_inner = std::polar(r, phi);
    p.epsilon = delta_g_norm2(p) > 1e-12 ? -0.01 + 0.02 * u(rng) : 0.0;
    p.laser_phase = 6.0 * u(rng);
    return p;
}

/// The 24 parameter sets of figures 1-3.
inline std::vector<ModelParams> figure_sets() {
    std::vector<ModelParams> out;
    for (bool modified : {false, true})
        for (double z : presets::figure_detunings)
            for (double y : presets::figure_bandwidths)
                out.push_back(presets::make(modified, z, y));
    return out;
}

inline std::string set_label(const ModelParams &p) {
    const bool usual = ignored_by_usual_model(p).empty();
    return std::string(usual ? "usual" : "modified") + "_z" + format_exact(p.z) + "_y" +
           format_exact(p.y);
}

struct SubCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    std::string relation; ///< "<=", ">=", "<", "=="
    bool passed = false;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<SubCheck> checks;
    std::vector<std::pair<std::string, double>> report; ///< extra figures of merit
    double seconds = 0.0;
    std::string error; ///< set if the check threw

    bool passed() const {
        if (!error.empty() || checks.empty())
            return false;
        return std::all_of(checks.begin(), checks.end(),
                           [](const SubCheck &c) { return c.passed; });
    }

    void le(const std::string &name, double v, double bound) {
        checks.push_back({name, v, bound, "<=", v <= bound});
    }
    void lt(const std::string &name, double v, double bound) {
        checks.push_back({name, v, bound, "<", v < bound});
    }
    void ge(const std::string &name, double v, double bound) {
        checks.push_back({name, v, bound, ">=", v >= bound});
    }
    void eq(const std::string &name, double v, double expected) {
        checks.push_back({name, v, expected, "==", v == expected});
    }
};

struct SuiteOptions {
    Mutation mutation = Mutation::none;
    std::filesystem::path figure_dir; ///< empty: a fresh temporary directory
    unsigned threads = 0;
};

namespace detail {

inline double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline std::size_t count_local_maxima(const std::vector<double> &v) {
    std::size_t n = 0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] > v[i + 1])
            ++n;
    return n;
}

} // namespace detail

// 1 -------------------------------------------------------------------------
inline void check_oracle_equivalence(const SuiteOptions &opt, CriterionResult &r) {
    const auto xs = linspace(-15.0, 15.0, 1001);
    double worst = 0.0;
    for (const ModelParams &p : figure_sets()) {
        const TotalSpectrum s(p, opt.mutation);
        const auto closed = evaluate_grid([&](double x) { return s(x); }, xs, opt.threads);
        const auto oracle = spectrum_values(p, xs, SpectrumMethod::oracle, opt.threads);
        const double peak = *std::max_element(oracle.begin(), oracle.end());
        const double err = detail::max_abs_diff(closed, oracle) / peak;
        r.report.emplace_back("max_rel_err." + set_label(p), err);
        worst = std::max(worst, err);
    }
    r.le("max |closed - oracle| / max sigma", worst, 1e-10);
}

// 2 -------------------------------------------------------------------------
inline void check_time_domain(const SuiteOptions &, CriterionResult &r) {
    const ModelParams sets[] = {presets::usual(0.0, 0.0), presets::modified(0.0, 1.0),
                                presets::modified(2.5, 4.0), presets::modified(-2.5, 0.5)};
    double worst = 0.0;
    for (const ModelParams &p : sets) {
        const LevelStructure ls = two_level_structure();
        const Superoperator lb = assemble_block_liouvillian(ls, p);
        const Superoperator k = add_bandwidth_term(lb, ls, p.y);
        const ComplexMatrix rho = steady_state_super(lb);
        const auto ops = emission_operators(p, realize_gram(p));
        for (double x : linspace(-10.0, 10.0, 11)) {
            const complex q = spectral_q(p, x);
            const double res = sigma_oracle(p, x);
            double quad = 0.0;
            for (int panel = 0; panel < 20; ++panel)
                quad += integrate_adaptive(
                    [&](double t) {
                        return (std::exp(-q * t) * correlation_at(k, rho, ops, t)).real() / pi;
                    },
                    10.0 * panel, 10.0 * (panel + 1), 1e-12);
            worst = std::max(worst, std::abs(quad - res) / std::abs(res));
        }
    }
    r.le("max relative difference (44 points)", worst, 1e-6);
}

// 3 -------------------------------------------------------------------------
inline void check_reductions(const SuiteOptions &opt, CriterionResult &r) {
    const auto xs = linspace(-15.0, 15.0, 1001);
    double worst = 0.0;
    for (const ModelParams &full : figure_sets()) {
        const ModelParams p = usual_model(full);
        const TotalSpectrum s(p);
        for (double x : xs)
            worst = std::max(worst, std::abs(sigma_usual(p, x, opt.mutation) - s(x)));
    }
    r.le("max |sigma_usual - sigma_total(zeroed corrections)|", worst, 1e-12);
    double refl = 0.0;
    for (double y : {0.5, 10.0})
        for (double z : {0.0, 1.3, 2.5, -2.5}) {
            ModelParams p = presets::usual(z, y);
            p.gamma = 1e-6;
            ModelParams m = p;
            m.z = -z;
            for (double x : xs)
                refl = std::max(refl, std::abs(sigma_usual(p, x, opt.mutation) -
                                               sigma_usual(m, -x, opt.mutation)));
        }
    r.le("gamma = 1e-6: max |sigma_usual(x, z) - sigma_usual(-x, -z)|", refl, 1e-10);
}

// 4 -------------------------------------------------------------------------
inline void check_steady_states(const SuiteOptions &, CriterionResult &r) {
    std::vector<ModelParams> sets = figure_sets();
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i)
        sets.push_back(random_valid_params(rng));
    double worst = 0.0;
    for (const ModelParams &p : sets) {
        const DerivedParams dp = derive(p);
        const SteadyState st = steady_state(dp, p);
        const ComplexVector solved = solve_linear(build_G(dp, p), steady_state_rhs());
        worst = std::max(worst, (solved - st.d_vec).norm_inf());
    }
    r.le("max |d_closed - G^-1 w| (224 sets)", worst, 1e-12);
    const AtomLevels lv(HalfInt::integer(2));
    double pop = 0.0, block = 0.0;
    for (const ModelParams &p : figure_sets()) {
        const FullSteadyState fs = steady_state_full(lv, p);
        pop = std::max(pop, fs.off_extreme_population);
        block = std::max(block, (fs.extreme_block - steady_state(p).rho_inf).max_abs());
    }
    r.lt("F- = 2: max off-extreme population", pop, 1e-8);
    r.le("F- = 2: max |extreme block - rho_inf|", block, 1e-8);
}

// 5 -------------------------------------------------------------------------
inline void check_strength(const SuiteOptions &, CriterionResult &r) {
    double worst = 0.0;
    for (const ModelParams &p : figure_sets()) {
        const TotalSpectrum s(p);
        double total = 0.0;
        for (double a = -500.0; a < 500.0; a += 10.0)
            total += integrate_adaptive(s, a, a + 10.0, 1e-9);
        const double rel = std::abs(total / strength(p) - 1.0);
        r.report.emplace_back("strength_rel_err." + set_label(p), rel);
        worst = std::max(worst, rel);
    }
    r.le("max |quadrature / strength - 1| on [-500, 500]", worst, 1e-2);
    r.le("|strength(usual, y = 0, z = 0) - 28/57|",
         std::abs(strength(presets::usual(0.0, 0.0)) - 28.0 / 57.0), 1e-12);
}

// 6 -------------------------------------------------------------------------
inline void check_limits(const SuiteOptions &, CriterionResult &r) {
    double low = 0.0, broad = 0.0;
    for (bool modified : {false, true})
        for (double z : presets::figure_detunings) {
            for (double y : presets::figure_bandwidths) {
                ModelParams p = presets::make(modified, z, y);
                p.omega2 = 1e-6;
                const TotalSpectrum s(p);
                for (double x : linspace(-15.0, 15.0, 121))
                    low = std::max(low, std::abs(sigma_low_intensity(p, x) / s(x) - 1.0));
            }
            const ModelParams p = presets::make(modified, z, 1e4);
            const TotalSpectrum s(p);
            for (double x : linspace(-10.0, 10.0, 41))
                broad = std::max(broad, std::abs(sigma_broadband(p, x).sigma / s(x) - 1.0));
        }
    r.le("low intensity (Omega^2 = 1e-6): max relative deviation", low, 1e-3);
    r.le("broadband (y = 1e4): max relative deviation on [-10, 10]", broad, 1e-2);
    const double limit = sigma_broadband(presets::usual(0.0, 1e4), 0.0).scaled;
    r.le("usual broadband peak formula vs 1/(1 + gamma)", std::abs(limit - 0.625), 1e-3);
    const ModelParams big = presets::usual(0.0, 1e6);
    const double scaled = pi * big.y / (2.0 * big.omega2) * sigma_total(big, 0.0);
    r.le("(pi y / 2 Omega^2) Sigma(0) at y = 1e6 vs 0.625", std::abs(scaled - 0.625), 1e-3);
}

// 7 -------------------------------------------------------------------------
inline void check_positivity_symmetry(const SuiteOptions &, CriterionResult &r) {
    std::mt19937_64 rng(7);
    std::vector<ModelParams> random;
    for (int i = 0; i < 200; ++i)
        random.push_back(random_valid_params(rng));
    double lowest = 1e300;
    for (const ModelParams &p : random) {
        const TotalSpectrum s(p);
        for (double x : linspace(-15.0, 15.0, 301))
            lowest = std::min(lowest, s(x));
    }
    r.ge("min Sigma over 200 random sets", lowest, -1e-12);
    std::vector<ModelParams> sets = figure_sets();
    sets.insert(sets.end(), random.begin(), random.end());
    double refl = 0.0;
    for (const ModelParams &p : sets) {
        const TotalSpectrum a(p), b(reflected(p));
        for (double x : linspace(-12.0, 12.0, 25))
            refl = std::max(refl, std::abs(a(x) - b(-x)));
    }
    r.le("max |Sigma(p, x) - Sigma(reflected p, -x)|", refl, 1e-12);
}

// 8 -------------------------------------------------------------------------
inline void check_structure(const SuiteOptions &, CriterionResult &r) {
    std::vector<ModelParams> sets = figure_sets();
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i)
        sets.push_back(random_valid_params(rng));
    double cp_lb = 1e300, cp_k = -1e300, trace = 0.0;
    for (const ModelParams &p : sets) {
        const Superoperator lb = build_liouvillian_2lvl(p);
        const Superoperator k = build_K_super(p);
        cp_lb = std::min(cp_lb, cp_check(lb));
        trace = std::max({trace, trace_defect(lb), trace_defect(k)});
    }
    for (const ModelParams &p : figure_sets())
        if (p.y == 4.0)
            cp_k = std::max(cp_k, cp_check(build_K_super(p)));
    r.ge("min cp_check(L_B)", cp_lb, -1e-10);
    r.lt("max cp_check(K) at y = 4", cp_k, -1e-6);
    r.le("max trace defect of L_B and K", trace, 1e-12);
    double completeness = 0.0, decay = 0.0;
    for (int tf : {0, 1, 2, 4}) {
        const AtomLevels lv(HalfInt::from_twice(tf));
        const LevelStructure ls = level_structure(lv);
        ComplexMatrix sum(lv.dim(), lv.dim());
        for (int m = -1; m <= 1; ++m)
            sum += ls.a_m(m).adjoint() * ls.a_m(m);
        completeness = std::max(completeness, (sum - ls.p_plus).max_abs());
        const Superoperator vac = build_vacuum_liouvillian(lv);
        ComplexMatrix rho = ls.p_plus;
        rho *= 1.0 / static_cast<double>(lv.dim_upper());
        for (double t : {0.5, 1.0, 2.0, 5.0}) {
            const ComplexMatrix rt = propagate(vac, rho, t);
            decay = std::max(decay, std::abs((ls.p_plus * rt).trace().real() - std::exp(-t)));
        }
    }
    r.le("max |sum A_m^dag A_m - P+| for F- in {0, 1/2, 1, 2}", completeness, 1e-12);
    r.le("max |Tr P+ rho(t) - e^-t| (vacuum)", decay, 1e-10);
}

// 9 -------------------------------------------------------------------------
inline void check_angular(const SuiteOptions &, CriterionResult &r) {
    double fact = 0.0, closure = 0.0;
    for (const ModelParams &p : figure_sets()) {
        const bool usual = ignored_by_usual_model(p).empty();
        if (usual) {
            const AngularSpectrum a(p, build_profiles(p));
            const TotalSpectrum s(p);
            for (double x : {-5.0, 0.0, 2.5}) {
                const AngularResolvent res = a.at(x);
                const double sx = s(x);
                for (double theta : {0.3, pi / 2.0, 2.5, pi}) {
                    const double c = std::cos(theta);
                    fact = std::max(
                        {fact,
                         std::abs(a.value(res, theta, Polarization::plus) -
                                  3.0 / (8.0 * pi) * std::pow(0.5 * (1.0 + c), 2) * sx),
                         std::abs(a.value(res, theta, Polarization::minus) -
                                  3.0 / (8.0 * pi) * std::pow(0.5 * (1.0 - c), 2) * sx)});
                }
            }
        } else {
            const TotalSpectrum s(p);
            for (const std::string &family : profile_families()) {
                const AngularSpectrum a(p, build_profiles(p, family));
                for (double x : {-5.0, 0.0, 2.5})
                    closure = std::max(closure, std::abs(a.solid_angle_integral(x) - s(x)));
            }
        }
    }
    r.le("g = 0: max dipole factorization error", fact, 1e-12);
    r.le("modified: max |solid-angle integral - Sigma|", closure, 1e-6);
}

// 10 ------------------------------------------------------------------------
inline void check_sme(const SuiteOptions &opt, CriterionResult &r) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelParams p = presets::modified(0.0, 1.0);
    const ComplexMatrix ground{{0.0, 0.0}, {0.0, 1.0}};
    TrajectoryConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 5000;
    cfg.n_traj = 10000;
    cfg.record_every = 1000;
    cfg.seed = 1;
    const EnsembleResult e = ensemble_mean(p, ground, cfg, opt.threads);
    const ZScoreReport z = z_scores(e, mean_path_oracle(p, ground, e.t));
    r.report.emplace_back("z_checked", static_cast<double>(z.checked));
    r.report.emplace_back("z_within_3", static_cast<double>(z.within_3));
    r.le("max |z| of ensemble mean vs exp(L_B t) rho0", z.max_abs_z, 3.0);
    r.ge("entries checked", static_cast<double>(z.checked), 1.0);
    cfg.record_every = 1;
    std::size_t bad = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const TrajectoryPath path = simulate_trajectory(p, ground, cfg, seed);
        for (const ComplexMatrix &m : path.rho)
            if (m.trace() != complex(1.0) || (m - m.adjoint()).max_abs() != 0.0)
                ++bad;
    }
    r.eq("steps with trace != 1 or rho != rho^dag (3 full paths)", static_cast<double>(bad), 0.0);
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.lt("runtime [s]", sec, 60.0);
}

// 11 ------------------------------------------------------------------------
inline void check_figures(const SuiteOptions &opt, CriterionResult &r) {
    namespace fs = std::filesystem;
    fs::path dir = opt.figure_dir;
    bool temporary = false;
    if (dir.empty()) {
        std::random_device rd;
        dir = fs::temp_directory_path() / ("rfspec_figures_" + std::to_string(rd()));
        temporary = true;
    }
    fs::create_directories(dir);
    std::set<std::string> expected;
    for (int fig : figure_ids()) {
        write_figure(fig, dir, SpectrumMethod::closed, GridSpec{}, opt.threads);
        std::size_t count = 0;
        for (const auto &c : figure_curves(fig)) {
            expected.insert(c.filename);
            if (fs::is_regular_file(dir / c.filename))
                ++count;
        }
        r.eq("fig " + std::to_string(fig) + ": CSV files", static_cast<double>(count), 8.0);
        expected.insert(figure_manifest_name(fig));
    }
    std::size_t unexpected = 0;
    for (const auto &entry : fs::directory_iterator(dir))
        if (!expected.count(entry.path().filename().string()))
            ++unexpected;
    r.eq("unexpected files", static_cast<double>(unexpected), 0.0);
    const CsvTable t = parse_csv(read_text_file((dir / "fig1_y0_usual.csv").string()));
    std::vector<double> v;
    for (const auto &row : t.rows)
        v.push_back(row[1]);
    r.eq("fig1 usual y = 0 rows", static_cast<double>(v.size()), 1001.0);
    double asym = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        asym = std::max(asym, std::abs(v[i] - v[v.size() - 1 - i]));
    r.le("fig1 usual y = 0: max |Sigma(x) - Sigma(-x)|", asym, 1e-12);
    r.eq("fig1 usual y = 0: local maxima", static_cast<double>(detail::count_local_maxima(v)),
         3.0);
    if (temporary)
        fs::remove_all(dir);
}

using CriterionFn = std::function<void(const SuiteOptions &, CriterionResult &)>;

struct Criterion {
    int id;
    std::string title;
    CriterionFn fn;
};

inline std::vector<Criterion> all_criteria() {
    return {
        {1, "oracle equivalence on the 24 figure sets", check_oracle_equivalence},
        {2, "resolvent equals time-domain quadrature (T = 200)", check_time_domain},
        {3, "usual-model and Kimble-Mandel reductions", check_reductions},
        {4, "closed-form and full-model steady states", check_steady_states},
        {5, "spectral strength", check_strength},
        {6, "low-intensity and broadband limits", check_limits},
        {7, "positivity and reflection invariance", check_positivity_symmetry},
        {8, "generator structure", check_structure},
        {9, "angular closure", check_angular},
        {10, "stochastic master equation ensemble", check_sme},
        {11, "figure datasets", check_figures}};
}

/// Runs one criterion, timing it and turning exceptions into a failure.
inline CriterionResult run_criterion(const Criterion &c, const SuiteOptions &opt) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    r.id = c.id;
    r.title = c.title;
    try {
        c.fn(opt, r);
    } catch (const std::exception &e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline Criterion find_criterion(int id) {
    for (const Criterion &c : all_criteria())
        if (c.id == id)
            return c;
    throw InvalidInput("no criterion " + std::to_string(id));
}

inline std::string format_check(const SubCheck &c) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << c.name << ": " << c.value << " " << c.relation << " " << c.bound
       << (c.passed ? "" : "  <-- FAILED");
    return os.str();
}

/// key=value lines for the machine-readable report.
inline std::string report_lines(const CriterionResult &r) {
    const std::string prefix = "criterion." + std::to_string(r.id) + ".";
    std::string out = prefix + "passed=" + (r.passed() ? "true" : "false") + "\n";
    out += prefix + "seconds=" + format_value(r.seconds) + "\n";
    if (!r.error.empty())
        out += prefix + "error=" + r.error + "\n";
    for (std::size_t i = 0; i < r.checks.size(); ++i) {
        out += prefix + "check." + std::to_string(i) + ".value=" + format_value(r.checks[i].value) +
               "\n";
        out += prefix + "check." + std::to_string(i) + ".passed=" +
               (r.checks[i].passed ? "true" : "false") + "\n";
    }
    for (const auto &[k, v] : r.report)
        out += prefix + k + "=" + format_value(v) + "\n";
    return out;
}

} // namespace rfspec
