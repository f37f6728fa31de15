#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfspec/angular.hpp"
#include "rfspec/figures.hpp"
#include "rfspec/io.hpp"
#include "rfspec/sme.hpp"
#include "rfspec/spectrum.hpp"
#include "rfspec/validation.hpp"

namespace fs = std::filesystem;
using namespace rfspec;

namespace {

enum ExitCode { ok = 0, suite_failed = 1, bad_input = 2, numerical_failure = 3 };

struct Options {
    std::string params_file;
    std::string replay;
    std::string model = "modified";
    double z = 0.0;
    double y = 0.0;
    double omega2 = 28.0;
    std::string out = "./out";
    std::string name;
    unsigned threads = 0;

    std::string method = "closed";
    GridSpec grid;

    std::string family = "polynomial";
    std::size_t thetas = 6;

    double dt = 1e-3;
    std::uint64_t steps = 5000;
    std::uint64_t seed = 1;
    std::uint64_t n_traj = 1;
    std::uint64_t record_every = 100;
    std::string scheme = "exponential";
    std::string rho0 = "ground";

    std::string fig = "all";
    std::string mutate = "none";
};

void add_param_options(CLI::App *cmd, Options &o) {
    cmd->add_option("--params", o.params_file, "parameter file (key = value lines)");
    cmd->add_option("--model", o.model, "usual zeroes the direct-scattering parameters")
        ->check(CLI::IsMember({"usual", "modified"}));
    cmd->add_option("--z", o.z, "detuning of the figure set (without --params)");
    cmd->add_option("--y", o.y, "bandwidth of the figure set (without --params)");
    cmd->add_option("--omega2", o.omega2, "intensity of the figure set (without --params)");
    cmd->add_option("--replay", o.replay, "rerun with the settings of a manifest");
}

void add_output_options(CLI::App *cmd, Options &o) {
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--name", o.name, "output file stem (default: command name)");
    cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
}

void add_grid_options(CLI::App *cmd, Options &o) {
    cmd->add_option("--xmin", o.grid.xmin)->capture_default_str();
    cmd->add_option("--xmax", o.grid.xmax)->capture_default_str();
    cmd->add_option("--points", o.grid.points)->capture_default_str();
}

const std::string &required(const Manifest &m, const std::string &key) {
    const std::string *v = m.get(key);
    if (!v)
        throw InvalidInput("manifest lacks '" + key + "'");
    return *v;
}

std::uint64_t parse_count(const std::string &s, const std::string &what) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw InvalidInput(what + ": cannot parse '" + s + "'");
    return v;
}

/// Parameters from a manifest, a parameter file or the figure presets.
ModelParams resolve_params(Options &o, const std::string &command) {
    if (!o.replay.empty()) {
        const Manifest m = parse_manifest(read_text_file(o.replay));
        if (required(m, "command") != command)
            throw InvalidInput("manifest was written by '" + required(m, "command") + "'");
        ModelParams p;
        for (const auto &key : param_keys())
            set_param(p, key, parse_value(required(m, "param." + key), key));
        auto opt = [&](const char *key, auto &field) {
            if (const std::string *v = m.get(std::string("opt.") + key)) {
                using T = std::decay_t<decltype(field)>;
                if constexpr (std::is_same_v<T, std::string>)
                    field = *v;
                else if constexpr (std::is_floating_point_v<T>)
                    field = parse_value(*v, key);
                else
                    field = static_cast<T>(parse_count(*v, key));
            }
        };
        opt("method", o.method);
        opt("xmin", o.grid.xmin);
        opt("xmax", o.grid.xmax);
        opt("points", o.grid.points);
        opt("family", o.family);
        opt("thetas", o.thetas);
        opt("dt", o.dt);
        opt("steps", o.steps);
        opt("seed", o.seed);
        opt("n_traj", o.n_traj);
        opt("record_every", o.record_every);
        opt("scheme", o.scheme);
        opt("rho0", o.rho0);
        opt("name", o.name);
        o.model = "replay";
        require_valid(p);
        return p;
    }
    ModelParams p = o.params_file.empty() ? presets::make(o.model == "modified", o.z, o.y, o.omega2)
                                          : read_params_file(o.params_file);
    if (o.model == "usual") {
        for (const auto &name : ignored_by_usual_model(p))
            std::cerr << "note: --model usual ignores " << name << "\n";
        p = usual_model(p);
    }
    require_valid(p);
    return p;
}

Manifest base_manifest(const std::string &command, const ModelParams &p, const Options &o) {
    Manifest m;
    m.set("command", command);
    m.set("version", version);
    m.set("opt.name", o.name);
    m.set_params(p);
    return m;
}

void set_grid(Manifest &m, const Options &o) {
    m.set("opt.xmin", format_exact(o.grid.xmin));
    m.set("opt.xmax", format_exact(o.grid.xmax));
    m.set("opt.points", std::to_string(o.grid.points));
}

void finish(const Options &o, Manifest &m, const std::vector<std::string> &files) {
    std::string list;
    for (const auto &f : files)
        list += (list.empty() ? "" : ";") + f;
    m.set("files", list);
    const fs::path path = fs::path(o.out) / (o.name + "_manifest.txt");
    write_text_file(path.string(), m.str());
    for (const auto &f : files)
        std::cout << (fs::path(o.out) / f).string() << "\n";
    std::cout << path.string() << "\n";
}

int run_spectrum(Options &o) {
    const ModelParams p = resolve_params(o, "spectrum");
    if (o.name.empty())
        o.name = "spectrum";
    const SpectrumMethod method = parse_method(o.method);
    const auto xs = o.grid.xs();
    const auto values = spectrum_values(p, xs, method, o.threads);
    CsvTable t{{"x", "sigma"}, {}};
    for (std::size_t i = 0; i < xs.size(); ++i)
        t.rows.push_back({xs[i], values[i]});
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / (o.name + ".csv")).string(), format_csv(t));
    Manifest m = base_manifest("spectrum", p, o);
    m.set("opt.method", o.method);
    set_grid(m, o);
    finish(o, m, {o.name + ".csv"});
    return ok;
}

int run_angular(Options &o) {
    const ModelParams p = resolve_params(o, "angular");
    if (o.name.empty())
        o.name = "angular";
    if (o.thetas == 0)
        throw InvalidInput("--thetas must be positive");
    const AngularSpectrum a(p, build_profiles(p, o.family));
    const auto xs = o.grid.xs();
    std::vector<double> thetas;
    for (std::size_t k = 1; k <= o.thetas; ++k)
        thetas.push_back(pi * static_cast<double>(k) / static_cast<double>(o.thetas));
    std::vector<AngularResolvent> res;
    res.reserve(xs.size());
    for (double x : xs)
        res.push_back(a.at(x));
    CsvTable t{{"theta", "x", "sigma_plus", "sigma_minus"}, {}};
    for (double theta : thetas)
        for (std::size_t i = 0; i < xs.size(); ++i)
            t.rows.push_back({theta, xs[i], a.value(res[i], theta, Polarization::plus),
                              a.value(res[i], theta, Polarization::minus)});
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / (o.name + ".csv")).string(), format_csv(t));
    Manifest m = base_manifest("angular", p, o);
    m.set("opt.family", o.family);
    m.set("opt.thetas", std::to_string(o.thetas));
    set_grid(m, o);
    finish(o, m, {o.name + ".csv"});
    return ok;
}

int run_strength(Options &o) {
    const ModelParams p = resolve_params(o, "strength");
    if (o.name.empty())
        o.name = "strength";
    const double s = strength(p);
    std::cout << "strength = " << format_value(s) << "\n";
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / (o.name + ".csv")).string(),
                    format_csv(CsvTable{{"strength"}, {{s}}}));
    Manifest m = base_manifest("strength", p, o);
    finish(o, m, {o.name + ".csv"});
    return ok;
}

int run_sme(Options &o) {
    const ModelParams p = resolve_params(o, "sme");
    if (o.name.empty())
        o.name = "sme";
    TrajectoryConfig cfg;
    cfg.dt = o.dt;
    cfg.n_steps = o.steps;
    cfg.seed = o.seed;
    cfg.n_traj = o.n_traj;
    cfg.record_every = o.record_every;
    if (o.scheme == "exponential")
        cfg.scheme = SmeScheme::exponential_euler;
    else if (o.scheme == "euler")
        cfg.scheme = SmeScheme::euler_maruyama;
    else
        throw InvalidInput("unknown scheme '" + o.scheme + "' (exponential|euler)");
    ComplexMatrix rho0;
    if (o.rho0 == "ground")
        rho0 = ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}};
    else if (o.rho0 == "upper")
        rho0 = ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}};
    else
        throw InvalidInput("unknown initial state '" + o.rho0 + "' (ground|upper)");

    const std::vector<std::string> entries = {"rho11", "rho12", "rho21", "rho22"};
    CsvTable t;
    t.header.push_back("t");
    for (const auto &e : entries) {
        t.header.push_back(e + "_re");
        t.header.push_back(e + "_im");
    }
    auto flatten = [](std::vector<double> &row, const ComplexMatrix &r) {
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                row.push_back(r(i, j).real());
                row.push_back(r(i, j).imag());
            }
    };
    if (o.n_traj == 1) {
        const TrajectoryPath path = simulate_trajectory(p, rho0, cfg, cfg.seed);
        for (std::size_t k = 0; k < path.t.size(); ++k) {
            std::vector<double> row{path.t[k]};
            flatten(row, path.rho[k]);
            t.rows.push_back(std::move(row));
        }
    } else {
        const EnsembleResult e = ensemble_mean(p, rho0, cfg, o.threads);
        const auto oracle = mean_path_oracle(p, rho0, e.t);
        for (const auto &prefix : {"se_", "exact_"})
            for (const auto &en : entries) {
                t.header.push_back(prefix + en + "_re");
                t.header.push_back(prefix + en + "_im");
            }
        for (std::size_t k = 0; k < e.t.size(); ++k) {
            std::vector<double> row{e.t[k]};
            flatten(row, e.mean[k]);
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j) {
                    row.push_back(e.std_error[k](i, j).real());
                    row.push_back(e.std_error[k](i, j).imag());
                }
            flatten(row, oracle[k]);
            t.rows.push_back(std::move(row));
        }
        const ZScoreReport z = z_scores(e, oracle);
        std::cout << "max |z| = " << format_value(z.max_abs_z) << " (" << z.within_3 << " of "
                  << z.checked << " within 3)\n";
    }
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / (o.name + ".csv")).string(), format_csv(t));
    Manifest m = base_manifest("sme", p, o);
    m.set("opt.dt", format_exact(o.dt));
    m.set("opt.steps", std::to_string(o.steps));
    m.set("opt.seed", std::to_string(o.seed));
    m.set("opt.n_traj", std::to_string(o.n_traj));
    m.set("opt.record_every", std::to_string(o.record_every));
    m.set("opt.scheme", o.scheme);
    m.set("opt.rho0", o.rho0);
    finish(o, m, {o.name + ".csv"});
    return ok;
}

int run_figures(Options &o) {
    std::vector<int> figs;
    if (o.fig == "all")
        figs = figure_ids();
    else
        figs.push_back(static_cast<int>(parse_count(o.fig, "--fig")));
    const SpectrumMethod method = parse_method(o.method);
    for (int fig : figs) {
        const auto files = write_figure(fig, o.out, method, o.grid, o.threads);
        for (const auto &f : files)
            std::cout << (fs::path(o.out) / f).string() << "\n";
        std::cout << (fs::path(o.out) / figure_manifest_name(fig)).string() << "\n";
    }
    return ok;
}

int run_validate(Options &o) {
    SuiteOptions opt;
    opt.threads = o.threads;
    if (o.mutate == "usual")
        opt.mutation = Mutation::usual_coefficient;
    else if (o.mutate == "total")
        opt.mutation = Mutation::total_coefficient;
    else if (o.mutate != "none")
        throw InvalidInput("unknown mutation '" + o.mutate + "' (none|usual|total)");
    std::string report = "command=validate\nversion=" + std::string(version) +
                         "\nmutation=" + o.mutate + "\n";
    bool all = true;
    for (const Criterion &c : all_criteria()) {
        const CriterionResult r = run_criterion(c, opt);
        std::cout << (r.passed() ? "PASS" : "FAIL") << " " << r.id << " " << r.title << "\n";
        for (const SubCheck &s : r.checks)
            std::cout << "    " << format_check(s) << "\n";
        for (const auto &[k, v] : r.report)
            std::cout << "    " << k << " = " << format_value(v) << "\n";
        if (!r.error.empty())
            std::cout << "    error: " << r.error << "\n";
        report += report_lines(r);
        all = all && r.passed();
    }
    report += std::string("passed=") + (all ? "true" : "false") + "\n";
    fs::create_directories(o.out);
    const fs::path path = fs::path(o.out) / "validate_report.txt";
    write_text_file(path.string(), report);
    std::cout << path.string() << "\n";
    return all ? ok : suite_failed;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Resonance fluorescence spectra of a driven two-level atom"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    Options o;

    auto *spectrum = app.add_subcommand("spectrum", "total spectrum on a frequency grid");
    add_param_options(spectrum, o);
    add_output_options(spectrum, o);
    add_grid_options(spectrum, o);
    spectrum->add_option("--method", o.method)
        ->check(CLI::IsMember({"closed", "oracle"}))
        ->capture_default_str();

    auto *angular = app.add_subcommand("angular", "polarization-resolved spectra by direction");
    add_param_options(angular, o);
    add_output_options(angular, o);
    add_grid_options(angular, o);
    angular->add_option("--family", o.family, "profile family of the direct amplitudes")
        ->check(CLI::IsMember(profile_families()))
        ->capture_default_str();
    angular->add_option("--thetas", o.thetas, "angles k pi / N, k = 1..N")->capture_default_str();

    auto *strength_cmd = app.add_subcommand("strength", "integrated spectral strength");
    add_param_options(strength_cmd, o);
    add_output_options(strength_cmd, o);

    auto *sme = app.add_subcommand("sme", "stochastic master equation trajectories");
    add_param_options(sme, o);
    add_output_options(sme, o);
    sme->add_option("--dt", o.dt)->capture_default_str();
    sme->add_option("--steps", o.steps)->capture_default_str();
    sme->add_option("--seed", o.seed)->capture_default_str();
    sme->add_option("--n-traj", o.n_traj, "1: one path; otherwise ensemble mean (>= 100)")
        ->capture_default_str();
    sme->add_option("--record-every", o.record_every)->capture_default_str();
    sme->add_option("--scheme", o.scheme)
        ->check(CLI::IsMember({"exponential", "euler"}))
        ->capture_default_str();
    sme->add_option("--rho0", o.rho0)->check(CLI::IsMember({"ground", "upper"}))->capture_default_str();

    auto *figures = app.add_subcommand("figures", "datasets of the published figures");
    add_output_options(figures, o);
    add_grid_options(figures, o);
    figures->add_option("--fig", o.fig, "1, 2, 3, 4 or all")
        ->check(CLI::IsMember({"1", "2", "3", "4", "all"}))
        ->capture_default_str();
    figures->add_option("--method", o.method)
        ->check(CLI::IsMember({"closed", "oracle"}))
        ->capture_default_str();

    auto *validate_cmd = app.add_subcommand("validate", "run the cross-module check suite");
    add_output_options(validate_cmd, o);
    validate_cmd->add_option("--mutate", o.mutate, "flip one coefficient of a closed form")
        ->check(CLI::IsMember({"none", "usual", "total"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? ok : bad_input;
    }

    try {
        if (*spectrum)
            return run_spectrum(o);
        if (*angular)
            return run_angular(o);
        if (*strength_cmd)
            return run_strength(o);
        if (*sme)
            return run_sme(o);
        if (*figures)
            return run_figures(o);
        if (*validate_cmd)
            return run_validate(o);
    } catch (const InvalidInput &e) {
        std::cerr << "error: " << e.what() << "\n";
        return bad_input;
    } catch (const NumericalError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return numerical_failure;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return bad_input;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return numerical_failure;
    }
    return bad_input;
}
