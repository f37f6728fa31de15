#pragma once

// Spectrum datasets for the four published figures.

#include <filesystem>
#include <string>
#include <vector>

#include "io.hpp"
#include "model.hpp"
#include "spectrum.hpp"
#include "superop.hpp"

namespace rfspec {

enum class SpectrumMethod { closed, oracle };

inline std::string to_string(SpectrumMethod m) {
    return m == SpectrumMethod::closed ? "closed" : "oracle";
}

inline SpectrumMethod parse_method(const std::string &s) {
    if (s == "closed")
        return SpectrumMethod::closed;
    if (s == "oracle")
        return SpectrumMethod::oracle;
    throw InvalidInput("unknown method '" + s + "' (closed|oracle)");
}

struct GridSpec {
    double xmin = -15.0;
    double xmax = 15.0;
    std::size_t points = 1001;

    std::vector<double> xs() const { return linspace(xmin, xmax, points); }
};

inline std::vector<double> spectrum_values(const ModelParams &p, const std::vector<double> &xs,
                                           SpectrumMethod method, unsigned threads = 0) {
    if (method == SpectrumMethod::closed) {
        const TotalSpectrum s(p);
        return evaluate_grid([&](double x) { return s(x); }, xs, threads);
    }
    require_valid(p);
    return evaluate_grid([&](double x) { return sigma_oracle(p, x); }, xs, threads);
}

struct FigureCurve {
    std::string filename;
    std::string model; ///< usual or modified
    ModelParams params;
};

inline std::vector<int> figure_ids() { return {1, 2, 3, 4}; }

/// Curves of figure `fig`: figs 1-3 at z = 0, 2.5, -2.5 over the four
/// bandwidths; fig 4 at y = 50 over Omega^2 = 20, 40 and z = +-2.5.
inline std::vector<FigureCurve> figure_curves(int fig) {
    std::vector<FigureCurve> out;
    auto tag = [](double v) { return format_exact(v); };
    if (fig >= 1 && fig <= 3) {
        const double z = presets::figure_detunings[fig - 1];
        for (double y : presets::figure_bandwidths)
            for (bool modified : {false, true}) {
                const std::string model = modified ? "modified" : "usual";
                out.push_back({"fig" + std::to_string(fig) + "_y" + tag(y) + "_" + model + ".csv",
                               model, presets::make(modified, z, y)});
            }
    } else if (fig == 4) {
        for (double o2 : {20.0, 40.0})
            for (double z : {2.5, -2.5})
                for (bool modified : {false, true}) {
                    const std::string model = modified ? "modified" : "usual";
                    out.push_back({"fig4_O" + tag(o2) + "_z" + tag(z) + "_" + model + ".csv",
                                   model, presets::make(modified, z, 50.0, o2)});
                }
    } else {
        throw InvalidInput("figure must be 1, 2, 3 or 4");
    }
    return out;
}

inline std::string figure_manifest_name(int fig) {
    return "fig" + std::to_string(fig) + "_manifest.txt";
}

/// Writes the CSVs of one figure and its manifest into `dir`; returns the
/// CSV file names in write order.
inline std::vector<std::string> write_figure(int fig, const std::filesystem::path &dir,
                                             SpectrumMethod method, const GridSpec &grid,
                                             unsigned threads = 0) {
    std::filesystem::create_directories(dir);
    const auto xs = grid.xs();
    Manifest m;
    m.set("command", "figures");
    m.set("figure", std::to_string(fig));
    m.set("version", version);
    m.set("method", to_string(method));
    m.set("grid.xmin", format_exact(grid.xmin));
    m.set("grid.xmax", format_exact(grid.xmax));
    m.set("grid.points", std::to_string(grid.points));
    std::vector<std::string> files;
    for (const FigureCurve &c : figure_curves(fig)) {
        const auto values = spectrum_values(c.params, xs, method, threads);
        CsvTable t{{"x", "sigma"}, {}};
        t.rows.reserve(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            t.rows.push_back({xs[i], values[i]});
        write_text_file((dir / c.filename).string(), format_csv(t));
        const std::string stem = c.filename.substr(0, c.filename.size() - 4);
        m.set_params(c.params, stem + ".param.");
        files.push_back(c.filename);
    }
    std::string list;
    for (const auto &f : files)
        list += (list.empty() ? "" : ";") + f;
    m.set("files", list);
    write_text_file((dir / figure_manifest_name(fig)).string(), m.str());
    return files;
}

} // namespace rfspec
