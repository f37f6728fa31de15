#pragma once

// Text formats: key = value parameter files, 12-significant-digit CSV
// and flat key=value run manifests.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace rfspec {

inline constexpr const char *version = "1.0.0";

/// Scientific notation with exactly 12 significant digits; -0 prints as 0.
inline std::string format_value(double v) {
    if (v == 0.0)
        v = 0.0;
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 11);
    if (r.ec != std::errc{})
        throw InvalidInput("cannot format value");
    return std::string(buf, r.ptr);
}

/// Shortest representation that parses back to the same double.
inline std::string format_exact(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    if (r.ec != std::errc{})
        throw InvalidInput("cannot format value");
    return std::string(buf, r.ptr);
}

inline double parse_value(std::string_view s, const std::string &what = "value") {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw InvalidInput(what + ": cannot parse '" + std::string(s) + "' as a number");
    return v;
}

// ---- parameter files ---------------------------------------------------

inline const std::vector<std::string> &param_keys() {
    static const std::vector<std::string> keys{
        "gamma",         "omega2",        "z",          "y",          "delta_plus",
        "delta_minus",   "g_plus_norm2",  "g_minus_norm2", "g_inner_re", "g_inner_im",
        "epsilon",       "laser_phase"};
    return keys;
}

inline std::vector<std::pair<std::string, double>> param_entries(const ModelParams &p) {
    return {{"gamma", p.gamma},
            {"omega2", p.omega2},
            {"z", p.z},
            {"y", p.y},
            {"delta_plus", p.delta_plus},
            {"delta_minus", p.delta_minus},
            {"g_plus_norm2", p.g_plus_norm2},
            {"g_minus_norm2", p.g_minus_norm2},
            {"g_inner_re", p.g_inner.real()},
            {"g_inner_im", p.g_inner.imag()},
            {"epsilon", p.epsilon},
            {"laser_phase", p.laser_phase}};
}

inline void set_param(ModelParams &p, const std::string &key, double v) {
    if (key == "gamma")
        p.gamma = v;
    else if (key == "omega2")
        p.omega2 = v;
    else if (key == "z")
        p.z = v;
    else if (key == "y")
        p.y = v;
    else if (key == "delta_plus")
        p.delta_plus = v;
    else if (key == "delta_minus")
        p.delta_minus = v;
    else if (key == "g_plus_norm2")
        p.g_plus_norm2 = v;
    else if (key == "g_minus_norm2")
        p.g_minus_norm2 = v;
    else if (key == "g_inner_re")
        p.g_inner.real(v);
    else if (key == "g_inner_im")
        p.g_inner.imag(v);
    else if (key == "epsilon")
        p.epsilon = v;
    else if (key == "laser_phase")
        p.laser_phase = v;
    else
        throw InvalidInput("unknown parameter '" + key + "'");
}

/// "key = value" lines; blank lines and '#' comments ignored. gamma,
/// omega2, z and y are required, the rest default to zero.
inline ModelParams parse_params(std::istream &in) {
    ModelParams p;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        if (seen[key]++)
            throw InvalidInput("parameter '" + key + "' given twice");
        set_param(p, key, parse_value(std::string_view(line).substr(eq + 1), key));
    }
    for (const char *req : {"gamma", "omega2", "z", "y"})
        if (!seen.count(req))
            throw InvalidInput(std::string("missing parameter '") + req + "'");
    return p;
}

inline ModelParams read_params_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open parameter file '" + path + "'");
    return parse_params(in);
}

inline std::string format_params(const ModelParams &p) {
    std::string out;
    for (const auto &[k, v] : param_entries(p))
        out += k + " = " + format_exact(v) + "\n";
    return out;
}

// ---- CSV -----------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline std::string format_csv(const CsvTable &t) {
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i)
        out += (i ? "," : "") + t.header[i];
    out += '\n';
    for (const auto &row : t.rows) {
        if (row.size() != t.header.size())
            throw InvalidInput("CSV row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            out += format_value(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline CsvTable parse_csv(const std::string &text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string &l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line))
        throw InvalidInput("empty CSV");
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        for (const auto &cell : split(line))
            row.push_back(parse_value(cell, "CSV cell"));
        if (row.size() != t.header.size())
            throw InvalidInput("CSV row width does not match header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InvalidInput("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw InvalidInput("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- manifests -------------------------------------------------------------

/// Ordered flat key/value record written as key=value lines.
struct Manifest {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string &key, const std::string &value) {
        for (auto &[k, v] : entries)
            if (k == key) {
                v = value;
                return;
            }
        entries.emplace_back(key, value);
    }
    const std::string *get(const std::string &key) const {
        for (const auto &[k, v] : entries)
            if (k == key)
                return &v;
        return nullptr;
    }
    void set_params(const ModelParams &p, const std::string &prefix = "param.") {
        for (const auto &[k, v] : param_entries(p))
            set(prefix + k, format_exact(v));
    }
    std::string str() const {
        std::string out;
        for (const auto &[k, v] : entries)
            out += k + "=" + v + "\n";
        return out;
    }
};

inline Manifest parse_manifest(const std::string &text) {
    Manifest m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("manifest line without '=': " + line);
        m.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
}

} // namespace rfspec
