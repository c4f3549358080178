#pragma once

// Experiment configuration: INI-style sections
//
//   [mesh] [boundary] [coefficient] [solver] [gmsfem] [output]
//
// with `key = value` lines and ';' or '#' comments. Every key is optional
// (defaults reproduce the 100x100 / 10x10 setup); unknown sections or keys
// are errors. Strings may be double-quoted and lists bracketed, so simple
// TOML files parse as well.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "damgms/driver.hpp"
#include "damgms/errors.hpp"
#include "damgms/grid.hpp"
#include "damgms/permeability.hpp"

namespace damgms {

struct MeshSpec {
    int nx = 100;
    int ny = 100;
    int coarse_nx = 10;
    int coarse_ny = 10;
};

enum class CoefficientFamily { Constant, Horizontal, Vertical, ChannelsInclusions, File };

inline const char* to_string(CoefficientFamily f) {
    switch (f) {
        case CoefficientFamily::Constant: return "constant";
        case CoefficientFamily::Horizontal: return "horizontal";
        case CoefficientFamily::Vertical: return "vertical";
        case CoefficientFamily::ChannelsInclusions: return "channels_inclusions";
        case CoefficientFamily::File: return "file";
    }
    return "?";
}

struct CoefficientSpec {
    CoefficientFamily family = CoefficientFamily::ChannelsInclusions;
    double background = 1.0;
    double high = 100.0;
    std::uint64_t seed = 0;
    std::string path;  // family = file
    InclusionFieldSpec inclusions;
};

enum class FieldFormat { Csv, Vtk, Both };

struct OutputSpec {
    std::string dir = "out";
    FieldFormat format = FieldFormat::Csv;
    bool fields = true;
};

struct ExperimentConfig {
    MeshSpec mesh;
    BoundaryPartition boundary = BoundaryPartition::dam();
    CoefficientSpec coefficient;
    SolverConfig solver;
    std::vector<int> li{1, 2, 4, 6, 8, 10};
    OutputSpec output;

    /// Flat `section.key = value` listing of every setting, for manifests.
    std::map<std::string, std::string> echo() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

// Shortest %g form that reads back to the same double.
inline std::string fmt(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// Reads typed values out of one ptree section, remembering which keys
/// were consumed so leftovers can be reported.
class SectionReader {
public:
    SectionReader(const boost::property_tree::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    template <class T>
    void read(const std::string& key, T& out) {
        const auto raw = raw_value(key);
        if (!raw) return;
        const std::string text = unquote(*raw);
        if constexpr (std::is_unsigned_v<T>) {
            if (text.find('-') != std::string::npos) {
                throw ConfigError("[" + name_ + "] " + key + ": cannot read '" + text + "' as " + type_name<T>());
            }
        }
        std::istringstream in(text);
        T value{};
        in >> value;
        if (in.fail() || (in >> std::ws, !in.eof()) || text.empty()) {
            throw ConfigError("[" + name_ + "] " + key + ": cannot read '" + text + "' as " + type_name<T>());
        }
        out = value;
    }

    void read(const std::string& key, bool& out) {
        const auto raw = raw_value(key);
        if (!raw) return;
        const std::string text = unquote(*raw);
        if (text == "true" || text == "1" || text == "yes" || text == "on") {
            out = true;
        } else if (text == "false" || text == "0" || text == "no" || text == "off") {
            out = false;
        } else {
            throw ConfigError("[" + name_ + "] " + key + ": expected a boolean, got '" + text + "'");
        }
    }

    void read(const std::string& key, std::string& out) {
        const auto raw = raw_value(key);
        if (raw) out = unquote(*raw);
    }

    void read_list(const std::string& key, std::vector<int>& out) {
        const auto raw = raw_value(key);
        if (!raw) return;
        std::string text = unquote(*raw);
        if (!text.empty() && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
        std::vector<int> values;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            std::istringstream in(item);
            int v = 0;
            in >> v;
            if (in.fail() || (in >> std::ws, !in.eof())) {
                throw ConfigError("[" + name_ + "] " + key + ": '" + item + "' is not an integer");
            }
            values.push_back(v);
        }
        out = std::move(values);
    }

    bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

    void reject_unknown() const {
        if (!tree_) return;
        for (const auto& [key, child] : *tree_) {
            if (!used_.count(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
        }
    }

private:
    std::optional<std::string> raw_value(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        const auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        return it->second.data();
    }

    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, int>) return "an integer";
        if constexpr (std::is_same_v<T, double>) return "a number";
        if constexpr (std::is_same_v<T, std::uint64_t>) return "a nonnegative integer";
        return "a value";
    }

    const boost::property_tree::ptree* tree_;
    std::string name_;
    std::set<std::string> used_;
};

inline CoefficientFamily parse_family(const std::string& s) {
    if (s == "constant") return CoefficientFamily::Constant;
    if (s == "horizontal") return CoefficientFamily::Horizontal;
    if (s == "vertical") return CoefficientFamily::Vertical;
    if (s == "channels_inclusions") return CoefficientFamily::ChannelsInclusions;
    if (s == "file") return CoefficientFamily::File;
    throw ConfigError("[coefficient] family: unknown value '" + s +
                      "' (constant, horizontal, vertical, channels_inclusions, file)");
}

inline Mode parse_mode(const std::string& s) {
    if (s == "fine") return Mode::Fine;
    if (s == "gmsfem") return Mode::Gmsfem;
    throw ConfigError("mode: unknown value '" + s + "' (fine, gmsfem)");
}

inline FieldFormat parse_format(const std::string& s) {
    if (s == "csv") return FieldFormat::Csv;
    if (s == "vtk") return FieldFormat::Vtk;
    if (s == "both") return FieldFormat::Both;
    throw ConfigError("[output] format: unknown value '" + s + "' (csv, vtk, both)");
}

inline const char* format_name(FieldFormat f) {
    return f == FieldFormat::Csv ? "csv" : f == FieldFormat::Vtk ? "vtk" : "both";
}

inline InitialSaturation parse_initial(const std::string& s) {
    if (s == "below_heads") return InitialSaturation::BelowHeads;
    if (s == "full") return InitialSaturation::Full;
    throw ConfigError("[solver] initial: unknown value '" + s + "' (below_heads, full)");
}

}  // namespace detail

/// Parses config text; `source` only labels error messages.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
    namespace pt = boost::property_tree;
    pt::ptree root;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    static const std::set<std::string> sections = {"mesh", "boundary", "coefficient", "solver", "gmsfem", "output"};
    for (const auto& [name, child] : root) {
        if (child.empty() && !child.data().empty()) {
            throw ConfigError(source + ": key '" + name + "' outside of any section");
        }
        if (!sections.count(name)) throw ConfigError(source + ": unknown section [" + name + "]");
    }
    auto section = [&](const std::string& name) {
        const auto it = root.find(name);
        return detail::SectionReader(it == root.not_found() ? nullptr : &it->second, name);
    };

    ExperimentConfig cfg;

    auto mesh = section("mesh");
    mesh.read("nx", cfg.mesh.nx);
    mesh.read("ny", cfg.mesh.ny);
    mesh.read("coarse_nx", cfg.mesh.coarse_nx);
    mesh.read("coarse_ny", cfg.mesh.coarse_ny);
    mesh.reject_unknown();

    auto boundary = section("boundary");
    auto& b = cfg.boundary;
    boundary.read("head_left", b.head_left);
    boundary.read("head_right", b.head_right);
    b.left_wet_height = b.head_left;
    b.right_wet_height = b.head_right;
    boundary.read("wet_left", b.left_wet_height);
    boundary.read("wet_right", b.right_wet_height);
    boundary.read("top_dirichlet", b.top_dirichlet);
    boundary.read("top_value", b.top_value);
    boundary.reject_unknown();

    auto coef = section("coefficient");
    std::string family = to_string(cfg.coefficient.family);
    coef.read("family", family);
    cfg.coefficient.family = detail::parse_family(family);
    coef.read("background", cfg.coefficient.background);
    coef.read("high", cfg.coefficient.high);
    coef.read("seed", cfg.coefficient.seed);
    coef.read("path", cfg.coefficient.path);
    auto& inc = cfg.coefficient.inclusions;
    coef.read("horizontal_channels", inc.horizontal_channels);
    coef.read("vertical_channels", inc.vertical_channels);
    coef.read("inclusions", inc.inclusions);
    coef.read("window_lo", inc.window_lo);
    coef.read("window_hi", inc.window_hi);
    if (cfg.coefficient.family == CoefficientFamily::File && cfg.coefficient.path.empty()) {
        throw ConfigError("[coefficient] path: required when family = file");
    }
    coef.reject_unknown();

    auto solver = section("solver");
    auto& s = cfg.solver;
    solver.read("dt", s.dt);
    solver.read("g", s.g);
    solver.read("omega1", s.seepage.omega);
    solver.read("lambda1", s.seepage.lambda);
    solver.read("omega2", s.saturation.omega);
    solver.read("lambda2", s.saturation.lambda);
    solver.read("tolerance", s.tolerance);
    solver.read("max_steps", s.max_steps);
    solver.read("fixed_point_iterations", s.fixed_point_iterations);
    std::string mode = to_string(s.mode);
    solver.read("mode", mode);
    s.mode = detail::parse_mode(mode);
    std::string initial = s.initial == InitialSaturation::Full ? "full" : "below_heads";
    solver.read("initial", initial);
    s.initial = detail::parse_initial(initial);
    solver.reject_unknown();

    auto gms = section("gmsfem");
    gms.read_list("li", cfg.li);
    gms.reject_unknown();
    for (int v : cfg.li) {
        if (v < 1) throw ConfigError("[gmsfem] li: entries must be >= 1, got " + std::to_string(v));
    }
    if (!cfg.li.empty()) s.enrichment = cfg.li.front();

    auto out = section("output");
    out.read("dir", cfg.output.dir);
    std::string format = detail::format_name(cfg.output.format);
    out.read("format", format);
    cfg.output.format = detail::parse_format(format);
    out.read("fields", cfg.output.fields);
    out.reject_unknown();

    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("[solver] ") + e.what());
    }
    if (cfg.mesh.nx < 1 || cfg.mesh.ny < 1 || cfg.mesh.coarse_nx < 1 || cfg.mesh.coarse_ny < 1) {
        throw ConfigError("[mesh] element counts must be positive");
    }
    if (cfg.mesh.nx % cfg.mesh.coarse_nx || cfg.mesh.ny % cfg.mesh.coarse_ny) {
        throw ConfigError("[mesh] coarse_nx/coarse_ny must divide nx/ny");
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

inline std::map<std::string, std::string> ExperimentConfig::echo() const {
    using detail::fmt;
    std::string li_list;
    for (std::size_t k = 0; k < li.size(); ++k) li_list += (k ? "," : "") + std::to_string(li[k]);
    return {
        {"mesh.nx", std::to_string(mesh.nx)},
        {"mesh.ny", std::to_string(mesh.ny)},
        {"mesh.coarse_nx", std::to_string(mesh.coarse_nx)},
        {"mesh.coarse_ny", std::to_string(mesh.coarse_ny)},
        {"boundary.head_left", fmt(boundary.head_left)},
        {"boundary.head_right", fmt(boundary.head_right)},
        {"boundary.wet_left", fmt(boundary.left_wet_height)},
        {"boundary.wet_right", fmt(boundary.right_wet_height)},
        {"boundary.top_dirichlet", boundary.top_dirichlet ? "true" : "false"},
        {"boundary.top_value", fmt(boundary.top_value)},
        {"coefficient.family", to_string(coefficient.family)},
        {"coefficient.background", fmt(coefficient.background)},
        {"coefficient.high", fmt(coefficient.high)},
        {"coefficient.seed", std::to_string(coefficient.seed)},
        {"coefficient.path", coefficient.path},
        {"coefficient.horizontal_channels", std::to_string(coefficient.inclusions.horizontal_channels)},
        {"coefficient.vertical_channels", std::to_string(coefficient.inclusions.vertical_channels)},
        {"coefficient.inclusions", std::to_string(coefficient.inclusions.inclusions)},
        {"coefficient.window_lo", fmt(coefficient.inclusions.window_lo)},
        {"coefficient.window_hi", fmt(coefficient.inclusions.window_hi)},
        {"solver.dt", fmt(solver.dt)},
        {"solver.g", fmt(solver.g)},
        {"solver.omega1", fmt(solver.seepage.omega)},
        {"solver.lambda1", fmt(solver.seepage.lambda)},
        {"solver.omega2", fmt(solver.saturation.omega)},
        {"solver.lambda2", fmt(solver.saturation.lambda)},
        {"solver.tolerance", fmt(solver.tolerance)},
        {"solver.max_steps", std::to_string(solver.max_steps)},
        {"solver.fixed_point_iterations", std::to_string(solver.fixed_point_iterations)},
        {"solver.mode", to_string(solver.mode)},
        {"solver.initial", solver.initial == InitialSaturation::Full ? "full" : "below_heads"},
        {"gmsfem.li", li_list},
        {"output.dir", output.dir},
        {"output.format", detail::format_name(output.format)},
        {"output.fields", output.fields ? "true" : "false"},
    };
}

inline FineMesh build_fine_mesh(const ExperimentConfig& cfg) {
    return build_fine_mesh(cfg.mesh.nx, cfg.mesh.ny, cfg.boundary);
}

inline PermeabilityField build_coefficient(const FineMesh& mesh, const CoefficientSpec& spec) {
    switch (spec.family) {
        case CoefficientFamily::Constant:
            return PermeabilityField::constant(mesh, spec.background);
        case CoefficientFamily::Horizontal:
            return gen_horizontal_channels(mesh, default_horizontal_channels(), spec.background, spec.high);
        case CoefficientFamily::Vertical:
            return gen_vertical_channels(mesh, default_vertical_channels(), spec.background, spec.high);
        case CoefficientFamily::ChannelsInclusions:
            return gen_channels_and_inclusions(mesh, spec.seed, spec.inclusions, spec.background, spec.high);
        case CoefficientFamily::File:
            return load_field(mesh, spec.path);
    }
    throw InvalidArgument("unknown coefficient family");
}

}  // namespace damgms
