#pragma once

// Run configuration: flat INI-style text with sections, expression strings
// quoted. Compiled-in presets are the acceptance fixtures. Everything is
// plain data so a run is reproducible from its config echo alone.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ghz/coefficients.hpp"
#include "ghz/effective.hpp"

namespace ghz {

struct RunConfig {
    // [problem]
    int dimension = 1;
    double alpha = 1.0;
    std::vector<double> omega_lo = {-1.0};
    std::vector<double> omega_hi = {1.0};
    std::vector<std::string> a_exprs = {"1"};  // row-major N x N
    std::vector<std::string> b_exprs = {"0"};  // N entries
    std::string c_expr = "0";

    // [study]
    std::vector<double> eps_list = {0.1, 0.05, 0.02};
    double interior_margin_frac = 0.05;  // of the box diameter
    unsigned long seed = 20240901;       // property-test reproducibility

    // [grids]
    int physical_n = 2048;
    int torus_n = 64;
    int weakkam_n = 512;
    int zgrid_n = 81;
    double z_radius = 2.0;

    // [tolerances]
    double solver_tol = 1e-10;
    double newton_tol = 1e-10;
    double hyper_tol = 1e-8;
    double aubry_tol_factor = 10.0;  // times the weak-KAM grid spacing
    int probe_density = 16;

    // [weakkam]
    double p_radius = 5.0;
    int p_density = 9;
    double sampled_p_radius = 40.0;
    int sampled_p_nodes = 129;
    std::vector<double> viscosity_schedule = {0.4, 0.2, 0.1};

    // [dynamics]
    int seeds_per_axis = 12;
    int orbit_seeds = 16;

    // [output]
    std::string output_dir = "out";

    std::string preset_name;  // informational

    void validate() const {
        if (dimension < 1 || dimension > 3)
            throw ConfigError("config: dimension must be 1, 2 or 3");
        if (omega_lo.size() != static_cast<std::size_t>(dimension) ||
            omega_hi.size() != static_cast<std::size_t>(dimension))
            throw ConfigError("config: omega bounds must have one entry per axis");
        if (a_exprs.size() != static_cast<std::size_t>(dimension * dimension))
            throw ConfigError("config: need N*N entries a11..aNN");
        if (b_exprs.size() != static_cast<std::size_t>(dimension))
            throw ConfigError("config: need N entries b1..bN");
        if (eps_list.empty()) throw ConfigError("config: eps list is empty");
        for (std::size_t i = 1; i < eps_list.size(); ++i)
            if (!(eps_list[i] < eps_list[i - 1]))
                throw ConfigError("config: eps list must be strictly decreasing");
        for (double e : eps_list)
            if (!(e > 0)) throw ConfigError("config: eps must be positive");
        if (!(solver_tol > 0 && newton_tol > 0 && hyper_tol > 0 && aubry_tol_factor > 0))
            throw ConfigError("config: tolerances must be positive");
        if (!(alpha > 0)) throw ConfigError("config: alpha must be positive");
        if (!(interior_margin_frac > 0 && interior_margin_frac < 0.5))
            throw ConfigError("config: interior margin fraction must lie in (0, 0.5)");
        if (zgrid_n < 9) throw ConfigError("config: z grid too coarse");
        if (!(z_radius > 0)) throw ConfigError("config: z radius must be positive");
    }

    BoxGrid physical_grid() const {
        return BoxGrid(omega_lo, omega_hi,
                       std::vector<int>(static_cast<std::size_t>(dimension), physical_n));
    }
    BoxGrid weakkam_grid() const {
        return BoxGrid(omega_lo, omega_hi,
                       std::vector<int>(static_cast<std::size_t>(dimension), weakkam_n));
    }

    CoefficientSet build_coefficients() const {
        std::vector<Expression> a, b;
        for (const auto& s : a_exprs) a.push_back(parse_expression(s));
        for (const auto& s : b_exprs) b.push_back(parse_expression(s));
        return validate_coefficient_set(std::move(a), std::move(b), parse_expression(c_expr),
                                        dimension, probe_density, omega_lo, omega_hi);
    }

    EffectiveContext effective_context() const {
        EffectiveContext ctx;
        ctx.coeffs = build_coefficients();
        ctx.regime = regime_for_alpha(alpha);
        ctx.torus = TorusGrid(dimension, torus_n);
        ctx.viscosity_schedule = viscosity_schedule;
        ctx.solver.tol = solver_tol;
        return ctx;
    }
};

/// Compiled-in presets; these are the acceptance-test fixtures.
inline RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.preset_name = name;
    if (name == "ou1d") {
        cfg.b_exprs = {"2*x1"};
    } else if (name == "doublewell1d") {
        cfg.b_exprs = {"4*x1^3 - x1"};
    } else if (name == "oscillating1d") {
        cfg.b_exprs = {"2*x1 + sin(2*pi*y1)"};
    } else if (name == "shear2d") {
        cfg.dimension = 2;
        cfg.omega_lo = {-1.0, -1.0};
        cfg.omega_hi = {1.0, 1.0};
        cfg.a_exprs = {"1", "0", "0", "1"};
        cfg.b_exprs = {"2*x1 + 0.5*sin(2*pi*y2)", "2*x2 + 0.5*sin(2*pi*y1)"};
        cfg.physical_n = 192;
        cfg.torus_n = 32;
        cfg.weakkam_n = 24;
        cfg.sampled_p_nodes = 17;
        cfg.sampled_p_radius = 12.0;
        cfg.seeds_per_axis = 6;
        cfg.orbit_seeds = 8;
        cfg.eps_list = {0.1, 0.05};
    } else {
        throw ConfigError("unknown preset '" + name + "' (have: ou1d, doublewell1d, "
                          "oscillating1d, shear2d)");
    }
    return cfg;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("config: cannot parse number '" + item + "' for key " + key);
        }
    }
    if (out.empty()) throw ConfigError("config: empty list for key " + key);
    return out;
}

inline double parse_number(const std::string& s, const std::string& key) {
    auto v = parse_number_list(s, key);
    if (v.size() != 1) throw ConfigError("config: expected a single number for key " + key);
    return v[0];
}

inline int parse_int(const std::string& s, const std::string& key) {
    double v = parse_number(s, key);
    if (v != std::floor(v)) throw ConfigError("config: expected an integer for key " + key);
    return static_cast<int>(v);
}

}  // namespace detail

/// Apply INI-style text over a base configuration. Sections group the keys;
/// unknown keys are hard errors.
inline RunConfig load_config_text(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    std::string line, section;
    std::map<std::string, std::string> kv;  // "section.key" -> value
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = detail::trim(t.substr(1, t.size() - 2));
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        kv[section + "." + key] = value;
    }

    // dimension first so the shaped keys can be sized
    if (auto it = kv.find("problem.dimension"); it != kv.end())
        base.dimension = detail::parse_int(it->second, "dimension");
    const int dim = base.dimension;
    if (base.a_exprs.size() != static_cast<std::size_t>(dim * dim))
        base.a_exprs.assign(static_cast<std::size_t>(dim * dim), "0");
    if (base.b_exprs.size() != static_cast<std::size_t>(dim))
        base.b_exprs.assign(static_cast<std::size_t>(dim), "0");

    for (const auto& [full, value] : kv) {
        if (full == "problem.dimension") continue;
        const std::string section = full.substr(0, full.find('.'));
        const std::string key = full.substr(full.find('.') + 1);
        auto expr_index = [&](char prefix, int max_i, int max_j) -> int {
            // a11..aNN / b1..bN style keys
            if (key.size() < 2 || key[0] != prefix) return -1;
            if (max_j == 0) {
                int i = key[1] - '0';
                if (key.size() != 2 || i < 1 || i > max_i) return -1;
                return i - 1;
            }
            if (key.size() != 3) return -1;
            int i = key[1] - '0', j = key[2] - '0';
            if (i < 1 || i > max_i || j < 1 || j > max_j) return -1;
            return (i - 1) * max_j + (j - 1);
        };

        if (section == "problem") {
            if (key == "alpha") base.alpha = detail::parse_number(value, key);
            else if (key == "omega_lo") base.omega_lo = detail::parse_number_list(value, key);
            else if (key == "omega_hi") base.omega_hi = detail::parse_number_list(value, key);
            else if (key == "c") base.c_expr = detail::unquote(value);
            else if (int ai = expr_index('a', dim, dim); ai >= 0)
                base.a_exprs[static_cast<std::size_t>(ai)] = detail::unquote(value);
            else if (int bi = expr_index('b', dim, 0); bi >= 0)
                base.b_exprs[static_cast<std::size_t>(bi)] = detail::unquote(value);
            else
                throw ConfigError("config: unknown key [problem] " + key);
        } else if (section == "study") {
            if (key == "eps") base.eps_list = detail::parse_number_list(value, key);
            else if (key == "interior_margin") base.interior_margin_frac = detail::parse_number(value, key);
            else if (key == "seed") base.seed = static_cast<unsigned long>(detail::parse_number(value, key));
            else throw ConfigError("config: unknown key [study] " + key);
        } else if (section == "grids") {
            if (key == "physical_n") base.physical_n = detail::parse_int(value, key);
            else if (key == "torus_n") base.torus_n = detail::parse_int(value, key);
            else if (key == "weakkam_n") base.weakkam_n = detail::parse_int(value, key);
            else if (key == "zgrid_n") base.zgrid_n = detail::parse_int(value, key);
            else if (key == "z_radius") base.z_radius = detail::parse_number(value, key);
            else throw ConfigError("config: unknown key [grids] " + key);
        } else if (section == "tolerances") {
            if (key == "solver_tol") base.solver_tol = detail::parse_number(value, key);
            else if (key == "newton_tol") base.newton_tol = detail::parse_number(value, key);
            else if (key == "hyper_tol") base.hyper_tol = detail::parse_number(value, key);
            else if (key == "aubry_tol_factor") base.aubry_tol_factor = detail::parse_number(value, key);
            else if (key == "probe_density") base.probe_density = detail::parse_int(value, key);
            else throw ConfigError("config: unknown key [tolerances] " + key);
        } else if (section == "weakkam") {
            if (key == "p_radius") base.p_radius = detail::parse_number(value, key);
            else if (key == "p_density") base.p_density = detail::parse_int(value, key);
            else if (key == "sampled_p_radius") base.sampled_p_radius = detail::parse_number(value, key);
            else if (key == "sampled_p_nodes") base.sampled_p_nodes = detail::parse_int(value, key);
            else if (key == "viscosity_schedule")
                base.viscosity_schedule = detail::parse_number_list(value, key);
            else throw ConfigError("config: unknown key [weakkam] " + key);
        } else if (section == "dynamics") {
            if (key == "seeds_per_axis") base.seeds_per_axis = detail::parse_int(value, key);
            else if (key == "orbit_seeds") base.orbit_seeds = detail::parse_int(value, key);
            else throw ConfigError("config: unknown key [dynamics] " + key);
        } else if (section == "output") {
            if (key == "directory") base.output_dir = detail::unquote(value);
            else throw ConfigError("config: unknown key [output] " + key);
        } else {
            throw ConfigError("config: unknown section [" + section + "]");
        }
    }
    return base;
}

/// Canonical echo; loading it back reproduces the configuration.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    char buf[40];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    auto list = [&](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
        return s;
    };
    os << "# ghz run configuration";
    if (!cfg.preset_name.empty()) os << " (preset " << cfg.preset_name << ")";
    os << "\n[problem]\n";
    os << "dimension = " << cfg.dimension << "\n";
    os << "alpha = " << num(cfg.alpha) << "\n";
    os << "omega_lo = " << list(cfg.omega_lo) << "\n";
    os << "omega_hi = " << list(cfg.omega_hi) << "\n";
    for (int i = 0; i < cfg.dimension; ++i)
        for (int j = 0; j < cfg.dimension; ++j)
            os << "a" << i + 1 << j + 1 << " = \""
               << cfg.a_exprs[static_cast<std::size_t>(i * cfg.dimension + j)] << "\"\n";
    for (int i = 0; i < cfg.dimension; ++i)
        os << "b" << i + 1 << " = \"" << cfg.b_exprs[static_cast<std::size_t>(i)] << "\"\n";
    os << "c = \"" << cfg.c_expr << "\"\n";
    os << "[study]\n";
    os << "eps = " << list(cfg.eps_list) << "\n";
    os << "interior_margin = " << num(cfg.interior_margin_frac) << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "[grids]\n";
    os << "physical_n = " << cfg.physical_n << "\n";
    os << "torus_n = " << cfg.torus_n << "\n";
    os << "weakkam_n = " << cfg.weakkam_n << "\n";
    os << "zgrid_n = " << cfg.zgrid_n << "\n";
    os << "z_radius = " << num(cfg.z_radius) << "\n";
    os << "[tolerances]\n";
    os << "solver_tol = " << num(cfg.solver_tol) << "\n";
    os << "newton_tol = " << num(cfg.newton_tol) << "\n";
    os << "hyper_tol = " << num(cfg.hyper_tol) << "\n";
    os << "aubry_tol_factor = " << num(cfg.aubry_tol_factor) << "\n";
    os << "probe_density = " << cfg.probe_density << "\n";
    os << "[weakkam]\n";
    os << "p_radius = " << num(cfg.p_radius) << "\n";
    os << "p_density = " << cfg.p_density << "\n";
    os << "sampled_p_radius = " << num(cfg.sampled_p_radius) << "\n";
    os << "sampled_p_nodes = " << cfg.sampled_p_nodes << "\n";
    os << "viscosity_schedule = " << list(cfg.viscosity_schedule) << "\n";
    os << "[dynamics]\n";
    os << "seeds_per_axis = " << cfg.seeds_per_axis << "\n";
    os << "orbit_seeds = " << cfg.orbit_seeds << "\n";
    os << "[output]\n";
    os << "directory = \"" << cfg.output_dir << "\"\n";
    return os.str();
}

}  // namespace ghz
