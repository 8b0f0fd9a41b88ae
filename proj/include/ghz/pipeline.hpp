#pragma once

// Experiment orchestration: the convergence study (effective objects, fixed
// points, sigma_bar, weak-KAM side, then the eps sweep of principal
// eigenpairs compared against the selected solution), the blow-up profile
// check, and deterministic CSV/report emission.

#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <optional>

#include "ghz/config.hpp"
#include "ghz/dynamics.hpp"
#include "ghz/weak_kam.hpp"

namespace ghz {

struct AssertionRecord {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct EpsRecord {
    double eps = 0.0;
    double lambda = 0.0;
    double lambda_over_eps = 0.0;
    double residual = 0.0;
    long iterations = 0;
    double w_sup_err = std::numeric_limits<double>::quiet_NaN();
    bool coarse_grid_warning = false;
};

struct BlowupRecord {
    bool present = false;
    double eps = 0.0;
    double profile_sup_err = 0.0;  // sup over |z| <= Z0 of |w_eps - exp(-z G z)|
    double fitted_mu = 0.0;        // growth-envelope exponent along stable directions
    bool envelope_checked = false; // false when there is no stable direction
    bool envelope_ok = false;
};

struct RunReport {
    RunConfig config;
    bool c_zero = false;
    double ellipticity = 0.0;

    // effective/dynamics side (meaningful when selection ran)
    bool selection_ran = false;
    std::vector<FixedPoint> fixed_points;
    SigmaBarResult sigma;
    Eigen::VectorXd xi_bar;
    Eigen::MatrixXd q_matrix;      // at xi_bar
    Eigen::MatrixXd gamma_matrix;  // Bernoulli solution at xi_bar
    double sigma_from_ou = 0.0;    // -2 tr(Q Gamma)
    StructureReport structure;

    // weak-KAM side
    double lambda_hbar = 0.0;
    Eigen::MatrixXd s_matrix;
    std::vector<bool> aubry_confirmed;
    bool unique_solution = false;
    BoxGrid wk_grid;
    Eigen::VectorXd w_selected;    // empty when selection did not run

    std::vector<EpsRecord> eps_records;
    BlowupRecord blowup;

    std::vector<AssertionRecord> assertions;
    std::vector<std::string> warnings;
};

namespace detail {

// Module failures surface with the pipeline stage that hit them.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("stage '") + name + "': " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string("stage '") + name + "': " + e.what());
    } catch (const EvalError& e) {
        throw NumericError(std::string("stage '") + name + "': " + e.what());
    }
}

inline void record(RunReport& rep, const std::string& name, double measured, double bound,
                   bool pass) {
    rep.assertions.push_back({name, measured, bound, pass});
    if (!pass) rep.warnings.push_back("assertion '" + name + "' failed: measured " +
                                      std::to_string(measured) + " vs bound " +
                                      std::to_string(bound));
}

struct EffectiveSide {
    EffectiveContext ctx;
    std::unique_ptr<DriftField> drift;  // holds a mutex, so heap-owned
    std::vector<FixedPoint> fixed_points;
    SigmaBarResult sigma;
    Eigen::VectorXd xi_bar;
    Eigen::MatrixXd q, gamma;
    double sigma_ou = 0.0;
};

// Shared front half of study/blowup: effective drift, fixed points,
// sigma_bar, Q and the Bernoulli solution at the maximizer.
inline EffectiveSide effective_side(const RunConfig& cfg, RunReport& rep) {
    EffectiveSide side;
    side.ctx = cfg.effective_context();
    const Regime regime = side.ctx.regime;
    if (regime == Regime::Subcritical)
        throw ConfigError("study: the selection machinery requires alpha >= 1");
    if (!side.ctx.coeffs.c_zero)
        throw ConfigError("study: the eps sigma_bar expansion requires c == 0");

    rep.c_zero = side.ctx.coeffs.c_zero;
    rep.ellipticity = side.ctx.coeffs.ellipticity;

    side.drift = std::make_unique<DriftField>(side.ctx, selection_drift_scale(regime));
    const BoxGrid box = cfg.weakkam_grid();
    FixedPointOptions fpo;
    fpo.newton_tol = cfg.newton_tol;
    fpo.hyper_tol = cfg.hyper_tol;
    auto dmap = drift_map(*side.drift, 1e-4 * box.diameter());
    side.fixed_points = stage("fixed points", [&] {
        return find_fixed_points(dmap, box, cfg.seeds_per_axis, fpo);
    });
    if (side.fixed_points.empty())
        throw NumericError("study: no fixed points of the effective drift in the box");
    for (const auto& fp : side.fixed_points)
        record(rep, "fixed point residual", fp.drift_residual, 10 * cfg.newton_tol,
               fp.drift_residual <= 10 * cfg.newton_tol);

    side.sigma = stage("sigma_bar", [&] { return sigma_bar(side.fixed_points); });
    const FixedPoint& max_fp = side.fixed_points[side.sigma.maximizers.front()];
    side.xi_bar = max_fp.location;

    HamiltonianTable table(side.ctx);
    side.q = stage("hessian Q", [&] { return hessian_Q(table, side.xi_bar); });
    auto ou = stage("bernoulli at xi_bar",
                    [&] { return ou_sigma(max_fp.b_matrix, side.q, cfg.hyper_tol); });
    side.gamma = ou.gamma;
    side.sigma_ou = ou.sigma;
    record(rep, "sigma_bar equals -2 tr(Q Gamma)", std::abs(side.sigma.sigma_bar - ou.sigma),
           1e-8, std::abs(side.sigma.sigma_bar - ou.sigma) <= 1e-8);

    rep.selection_ran = true;
    rep.fixed_points = side.fixed_points;
    rep.sigma = side.sigma;
    rep.xi_bar = side.xi_bar;
    rep.q_matrix = side.q;
    rep.gamma_matrix = side.gamma;
    rep.sigma_from_ou = side.sigma_ou;
    return side;
}

inline HbarFn exact_hbar_fn(const HamiltonianTable& table) {
    return [&table](const Eigen::VectorXd& p, const Eigen::VectorXd& x) {
        return table.value(p, x);
    };
}

}  // namespace detail

/// Full study: effective objects, weak-KAM side, eps sweep, comparisons.
inline RunReport run_convergence_study(const RunConfig& cfg) {
    cfg.validate();
    RunReport rep;
    rep.config = cfg;

    detail::EffectiveSide side =
        detail::stage("effective side", [&] { return detail::effective_side(cfg, rep); });
    const int dim = cfg.dimension;

    // structural hypothesis diagnostic on the cheap interpolated drift
    {
        const BoxGrid lattice(cfg.omega_lo, cfg.omega_hi,
                              std::vector<int>(static_cast<std::size_t>(dim), 64));
        auto itp = side.drift->interpolant(lattice);
        DriftMap cheap{[itp](const Eigen::VectorXd& x) { return itp(x); },
                       [&](const Eigen::VectorXd& x) { return side.drift->jacobian_B(x, 1e-4); }};
        rep.structure = detail::stage("structure check", [&] {
            return verify_structure(cheap, side.fixed_points, cfg.weakkam_grid(),
                                    cfg.orbit_seeds);
        });
    }

    // Hamiltonian table, resolution trust check, weak-KAM side
    HamiltonianTable table(side.ctx);
    {
        Eigen::VectorXd probe_p = Eigen::VectorXd::Constant(dim, 0.5);
        Eigen::VectorXd center(dim);
        for (int k = 0; k < dim; ++k)
            center[k] = 0.5 * (cfg.omega_lo[static_cast<std::size_t>(k)] +
                               cfg.omega_hi[static_cast<std::size_t>(k)]);
        const double shift = table.resolution_shift(
            std::span<const double>(probe_p.data(), probe_p.size()),
            std::span<const double>(center.data(), center.size()));
        if (shift >= 1e-5)
            rep.warnings.push_back("torus resolution check: doubling shifts Hbar by " +
                                   std::to_string(shift));
    }

    const BoxGrid wk_grid = cfg.weakkam_grid();
    rep.wk_grid = wk_grid;
    const double h = wk_grid.max_spacing();

    LagrangianOptions lopt;
    lopt.p_radius = cfg.p_radius;
    lopt.p_density = cfg.p_density;
    HbarFn exact = detail::exact_hbar_fn(table);
    std::optional<SampledHamiltonian> sampled;
    if (dim >= 2 && !side.ctx.coeffs.y_independent)
        rep.warnings.push_back("2D weak-KAM table build with y-dependent coefficients is "
                               "expensive at this scale");
    sampled.emplace(exact, wk_grid, cfg.sampled_p_radius, cfg.sampled_p_nodes);
    LagrangianEvaluator lag(
        [&s = *sampled](const Eigen::VectorXd& p, const Eigen::VectorXd& x) { return s(p, x); },
        dim, lopt);

    PathGraph graph = detail::stage(
        "path graph", [&] { return build_path_graph(wk_grid, lag, side.ctx.coeffs.c_zero); });
    rep.lambda_hbar =
        detail::stage("additive eigenvalue", [&] { return additive_eigenvalue(graph); });
    detail::record(rep, "c == 0: |lambda_Hbar| = O(h)", std::abs(rep.lambda_hbar), 10 * h,
                   std::abs(rep.lambda_hbar) <= 10 * h);

    std::vector<Eigen::VectorXd> candidates;
    for (const auto& fp : side.fixed_points) candidates.push_back(fp.location);
    AubryResult aubry = detail::stage("aubry set", [&] {
        return aubry_set(graph, rep.lambda_hbar, candidates, cfg.aubry_tol_factor * h);
    });
    rep.s_matrix = aubry.s_matrix;
    for (const auto& c : aubry.candidates) rep.aubry_confirmed.push_back(c.confirmed);
    rep.unique_solution = uniqueness_check(aubry.s_matrix, aubry.tolerance);

    rep.w_selected = detail::stage("selected solution", [&] {
        return selected_solution(aubry, side.sigma.maximizers.front(), side.sigma.unique);
    });

    // eps sweep: independent jobs, reduced in list order
    const BoxGrid fine = cfg.physical_grid();
    const double margin = cfg.interior_margin_frac * fine.diameter();
    auto run_eps = [&](double eps) {
        EpsRecord r;
        r.eps = eps;
        auto op = assemble_dirichlet(side.ctx.coeffs, fine, eps, cfg.alpha);
        r.coarse_grid_warning = op.coarse_grid_warning;
        EigenSolveOptions eopts;
        eopts.tol = cfg.solver_tol;
        auto pair = principal_eigenpair(op, 0.0, eopts);
        r.lambda = pair.lambda;
        r.lambda_over_eps = pair.lambda / eps;
        r.residual = pair.residual;
        r.iterations = pair.iterations;

        Eigen::VectorXd w_eps = log_transform(pair, eps);
        BoxFunction w_field = scatter_to_grid(op, w_eps, std::numeric_limits<double>::quiet_NaN());
        double sup = 0.0;
        for (long i = 0; i < wk_grid.node_count(); ++i) {
            const std::vector<double> x = wk_grid.node(wk_grid.unindex(i));
            bool interior = true;
            for (int k = 0; k < dim; ++k)
                if (x[static_cast<std::size_t>(k)] < fine.lo[static_cast<std::size_t>(k)] + margin ||
                    x[static_cast<std::size_t>(k)] > fine.hi[static_cast<std::size_t>(k)] - margin)
                    interior = false;
            if (!interior) continue;
            const double we = interpolate(w_field, x);
            if (std::isnan(we)) throw NumericError("study: W_eps interpolation touched the boundary");
            sup = std::max(sup, std::abs(we - rep.w_selected[i]));
        }
        r.w_sup_err = sup;
        return r;
    };

    std::vector<std::future<EpsRecord>> jobs;
    for (double eps : cfg.eps_list)
        jobs.push_back(std::async(std::launch::async, run_eps, eps));
    for (auto& j : jobs)
        rep.eps_records.push_back(detail::stage("eps sweep", [&] { return j.get(); }));

    for (const auto& r : rep.eps_records) {
        detail::record(rep, "c == 0: lambda_eps < 0", r.lambda, 0.0, r.lambda < 0.0);
        const bool soft = r.lambda_over_eps >= side.sigma.sigma_bar - 0.5;
        if (!soft)
            rep.warnings.push_back("soft check: lambda_eps/eps = " +
                                   std::to_string(r.lambda_over_eps) + " below sigma_bar - 0.5");
        if (r.coarse_grid_warning)
            rep.warnings.push_back("eps = " + std::to_string(r.eps) +
                                   ": fewer than 4 nodes per fast oscillation");
    }
    return rep;
}

/// Blow-up profile check at one eps: the rescaled eigenfunction against its
/// Gaussian limit.
inline BlowupRecord run_blowup_check(const RunConfig& cfg, double eps, RunReport* report = nullptr) {
    cfg.validate();
    RunReport local;
    RunReport& rep = report ? *report : local;
    if (!rep.selection_ran) {
        rep.config = cfg;
        detail::effective_side(cfg, rep);
    }

    const int dim = cfg.dimension;
    const Eigen::VectorXd& xi = rep.xi_bar;
    const BoxGrid fine = cfg.physical_grid();

    auto op = assemble_dirichlet(cfg.build_coefficients(), fine, eps, cfg.alpha);
    EigenSolveOptions eopts;
    eopts.tol = cfg.solver_tol;
    auto pair = principal_eigenpair(op, 0.0, eopts);
    // Dirichlet boundary values are exactly zero for the rescaling field
    BoxFunction u = scatter_to_grid(op, pair.eigenfunction, 0.0);

    BoxFunction w = blowup_rescale(u, std::span<const double>(xi.data(), xi.size()), eps,
                                   cfg.z_radius, cfg.zgrid_n);

    BlowupRecord rec;
    rec.present = true;
    rec.eps = eps;

    ProjectorPair pp = spectral_projectors(rep.fixed_points[rep.sigma.maximizers.front()].b_matrix,
                                           cfg.hyper_tol);
    double sup = 0.0;
    double mu_fit = std::numeric_limits<double>::infinity();
    bool any_stable_sample = false;
    const double nu = 0.1;
    for (long i = 0; i < w.grid.node_count(); ++i) {
        const std::vector<double> zv = w.grid.node(w.grid.unindex(i));
        Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(zv.data(), dim);
        if (z.norm() > cfg.z_radius + 1e-12) continue;
        const double ref = std::exp(-z.dot(rep.gamma_matrix * z));
        sup = std::max(sup, std::abs(w.values[i] - ref));
        const double zs = (pp.pi_s.transpose() * z).norm();
        const double zu = (pp.pi_u.transpose() * z).norm();
        if (zs >= 0.5 && w.values[i] > 0) {
            any_stable_sample = true;
            mu_fit = std::min(mu_fit, (-std::log(w.values[i]) + nu * zu * zu) / (zs * zs));
        }
    }
    rec.profile_sup_err = sup;
    if (pp.dim_stable == 0 || !any_stable_sample) {
        rec.envelope_checked = false;
        rec.envelope_ok = true;  // vacuous: no stable direction to bound
        rec.fitted_mu = 0.0;
    } else {
        rec.envelope_checked = true;
        rec.fitted_mu = mu_fit;
        rec.envelope_ok = mu_fit > 0.0;
    }
    rep.blowup = rec;
    return rec;
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_field_csv(const std::filesystem::path& path, const BoxGrid& grid,
                            const Eigen::VectorXd& values, const std::string& value_name,
                            int dim) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string());
    for (int k = 1; k <= dim; ++k) os << "x" << k << ",";
    os << value_name << "\n";
    if (values.size() == 0) return;  // headers only
    for (long i = 0; i < grid.node_count(); ++i) {
        const std::vector<double> x = grid.node(grid.unindex(i));
        for (int k = 0; k < dim; ++k) os << fmt17(x[static_cast<std::size_t>(k)]) << ",";
        os << fmt17(values[i]) << "\n";
    }
}

}  // namespace detail

/// Write lambda.csv, distance.csv, W.csv, report.txt and the config echo.
/// Deterministic and byte-stable for identical inputs.
inline void emit_outputs(const RunReport& rep, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw IoError("cannot create output directory " + directory + ": " + ec.message());
    const fs::path dir(directory);
    const int dim = rep.config.dimension;

    {
        std::ofstream os(dir / "lambda.csv", std::ios::binary);
        if (!os) throw IoError("cannot open " + (dir / "lambda.csv").string());
        os << "eps,lambda,lambda_over_eps,sigma_bar,W_sup_err\n";
        for (const auto& r : rep.eps_records)
            os << detail::fmt17(r.eps) << "," << detail::fmt17(r.lambda) << ","
               << detail::fmt17(r.lambda_over_eps) << ","
               << detail::fmt17(rep.selection_ran ? rep.sigma.sigma_bar
                                                  : std::numeric_limits<double>::quiet_NaN())
               << "," << detail::fmt17(r.w_sup_err) << "\n";
    }
    detail::write_field_csv(dir / "distance.csv", rep.wk_grid, rep.w_selected, "d", dim);
    detail::write_field_csv(dir / "W.csv", rep.wk_grid, rep.w_selected, "W", dim);

    {
        std::ofstream os(dir / "config_echo.ini", std::ios::binary);
        if (!os) throw IoError("cannot open " + (dir / "config_echo.ini").string());
        os << serialize_config(rep.config);
    }

    std::ofstream os(dir / "report.txt", std::ios::binary);
    if (!os) throw IoError("cannot open " + (dir / "report.txt").string());
    os << "ghz-report v1\n";
    os << "preset: " << (rep.config.preset_name.empty() ? "(none)" : rep.config.preset_name)
       << "\n";
    os << "dimension: " << dim << "  alpha: " << detail::fmt12(rep.config.alpha) << "\n";
    os << "ellipticity m: " << detail::fmt12(rep.ellipticity) << "  c == 0: "
       << (rep.c_zero ? "yes" : "no") << "\n\n";

    if (rep.selection_ran) {
        os << "fixed points of dx/dt = -bbar(x)\n";
        for (std::size_t i = 0; i < rep.fixed_points.size(); ++i) {
            const auto& fp = rep.fixed_points[i];
            os << "  [" << i << "] xi = (";
            for (long k = 0; k < fp.location.size(); ++k)
                os << (k ? ", " : "") << detail::fmt12(fp.location[k]);
            os << ")  sigma = " << detail::fmt12(fp.sigma) << "  " << to_string(fp.stability)
               << (fp.hyperbolic ? "" : "  NON-HYPERBOLIC");
            if (i < rep.aubry_confirmed.size())
                os << (rep.aubry_confirmed[i] ? "  aubry:confirmed" : "  aubry:not-confirmed");
            os << "\n";
        }
        os << "sigma_bar = " << detail::fmt12(rep.sigma.sigma_bar)
           << (rep.sigma.unique ? " (unique maximizer)" : " (TIE)") << " at xi_bar = (";
        for (long k = 0; k < rep.xi_bar.size(); ++k)
            os << (k ? ", " : "") << detail::fmt12(rep.xi_bar[k]);
        os << ")\n";
        os << "cross-check -2 tr(Q Gamma) = " << detail::fmt12(rep.sigma_from_ou) << "\n\n";

        os << "lambda_Hbar = " << detail::fmt12(rep.lambda_hbar) << "\n";
        os << "S-matrix (symmetrized distances between fixed points)\n";
        for (long i = 0; i < rep.s_matrix.rows(); ++i) {
            os << " ";
            for (long j = 0; j < rep.s_matrix.cols(); ++j)
                os << " " << detail::fmt12(rep.s_matrix(i, j));
            os << "\n";
        }
        os << "uniqueness (S vanishes on the Aubry set): "
           << (rep.unique_solution ? "unique" : "multiple solutions") << "\n";
        os << "structure check: " << to_string(rep.structure.verdict)
           << " (backward orbits: " << rep.structure.backward_exited << " exited, "
           << rep.structure.backward_converged << " converged, "
           << rep.structure.backward_unclassified << " unclassified)\n";
        if (!rep.structure.connections.empty()) {
            os << "heteroclinic connections:";
            for (const auto& [a, b] : rep.structure.connections) os << " " << a << "->" << b;
            os << "\n";
        }
        os << "\n";
    }

    if (!rep.eps_records.empty()) {
        os << "eps sweep\n";
        os << "  eps  lambda  lambda/eps  residual  iters  sup|W_eps - W|\n";
        for (const auto& r : rep.eps_records)
            os << "  " << detail::fmt12(r.eps) << "  " << detail::fmt12(r.lambda) << "  "
               << detail::fmt12(r.lambda_over_eps) << "  " << detail::fmt12(r.residual) << "  "
               << r.iterations << "  " << detail::fmt12(r.w_sup_err) << "\n";
        os << "\n";
    }

    if (rep.blowup.present) {
        os << "blow-up profile at eps = " << detail::fmt12(rep.blowup.eps) << "\n";
        os << "  sup |w_eps - exp(-z Gamma z)| = " << detail::fmt12(rep.blowup.profile_sup_err)
           << "\n";
        if (rep.blowup.envelope_checked)
            os << "  growth envelope: fitted mu = " << detail::fmt12(rep.blowup.fitted_mu)
               << (rep.blowup.envelope_ok ? " (bounded)" : " (VIOLATED)") << "\n";
        else
            os << "  growth envelope: no stable directions, vacuous\n";
        os << "\n";
    }

    os << "machine-readable\n";
    os << "  structure_verdict = " << to_string(rep.structure.verdict) << "\n";
    os << "  edge_time_cap = 64  # traversal times clamped to [|dx|/64, 64 |dx|]\n";
    os << "  unique_solution = " << (rep.unique_solution ? 1 : 0) << "\n";
    os << "  lambda_hbar = " << detail::fmt17(rep.lambda_hbar) << "\n";
    if (rep.selection_ran) os << "  sigma_bar = " << detail::fmt17(rep.sigma.sigma_bar) << "\n";
    os << "\n";

    if (!rep.assertions.empty()) {
        os << "assertion log\n";
        for (const auto& a : rep.assertions)
            os << "  [" << (a.pass ? "ok" : "FAIL") << "] " << a.name << ": measured "
               << detail::fmt12(a.measured) << ", bound " << detail::fmt12(a.bound) << "\n";
        os << "\n";
    }
    if (!rep.warnings.empty()) {
        os << "warnings\n";
        for (const auto& w : rep.warnings) os << "  - " << w << "\n";
    }
}

}  // namespace ghz
