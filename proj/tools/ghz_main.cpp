// ghz: ground states of singularly perturbed convection-diffusion operators
// with oscillating periodic coefficients, their effective (homogenized)
// objects, and the weak-KAM selection of the limit profile.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "ghz/pipeline.hpp"

namespace {

using namespace ghz;

RunConfig resolve_config(const std::string& preset, const std::string& config_path) {
    if (preset.empty() && config_path.empty())
        throw ConfigError("no problem specified: pass --preset NAME and/or --config PATH");
    RunConfig base = preset.empty() ? RunConfig{} : preset_config(preset);
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw IoError("cannot read config file " + config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        base = load_config_text(ss.str(), base);
    }
    base.validate();
    return base;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

int cmd_validate(const RunConfig& cfg) {
    CoefficientSet cs = cfg.build_coefficients();
    std::cout << "coefficients valid\n";
    std::cout << "  dimension      " << cs.dim << "\n";
    std::cout << "  ellipticity m  " << fmt(cs.ellipticity) << "\n";
    std::cout << "  c == 0         " << (cs.c_zero ? "yes" : "no") << "\n";
    std::cout << "  y-independent  " << (cs.y_independent ? "yes" : "no") << "\n";
    std::cout << "  regime         "
              << (cfg.alpha > 1 + 1e-12 ? "alpha > 1" : cfg.alpha < 1 - 1e-12 ? "alpha < 1"
                                                                              : "alpha = 1")
              << "\n";
    return 0;
}

int cmd_effective(const RunConfig& cfg) {
    EffectiveContext ctx = cfg.effective_context();
    HamiltonianTable table(ctx);
    const int dim = cfg.dimension;

    // tabulate Hbar on a small p-lattice at a few probe slow points
    std::vector<Eigen::VectorXd> xs;
    Eigen::VectorXd center(dim);
    for (int k = 0; k < dim; ++k)
        center[k] = 0.5 * (cfg.omega_lo[static_cast<std::size_t>(k)] +
                           cfg.omega_hi[static_cast<std::size_t>(k)]);
    xs.push_back(center);
    for (int k = 0; k < dim; ++k) {
        Eigen::VectorXd x = center;
        x[k] = 0.75 * cfg.omega_lo[static_cast<std::size_t>(k)] + 0.25 * cfg.omega_hi[static_cast<std::size_t>(k)];
        xs.push_back(x);
        x[k] = 0.25 * cfg.omega_lo[static_cast<std::size_t>(k)] + 0.75 * cfg.omega_hi[static_cast<std::size_t>(k)];
        xs.push_back(x);
    }
    const int per_axis = 9;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (const auto& x : xs) {
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            Eigen::VectorXd p(dim);
            for (int k = 0; k < dim; ++k)
                p[k] = -cfg.p_radius +
                       2 * cfg.p_radius * idx[static_cast<std::size_t>(k)] / (per_axis - 1);
            table.value(p, x);
            int k = 0;
            while (k < dim && ++idx[static_cast<std::size_t>(k)] >= per_axis) {
                idx[static_cast<std::size_t>(k)] = 0;
                ++k;
            }
            if (k == dim) break;
        }
    }

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.output_dir);
    const fs::path out = fs::path(cfg.output_dir) / "hbar.csv";
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot open " + out.string());
    table.export_csv(os);
    std::cout << "tabulated " << table.tabulated() << " values of Hbar -> " << out.string()
              << "\n";
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    std::cout << "Hbar(0, center) = " << fmt(table.value(zero, center)) << "\n";
    if (ctx.regime == Regime::Subcritical)
        std::cout << "note: alpha < 1 values use first-order vanishing-viscosity "
                     "extrapolation over the schedule\n";
    return 0;
}

int cmd_drift(const RunConfig& cfg) {
    EffectiveContext ctx = cfg.effective_context();
    DriftField field(ctx, selection_drift_scale(ctx.regime));
    const int dim = cfg.dimension;

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.output_dir);
    const fs::path out = fs::path(cfg.output_dir) / "drift.csv";
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot open " + out.string());
    for (int k = 1; k <= dim; ++k) os << "x" << k << ",";
    for (int k = 1; k <= dim; ++k) os << "b" << k << (k == dim ? "\n" : ",");

    const int per_axis = 17;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    char buf[40];
    for (;;) {
        Eigen::VectorXd x(dim);
        for (int k = 0; k < dim; ++k)
            x[k] = cfg.omega_lo[static_cast<std::size_t>(k)] +
                   (cfg.omega_hi[static_cast<std::size_t>(k)] -
                    cfg.omega_lo[static_cast<std::size_t>(k)]) *
                       idx[static_cast<std::size_t>(k)] / (per_axis - 1);
        Eigen::VectorXd b = field.drift(x);
        for (int k = 0; k < dim; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", x[k]);
            os << buf << ",";
        }
        for (int k = 0; k < dim; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", b[k]);
            os << buf << (k == dim - 1 ? "\n" : ",");
        }
        int k = 0;
        while (k < dim && ++idx[static_cast<std::size_t>(k)] >= per_axis) {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == dim) break;
    }
    std::cout << "effective drift -> " << out.string() << "\n";
    return 0;
}

int cmd_fixed_points(const RunConfig& cfg) {
    EffectiveContext ctx = cfg.effective_context();
    DriftField field(ctx, selection_drift_scale(ctx.regime));
    FixedPointOptions opts;
    opts.newton_tol = cfg.newton_tol;
    opts.hyper_tol = cfg.hyper_tol;
    const BoxGrid box = cfg.weakkam_grid();
    auto pts = find_fixed_points(drift_map(field, 1e-4 * box.diameter()), box,
                                 cfg.seeds_per_axis, opts);
    if (pts.empty()) {
        std::cout << "no fixed points of dx/dt = -bbar(x) in the box\n";
        return 0;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::cout << "[" << i << "] xi = (";
        for (long k = 0; k < pts[i].location.size(); ++k)
            std::cout << (k ? ", " : "") << fmt(pts[i].location[k]);
        std::cout << ")  sigma = " << fmt(pts[i].sigma) << "  " << to_string(pts[i].stability)
                  << (pts[i].hyperbolic ? "" : "  NON-HYPERBOLIC") << "\n";
    }
    auto sb = sigma_bar(pts);
    std::cout << "sigma_bar = " << fmt(sb.sigma_bar)
              << (sb.unique ? " (unique maximizer)" : " (tie)") << "\n";
    return 0;
}

int cmd_weakkam(const RunConfig& cfg) {
    RunReport rep = run_convergence_study([&] {
        RunConfig c = cfg;
        c.eps_list = {cfg.eps_list.front()};  // weak-KAM side only needs one token eps
        return c;
    }());
    std::cout << "lambda_Hbar = " << fmt(rep.lambda_hbar) << "\n";
    std::cout << "S-matrix:\n";
    for (long i = 0; i < rep.s_matrix.rows(); ++i) {
        for (long j = 0; j < rep.s_matrix.cols(); ++j)
            std::cout << "  " << fmt(rep.s_matrix(i, j));
        std::cout << "\n";
    }
    std::cout << "uniqueness: " << (rep.unique_solution ? "unique" : "multiple solutions") << "\n";
    emit_outputs(rep, cfg.output_dir);
    std::cout << "fields -> " << cfg.output_dir << "/{distance.csv, W.csv}\n";
    return 0;
}

int cmd_eigen(const RunConfig& cfg) {
    CoefficientSet cs = cfg.build_coefficients();
    const BoxGrid fine = cfg.physical_grid();
    for (double eps : cfg.eps_list) {
        auto op = assemble_dirichlet(cs, fine, eps, cfg.alpha);
        EigenSolveOptions opts;
        opts.tol = cfg.solver_tol;
        auto pair = principal_eigenpair(op, 0.0, opts);
        std::cout << "eps = " << fmt(eps) << "  lambda = " << fmt(pair.lambda)
                  << "  lambda/eps = " << fmt(pair.lambda / eps)
                  << "  residual = " << fmt(pair.residual) << "  iters = " << pair.iterations
                  << (op.coarse_grid_warning ? "  [coarse grid]" : "") << "\n";
    }
    return 0;
}

int cmd_study(const RunConfig& cfg) {
    RunReport rep = run_convergence_study(cfg);
    emit_outputs(rep, cfg.output_dir);
    std::cout << "sigma_bar = " << fmt(rep.sigma.sigma_bar) << "  lambda_Hbar = "
              << fmt(rep.lambda_hbar) << "\n";
    for (const auto& r : rep.eps_records)
        std::cout << "eps = " << fmt(r.eps) << "  lambda/eps = " << fmt(r.lambda_over_eps)
                  << "  sup|W_eps - W| = " << fmt(r.w_sup_err) << "\n";
    std::cout << "outputs -> " << cfg.output_dir << "\n";
    return 0;
}

int cmd_blowup(const RunConfig& cfg, double eps_flag) {
    const double eps = eps_flag > 0 ? eps_flag : cfg.eps_list.back();
    auto rec = run_blowup_check(cfg, eps);
    std::cout << "eps = " << fmt(rec.eps) << "\n";
    std::cout << "sup |w_eps - exp(-z Gamma z)| = " << fmt(rec.profile_sup_err) << "\n";
    if (rec.envelope_checked)
        std::cout << "fitted envelope mu = " << fmt(rec.fitted_mu)
                  << (rec.envelope_ok ? " (bounded)" : " (violated)") << "\n";
    else
        std::cout << "growth envelope vacuous (no stable directions)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ghz: ground states of singularly perturbed oscillating operators"};
    app.require_subcommand(1);

    std::string preset, config_path;
    double eps_flag = -1.0;
    app.add_option("--preset", preset, "compiled-in preset name")->group("problem");
    app.add_option("--config", config_path, "INI config file")->group("problem");

    auto add = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--preset", preset, "compiled-in preset name");
        sub->add_option("--config", config_path, "INI config file");
        return sub;
    };
    add("validate", "parse and probe-validate the coefficient set");
    add("effective", "tabulate the effective Hamiltonian, export hbar.csv");
    add("drift", "evaluate the effective drift on a lattice, export drift.csv");
    add("fixed-points", "locate fixed points of dx/dt = -bbar(x)");
    add("weakkam", "additive eigenvalue, Aubry set, selected solution");
    add("eigen", "principal eigenpairs over the eps list");
    add("study", "full convergence study with report and CSV output");
    add("blowup", "blow-up profile check against the Gaussian reference")
        ->add_option("--eps", eps_flag, "eps for the blow-up (default: smallest in the list)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig cfg = resolve_config(preset, config_path);
        if (app.got_subcommand("validate")) return cmd_validate(cfg);
        if (app.got_subcommand("effective")) return cmd_effective(cfg);
        if (app.got_subcommand("drift")) return cmd_drift(cfg);
        if (app.got_subcommand("fixed-points")) return cmd_fixed_points(cfg);
        if (app.got_subcommand("weakkam")) return cmd_weakkam(cfg);
        if (app.got_subcommand("eigen")) return cmd_eigen(cfg);
        if (app.got_subcommand("study")) return cmd_study(cfg);
        if (app.got_subcommand("blowup")) return cmd_blowup(cfg, eps_flag);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const EvalError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
