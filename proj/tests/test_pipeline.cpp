#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "ghz/pipeline.hpp"

using namespace ghz;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_ou1d() {
    RunConfig cfg = preset_config("ou1d");
    cfg.physical_n = 1024;
    cfg.weakkam_n = 128;
    cfg.eps_list = {0.1, 0.05};
    cfg.sampled_p_nodes = 65;
    cfg.sampled_p_radius = 40.0;
    return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
    SECTION("defaults pass validation") { CHECK_NOTHROW(RunConfig{}.validate()); }
    SECTION("increasing eps list is rejected") {
        RunConfig cfg;
        cfg.eps_list = {0.05, 0.1};
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SECTION("INI text overlays a base") {
        std::string text = R"ini(# comment
[problem]
dimension = 1
alpha = 1
b1 = "2*x1 + sin(2*pi*y1)"
[study]
eps = 0.2, 0.1
[grids]
physical_n = 256
[output]
directory = "runs/osc"
)ini";
        RunConfig cfg = load_config_text(text);
        CHECK(cfg.b_exprs[0] == "2*x1 + sin(2*pi*y1)");
        CHECK(cfg.eps_list == std::vector<double>{0.2, 0.1});
        CHECK(cfg.physical_n == 256);
        CHECK(cfg.output_dir == "runs/osc");
        CHECK(cfg.a_exprs[0] == "1");  // unchanged dimension keeps base entries
    }
    SECTION("unknown keys and sections are hard errors") {
        CHECK_THROWS_AS(load_config_text("[problem]\nbogus = 1\n"), ConfigError);
        CHECK_THROWS_AS(load_config_text("[nosuch]\nx = 1\n"), ConfigError);
        CHECK_THROWS_AS(load_config_text("[problem]\ndimension\n"), ConfigError);
        CHECK_THROWS_AS(load_config_text("[study]\neps = a,b\n"), ConfigError);
    }
    SECTION("serialize/load round trip") {
        RunConfig cfg = preset_config("oscillating1d");
        cfg.eps_list = {0.3, 0.2, 0.15};
        cfg.weakkam_n = 200;
        std::string echo = serialize_config(cfg);
        RunConfig back = load_config_text(echo);
        CHECK(back.b_exprs == cfg.b_exprs);
        CHECK(back.eps_list == cfg.eps_list);
        CHECK(back.weakkam_n == cfg.weakkam_n);
        CHECK(back.output_dir == cfg.output_dir);
        std::string echo2 = serialize_config(back);
        CHECK(echo2.substr(echo2.find('\n')) == echo.substr(echo.find('\n')));
    }
    SECTION("presets exist and validate") {
        for (const char* name : {"ou1d", "doublewell1d", "oscillating1d", "shear2d"}) {
            RunConfig cfg = preset_config(name);
            CHECK_NOTHROW(cfg.validate());
            CHECK_NOTHROW(cfg.build_coefficients());
        }
        CHECK_THROWS_AS(preset_config("nope"), ConfigError);
    }
}

TEST_CASE("ou1d study: sigma_bar, lambda trend and the selected W") {
    RunConfig cfg = small_ou1d();
    RunReport rep = run_convergence_study(cfg);

    CHECK(rep.selection_ran);
    REQUIRE(rep.fixed_points.size() == 1);
    CHECK_THAT(rep.sigma.sigma_bar, Catch::Matchers::WithinAbs(-2.0, 1e-8));
    CHECK_THAT(rep.xi_bar[0], Catch::Matchers::WithinAbs(0.0, 1e-8));
    CHECK_THAT(rep.q_matrix(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-5));
    CHECK_THAT(rep.gamma_matrix(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(rep.sigma_from_ou, Catch::Matchers::WithinAbs(-2.0, 1e-8));
    CHECK(rep.structure.verdict == StructureReport::Verdict::Pass);
    CHECK(std::abs(rep.lambda_hbar) <= 10 * rep.wk_grid.max_spacing());
    CHECK(rep.unique_solution);  // single Aubry point

    REQUIRE(rep.eps_records.size() == 2);
    for (const auto& r : rep.eps_records) {
        CHECK(r.lambda < 0);
        CHECK_THAT(r.lambda_over_eps, Catch::Matchers::WithinAbs(-2.0, 0.1));
        CHECK(r.w_sup_err < 0.12);  // W = x^2 against -eps log u at modest resolution
    }
    // every recorded assertion passed
    for (const auto& a : rep.assertions) CHECK(a.pass);
}

TEST_CASE("doublewell1d study: selection picks the source, multiple solutions") {
    RunConfig cfg = preset_config("doublewell1d");
    cfg.physical_n = 1024;
    cfg.weakkam_n = 512;
    cfg.eps_list = {0.1, 0.05};
    cfg.sampled_p_nodes = 65;
    RunReport rep = run_convergence_study(cfg);

    REQUIRE(rep.fixed_points.size() == 3);
    CHECK_THAT(rep.sigma.sigma_bar, Catch::Matchers::WithinAbs(0.0, 1e-9));
    CHECK(rep.sigma.unique);
    CHECK_THAT(rep.xi_bar[0], Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK(!rep.unique_solution);
    CHECK_THAT(rep.s_matrix(1, 0), Catch::Matchers::WithinAbs(0.0625, 0.04));
    for (bool c : rep.aubry_confirmed) CHECK(c);
    CHECK(rep.structure.verdict == StructureReport::Verdict::Pass);

    // W == 0 on the plateau, P(x) outside
    const BoxGrid& g = rep.wk_grid;
    for (long i = 0; i < g.node_count(); i += 7) {
        double x = g.node(g.unindex(i))[0];
        double s = x * x - 0.25;
        double expect = std::abs(x) <= 0.5 ? 0.0 : s * s;
        CHECK_THAT(rep.w_selected[i], Catch::Matchers::WithinAbs(expect, 12 * g.max_spacing()));
    }
    // lambda_eps/eps drifts toward 0
    CHECK(std::abs(rep.eps_records[1].lambda_over_eps) <
          std::abs(rep.eps_records[0].lambda_over_eps));
    CHECK(rep.eps_records[1].lambda < 0);
}

TEST_CASE("blow-up check on ou1d") {
    RunConfig cfg = small_ou1d();
    cfg.physical_n = 2000;  // z lattice maps onto exact grid nodes
    auto rec = run_blowup_check(cfg, 0.04);
    CHECK(rec.present);
    CHECK(rec.profile_sup_err < 0.08);
    CHECK(rec.envelope_checked);
    CHECK(rec.envelope_ok);
    CHECK(rec.fitted_mu > 0.3);

    SECTION("z radius beyond the box is an error") {
        RunConfig wide = small_ou1d();
        wide.z_radius = 8.0;
        CHECK_THROWS_AS(run_blowup_check(wide, 0.04), NumericError);
    }
}

TEST_CASE("study preconditions") {
    SECTION("nonzero c is rejected for the selection study") {
        RunConfig cfg = small_ou1d();
        cfg.c_expr = "1";
        CHECK_THROWS_AS(run_convergence_study(cfg), ConfigError);
    }
    SECTION("alpha < 1 is rejected for the selection study") {
        RunConfig cfg = small_ou1d();
        cfg.alpha = 0.5;
        CHECK_THROWS_AS(run_convergence_study(cfg), ConfigError);
    }
}

TEST_CASE("emit_outputs") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ghz_test_out";
    fs::remove_all(dir);

    SECTION("empty report produces headers only") {
        RunReport rep;
        rep.config = RunConfig{};
        emit_outputs(rep, (dir / "empty").string());
        CHECK(slurp(dir / "empty" / "lambda.csv") ==
              "eps,lambda,lambda_over_eps,sigma_bar,W_sup_err\n");
        CHECK(slurp(dir / "empty" / "distance.csv") == "x1,d\n");
        CHECK(slurp(dir / "empty" / "W.csv") == "x1,W\n");
        std::string report = slurp(dir / "empty" / "report.txt");
        CHECK(report.rfind("ghz-report v1\n", 0) == 0);
    }

    SECTION("study outputs are deterministic byte for byte") {
        RunConfig cfg = small_ou1d();
        cfg.physical_n = 512;
        cfg.weakkam_n = 64;
        cfg.eps_list = {0.1};
        RunReport r1 = run_convergence_study(cfg);
        RunReport r2 = run_convergence_study(cfg);
        emit_outputs(r1, (dir / "a").string());
        emit_outputs(r2, (dir / "b").string());
        for (const char* f : {"lambda.csv", "distance.csv", "W.csv", "report.txt",
                              "config_echo.ini"}) {
            INFO(f);
            CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        }
        // one row per eps in lambda.csv
        std::string lam = slurp(dir / "a" / "lambda.csv");
        CHECK(std::count(lam.begin(), lam.end(), '\n') == 2);
    }
}

TEST_CASE("oscillating1d: drift consistency and sigma agreement at desk scale") {
    RunConfig cfg = preset_config("oscillating1d");
    cfg.physical_n = 1024;
    cfg.weakkam_n = 128;
    cfg.eps_list = {0.05};
    cfg.sampled_p_nodes = 65;
    RunReport rep = run_convergence_study(cfg);
    REQUIRE(rep.fixed_points.size() == 1);
    CHECK(rep.fixed_points[0].stability == FixedPoint::Stability::Sink);
    // sigma_bar from the numerically computed drift Jacobian
    CHECK_THAT(rep.sigma.sigma_bar, Catch::Matchers::WithinAbs(-2.0, 0.25));
    CHECK_THAT(rep.eps_records[0].lambda_over_eps,
               Catch::Matchers::WithinAbs(rep.sigma.sigma_bar, 0.3));
}

TEST_CASE("blow-up at a source: Gamma = 0 and a flat profile") {
    RunConfig cfg = preset_config("doublewell1d");
    cfg.physical_n = 1024;
    cfg.eps_list = {0.05};
    cfg.z_radius = 1.5;
    auto rec = run_blowup_check(cfg, 0.02);
    CHECK(rec.present);
    // xi_bar = 0 is a source of dx/dt = -bbar: no stable directions
    CHECK(!rec.envelope_checked);
    CHECK(rec.envelope_ok);
    // reference profile is identically 1; w_eps stays order one near 0
    CHECK(rec.profile_sup_err < 0.9);
}

TEST_CASE("stage names decorate pipeline errors") {
    RunConfig cfg = preset_config("ou1d");
    cfg.physical_n = 256;
    cfg.weakkam_n = 64;
    cfg.eps_list = {0.1};
    cfg.omega_lo = {1.0};  // no drift zero inside (2x > 0 on (1,3))
    cfg.omega_hi = {3.0};
    try {
        run_convergence_study(cfg);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("stage '") != std::string::npos);
    }
}

TEST_CASE("shear2d preset: exact drift, sigma_bar = -4, OU constant independent of Q") {
    RunConfig cfg = preset_config("shear2d");
    EffectiveContext ctx = cfg.effective_context();
    // divergence-free oscillation: theta* == 1 and bbar(x) = (2 x1, 2 x2)
    DriftField field(ctx, 1.0);
    Eigen::VectorXd x(2);
    x << 0.3, -0.4;
    Eigen::VectorXd b = field.drift(x);
    CHECK_THAT(b[0], Catch::Matchers::WithinAbs(0.6, 1e-9));
    CHECK_THAT(b[1], Catch::Matchers::WithinAbs(-0.8, 1e-9));

    FixedPointOptions opts;
    opts.newton_tol = cfg.newton_tol;
    auto pts = find_fixed_points(drift_map(field, 1e-4 * cfg.weakkam_grid().diameter()),
                                 cfg.weakkam_grid(), 5, opts);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].location.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(pts[0].stability == FixedPoint::Stability::Sink);
    auto sb = sigma_bar(pts);
    CHECK_THAT(sb.sigma_bar, Catch::Matchers::WithinAbs(-4.0, 1e-6));

    // B = 2I: Gamma = Q^{-1} and sigma = -2 tr(Q Q^{-1}) = -4 whatever Q is
    HamiltonianTable table(ctx);
    Eigen::MatrixXd q = hessian_Q(table, pts[0].location);
    auto ou = ou_sigma(pts[0].b_matrix, q);
    CHECK_THAT(ou.sigma, Catch::Matchers::WithinAbs(-4.0, 1e-6));
}
