#include <catch2/catch_amalgamated.hpp>

#include "ghz/dynamics.hpp"

using namespace ghz;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

DriftMap analytic1d(const std::function<double(double)>& b, const std::function<double(double)>& db) {
    return DriftMap{[b](const VectorXd& x) { return VectorXd::Constant(1, b(x[0])); },
                    [db](const VectorXd& x) { return MatrixXd::Constant(1, 1, db(x[0])); }};
}

}  // namespace

TEST_CASE("find_fixed_points: linear 1D drift") {
    auto drift = analytic1d([](double x) { return 2 * x; }, [](double) { return 2.0; });
    auto pts = find_fixed_points(drift, BoxGrid({-1.0}, {1.0}, {16}), 8);
    REQUIRE(pts.size() == 1);
    CHECK_THAT(pts[0].location[0], Catch::Matchers::WithinAbs(0.0, 1e-10));
    CHECK_THAT(pts[0].b_matrix(0, 0), Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(pts[0].eigenvalues_minus_b[0].real(), Catch::Matchers::WithinAbs(-2.0, 1e-12));
    CHECK_THAT(pts[0].sigma, Catch::Matchers::WithinAbs(-2.0, 1e-12));
    CHECK(pts[0].stability == FixedPoint::Stability::Sink);
    CHECK(pts[0].hyperbolic);
    CHECK(pts[0].drift_residual <= 1e-9);  // 10 x newton_tol
}

TEST_CASE("find_fixed_points: double-well P' = 4x^3 - x") {
    auto drift = analytic1d([](double x) { return 4 * x * x * x - x; },
                            [](double x) { return 12 * x * x - 1; });
    auto pts = find_fixed_points(drift, BoxGrid({-1.0}, {1.0}, {16}), 12);
    REQUIRE(pts.size() == 3);
    CHECK_THAT(pts[0].location[0], Catch::Matchers::WithinAbs(-0.5, 1e-8));
    CHECK_THAT(pts[1].location[0], Catch::Matchers::WithinAbs(0.0, 1e-8));
    CHECK_THAT(pts[2].location[0], Catch::Matchers::WithinAbs(0.5, 1e-8));
    CHECK_THAT(pts[0].b_matrix(0, 0), Catch::Matchers::WithinAbs(2.0, 1e-9));
    CHECK_THAT(pts[1].b_matrix(0, 0), Catch::Matchers::WithinAbs(-1.0, 1e-9));
    CHECK_THAT(pts[2].b_matrix(0, 0), Catch::Matchers::WithinAbs(2.0, 1e-9));
    CHECK_THAT(pts[0].sigma, Catch::Matchers::WithinAbs(-2.0, 1e-9));
    CHECK_THAT(pts[1].sigma, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(pts[2].sigma, Catch::Matchers::WithinAbs(-2.0, 1e-9));
    CHECK(pts[0].stability == FixedPoint::Stability::Sink);
    CHECK(pts[1].stability == FixedPoint::Stability::Source);
    CHECK(pts[2].stability == FixedPoint::Stability::Sink);
}

TEST_CASE("find_fixed_points: no zero in the box gives an empty list") {
    auto drift = analytic1d([](double x) { return 2 * x + 10; }, [](double) { return 2.0; });
    auto pts = find_fixed_points(drift, BoxGrid({-1.0}, {1.0}, {16}), 8);
    CHECK(pts.empty());
}

TEST_CASE("sigma_bar") {
    auto drift = analytic1d([](double x) { return 4 * x * x * x - x; },
                            [](double x) { return 12 * x * x - 1; });
    auto pts = find_fixed_points(drift, BoxGrid({-1.0}, {1.0}, {16}), 12);

    SECTION("double-well: unique maximizer at the source") {
        auto r = sigma_bar(pts);
        CHECK_THAT(r.sigma_bar, Catch::Matchers::WithinAbs(0.0, 1e-12));
        REQUIRE(r.unique);
        CHECK(r.maximizers == std::vector<std::size_t>{1});
    }
    SECTION("single sink") {
        auto single = std::vector<FixedPoint>{pts[0]};
        auto r = sigma_bar(single);
        CHECK_THAT(r.sigma_bar, Catch::Matchers::WithinAbs(-2.0, 1e-9));
        CHECK(r.unique);
    }
    SECTION("two symmetric points with equal sigma tie") {
        auto pair = std::vector<FixedPoint>{pts[0], pts[2]};
        auto r = sigma_bar(pair);
        CHECK(!r.unique);
        CHECK(r.maximizers.size() == 2);
    }
    SECTION("non-hyperbolic input is an error") {
        auto bad = pts;
        bad[0].hyperbolic = false;
        CHECK_THROWS_AS(sigma_bar(bad), NumericError);
    }
}

TEST_CASE("verify_structure: double-well passes") {
    auto drift = analytic1d([](double x) { return 4 * x * x * x - x; },
                            [](double x) { return 12 * x * x - 1; });
    BoxGrid box({-1.0}, {1.0}, {16});
    auto pts = find_fixed_points(drift, box, 12);
    auto rep = verify_structure(drift, pts, box, 16);
    CHECK(rep.verdict == StructureReport::Verdict::Pass);
    CHECK(!rep.cycle_found);
    CHECK(rep.backward_unclassified == 0);
    // source -> both sinks, sinks have no outgoing connections
    REQUIRE(rep.connections.size() == 2);
    CHECK(rep.connections[0] == std::make_pair(1, 0));
    CHECK(rep.connections[1] == std::make_pair(1, 2));
}

TEST_CASE("verify_structure: pure source field passes with exits") {
    // bbar = -2x: flow dx/dt = -bbar = 2x leaves the box; backward orbits converge to 0
    auto drift = analytic1d([](double x) { return -2 * x; }, [](double) { return -2.0; });
    BoxGrid box({-1.0}, {1.0}, {16});
    auto pts = find_fixed_points(drift, box, 8);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].stability == FixedPoint::Stability::Source);
    auto rep = verify_structure(drift, pts, box, 16);
    CHECK(rep.verdict == StructureReport::Verdict::Pass);
    CHECK(rep.backward_converged == 16);
    CHECK(rep.connections.empty());  // forward orbits exit the box
}

TEST_CASE("verify_structure: rotational field is inconclusive") {
    DriftMap drift{[](const VectorXd& x) {
                       VectorXd v(2);
                       v << x[1], -x[0];
                       return v;
                   },
                   [](const VectorXd&) {
                       MatrixXd b(2, 2);
                       // b = (x2, -x1): B(i,j) = d b_j / d x_i
                       b << 0, -1, 1, 0;
                       return b;
                   }};
    BoxGrid box({-1.0, -1.0}, {1.0, 1.0}, {8, 8});
    auto pts = find_fixed_points(drift, box, 5);
    REQUIRE(pts.size() == 1);
    CHECK(!pts[0].hyperbolic);
    auto rep = verify_structure(drift, pts, box, 6);
    CHECK(rep.verdict == StructureReport::Verdict::Inconclusive);
}

TEST_CASE("verify_structure requires points") {
    auto drift = analytic1d([](double x) { return 2 * x; }, [](double) { return 2.0; });
    CHECK_THROWS_AS(verify_structure(drift, {}, BoxGrid({-1.0}, {1.0}, {16}), 4), ConfigError);
}

TEST_CASE("cross-module: sigma at a maximizer equals the OU constant") {
    // double-well source at 0: B = -1 (1D), Q = 1: eig(-B) = 1 > 0 -> Gamma = 0, sigma = 0
    auto sol = ou_sigma(MatrixXd::Constant(1, 1, -1.0), MatrixXd::Identity(1, 1));
    CHECK_THAT(sol.sigma, Catch::Matchers::WithinAbs(0.0, 1e-8));
    // sink: B = 2, Q arbitrary PD: sigma = -2 independent of Q
    auto sol2 = ou_sigma(MatrixXd::Constant(1, 1, 2.0), MatrixXd::Constant(1, 1, 1.7));
    CHECK_THAT(sol2.sigma, Catch::Matchers::WithinAbs(-2.0, 1e-8));
}

TEST_CASE("fixed points through the PDE drift field (oscillating preset)") {
    EffectiveContext ctx;
    ctx.coeffs = validate_coefficient_set({parse_expression("1")},
                                          {parse_expression("2*x1 + sin(2*pi*y1)")},
                                          parse_expression("0"), 1, 16);
    ctx.regime = Regime::Critical;
    ctx.torus = TorusGrid(1, 64);
    DriftField field(ctx, 1.0);
    auto dmap = drift_map(field, 1e-4 * 2.0);
    FixedPointOptions opts;
    opts.newton_tol = 1e-10;
    auto pts = find_fixed_points(dmap, BoxGrid({-1.0}, {1.0}, {16}), 8, opts);
    REQUIRE(pts.size() == 1);
    // the oscillation shifts the zero slightly off the origin
    CHECK(std::abs(pts[0].location[0]) < 0.3);
    CHECK(pts[0].hyperbolic);
    CHECK(pts[0].stability == FixedPoint::Stability::Sink);
    CHECK_THAT(pts[0].b_matrix(0, 0), Catch::Matchers::WithinAbs(2.0, 0.2));
    // re-evaluated residual obeys the 10x newton_tol contract
    CHECK(pts[0].drift_residual <= 1e-9);
}
