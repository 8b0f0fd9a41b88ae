#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ghz/assemble.hpp"
#include "ghz/eigen_solver.hpp"

using namespace ghz;

namespace {

CoefficientSet coeffs1d(const std::string& a, const std::string& b, const std::string& c) {
    return validate_coefficient_set({parse_expression(a)}, {parse_expression(b)},
                                    parse_expression(c), 1, 16);
}

}  // namespace

TEST_CASE("torus with constant c = 3: eigenvalue 3, constant eigenfunction") {
    auto cs = coeffs1d("1", "0", "3");
    double x0 = 0, p = 0;
    auto op = assemble_periodic_cell(cs, std::span<const double>(&x0, 1),
                                     std::span<const double>(&p, 1), 1.0, TorusGrid(1, 32));
    auto pair = principal_eigenpair(op);
    CHECK_THAT(pair.lambda, Catch::Matchers::WithinAbs(3.0, 1e-9));
    CHECK((pair.eigenfunction.array() - 1.0).abs().maxCoeff() < 1e-8);
    // the bound min c <= mu <= max c is asserted inside the solver; passing is the check
}

TEST_CASE("simplicity proxy: random positive restart reproduces the pair") {
    auto cs = coeffs1d("1", "2*x1 + sin(2*pi*y1)", "0");
    auto op = assemble_dirichlet(cs, BoxGrid({-1.0}, {1.0}, {256}), 0.05, 1.0);
    EigenSolveOptions opts;
    auto p1 = principal_eigenpair(op, 0.0, opts);

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    Eigen::VectorXd start(op.rows());
    for (long i = 0; i < op.rows(); ++i) start[i] = u(rng);
    EigenSolveOptions opts2 = opts;
    opts2.start = &start;
    auto p2 = principal_eigenpair(op, 0.0, opts2);

    CHECK(std::abs(p1.lambda - p2.lambda) <= 10 * opts.tol * std::max(1.0, std::abs(p1.lambda)));
    CHECK((p1.eigenfunction - p2.eigenfunction).cwiseAbs().maxCoeff() <= 100 * opts.tol);
}

TEST_CASE("residual contract") {
    auto cs = coeffs1d("1", "0", "0");
    auto op = assemble_dirichlet(cs, BoxGrid({0.0}, {1.0}, {128}), 0.1, 1.0);
    auto pair = principal_eigenpair(op);
    CHECK(pair.residual <= 1e-10);
    CHECK(pair.eigenfunction.maxCoeff() == 1.0);
}

TEST_CASE("log transform") {
    SECTION("u == 1 gives W == 0") {
        EigenPair pair;
        pair.eigenfunction = Eigen::VectorXd::Ones(10);
        pair.lambda = 0;
        auto w = log_transform(pair, 0.1);
        CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("synthetic OU eigenfunction gives W = x^2 to rounding") {
        BoxGrid g({-1.0}, {1.0}, {200});
        const double eps = 0.05;
        Eigen::VectorXd u(g.node_count());
        for (long i = 0; i < g.node_count(); ++i) {
            double x = g.node(g.unindex(i))[0];
            u[i] = std::exp(-x * x / eps);
        }
        EigenPair pair;
        pair.eigenfunction = u;
        auto w = log_transform(pair, eps);
        for (long i = 0; i < g.node_count(); ++i) {
            double x = g.node(g.unindex(i))[0];
            CHECK_THAT(w[i], Catch::Matchers::WithinAbs(x * x, 1e-12));
        }
        CHECK(w.minCoeff() == 0.0);
    }
    SECTION("max != 1 is a precondition error") {
        EigenPair pair;
        pair.eigenfunction = Eigen::VectorXd::Constant(5, 0.5);
        CHECK_THROWS_AS(log_transform(pair, 0.1), NumericError);
    }
    SECTION("nonpositive value is an error") {
        EigenPair pair;
        pair.eigenfunction = Eigen::VectorXd::Ones(5);
        pair.eigenfunction[2] = 0.0;
        CHECK_THROWS_AS(log_transform(pair, 0.1), NumericError);
    }
}

TEST_CASE("blow-up rescale") {
    const double eps = 0.01;  // sqrt(eps) = 0.1
    BoxGrid g({-1.0}, {1.0}, {2000});
    Eigen::VectorXd u(g.node_count());
    for (long i = 0; i < g.node_count(); ++i) {
        double x = g.node(g.unindex(i))[0];
        u[i] = std::exp(-x * x / eps);
    }
    BoxFunction uf(g, u);

    SECTION("gaussian rescales to exp(-z^2) exactly on matching nodes") {
        double xi = 0.0;
        // z spacing 0.05 maps to x spacing 0.005 = 5 grid cells: exact node hits
        auto w = blowup_rescale(uf, std::span<const double>(&xi, 1), eps, 2.0, 81);
        CHECK(w.values[w.grid.index({40})] == 1.0);  // w(0) = 1
        for (long i = 0; i < w.grid.node_count(); ++i) {
            double z = w.grid.node(w.grid.unindex(i))[0];
            CHECK_THAT(w.values[i], Catch::Matchers::WithinAbs(std::exp(-z * z), 1e-12));
        }
    }
    SECTION("constant u rescales to 1") {
        BoxFunction cf(g, Eigen::VectorXd::Ones(g.node_count()));
        double xi = 0.2;
        auto w = blowup_rescale(cf, std::span<const double>(&xi, 1), eps, 2.0, 41);
        CHECK((w.values.array() - 1.0).abs().maxCoeff() == 0.0);
    }
    SECTION("ball exiting the domain is an error") {
        double xi = 0.95;
        CHECK_THROWS_AS(blowup_rescale(uf, std::span<const double>(&xi, 1), eps, 2.0, 41),
                        NumericError);
    }
}

TEST_CASE("scatter to grid places boundary fill") {
    auto cs = coeffs1d("1", "0", "0");
    auto op = assemble_dirichlet(cs, BoxGrid({0.0}, {1.0}, {16}), 0.1, 1.0);
    Eigen::VectorXd act = Eigen::VectorXd::Constant(op.rows(), 2.0);
    auto f = scatter_to_grid(op, act, -1.0);
    CHECK(f.values[0] == -1.0);
    CHECK(f.values[f.grid.node_count() - 1] == -1.0);
    CHECK(f.values[1] == 2.0);
}

TEST_CASE("2D Dirichlet Laplacian eigenvalue") {
    std::vector<Expression> a = {parse_expression("1"), parse_expression("0"),
                                 parse_expression("0"), parse_expression("1")};
    std::vector<Expression> b = {parse_expression("0"), parse_expression("0")};
    auto cs = validate_coefficient_set(a, b, parse_expression("0"), 2, 8);
    const double eps = 0.1;
    auto op = assemble_dirichlet(cs, BoxGrid({0.0, 0.0}, {1.0, 1.0}, {48, 48}), eps, 1.0);
    auto pair = principal_eigenpair(op);
    // separable closed form: -eps^2 (pi^2 + pi^2)
    CHECK_THAT(pair.lambda, Catch::Matchers::WithinAbs(-eps * eps * 2 * M_PI * M_PI, 2e-3));
    CHECK(pair.eigenfunction.minCoeff() > 0);
}
