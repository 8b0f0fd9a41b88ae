#pragma once

// Validated coefficient set for the operator
//   eps^2 a^{ij}(x, x/eps^alpha) d2/dxidxj + eps b^j(x, x/eps^alpha) d/dxj + c(x, x/eps^alpha).
// a must be symmetric and uniformly elliptic; all coefficients must be
// 1-periodic in every y variable. Both properties are enforced by numerical
// probing on a lattice, not syntactically.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ghz/errors.hpp"
#include "ghz/expr.hpp"

namespace ghz {

struct CoefficientSet {
    int dim = 1;
    std::vector<Expression> a;  // row-major dim x dim
    std::vector<Expression> b;  // dim entries
    Expression c;
    double ellipticity = 0.0;   // probed min eigenvalue of a(x,y)
    bool c_zero = false;        // c vanished on every probe point
    bool y_independent = false; // no coefficient references a fast variable

    const Expression& a_entry(int i, int j) const { return a[static_cast<std::size_t>(i * dim + j)]; }

    double eval_a(int i, int j, std::span<const double> x, std::span<const double> y) const {
        return evaluate(a_entry(i, j), x, y);
    }
    double eval_b(int j, std::span<const double> x, std::span<const double> y) const {
        return evaluate(b[static_cast<std::size_t>(j)], x, y);
    }
    double eval_c(std::span<const double> x, std::span<const double> y) const {
        return evaluate(c, x, y);
    }

    /// a(x,y) as a dense symmetric matrix.
    Eigen::MatrixXd a_matrix(std::span<const double> x, std::span<const double> y) const {
        Eigen::MatrixXd m(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) m(i, j) = eval_a(i, j, x, y);
        return m;
    }

    /// H(p,x,y) = a^{ij} p_i p_j - b^j p_j + c.
    double hamiltonian(std::span<const double> p, std::span<const double> x,
                       std::span<const double> y) const {
        double h = eval_c(x, y);
        for (int i = 0; i < dim; ++i) {
            h -= eval_b(i, x, y) * p[static_cast<std::size_t>(i)];
            for (int j = 0; j < dim; ++j)
                h += eval_a(i, j, x, y) * p[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(j)];
        }
        return h;
    }
};

namespace detail {

inline void probe_lattice(int dim, int density, const std::vector<double>& lo,
                          const std::vector<double>& hi,
                          const std::function<void(std::span<const double>)>& fn) {
    std::vector<double> pt(static_cast<std::size_t>(dim));
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (;;) {
        for (int k = 0; k < dim; ++k) {
            double t = static_cast<double>(idx[static_cast<std::size_t>(k)]) / density;
            pt[static_cast<std::size_t>(k)] = lo[static_cast<std::size_t>(k)] +
                t * (hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]);
        }
        fn(pt);
        int k = 0;
        while (k < dim && ++idx[static_cast<std::size_t>(k)] >= density) {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == dim) break;
    }
}

}  // namespace detail

/// Probe-validate a coefficient set. The x probe lattice covers x_box
/// (defaults to [-1,1]^N when empty), the y lattice covers one period [0,1)^N.
/// Throws ConfigError on asymmetry, loss of ellipticity or aperiodicity in y.
inline CoefficientSet validate_coefficient_set(std::vector<Expression> a, std::vector<Expression> b,
                                               Expression c, int dim, int probe_density = 16,
                                               std::vector<double> x_lo = {},
                                               std::vector<double> x_hi = {}) {
    if (dim < 1) throw ConfigError("coefficient set: dimension must be >= 1");
    if (a.size() != static_cast<std::size_t>(dim * dim))
        throw ConfigError("coefficient set: a must have N*N entries");
    if (b.size() != static_cast<std::size_t>(dim))
        throw ConfigError("coefficient set: b must have N entries");
    if (!c) throw ConfigError("coefficient set: c missing");
    if (probe_density < 4) throw ConfigError("coefficient set: probe density must be >= 4");

    CoefficientSet cs;
    cs.dim = dim;
    cs.a = std::move(a);
    cs.b = std::move(b);
    cs.c = std::move(c);

    for (const auto& e : cs.a) {
        if (max_var_index(*e, true) > dim || max_var_index(*e, false) > dim)
            throw ConfigError("coefficient set: a references a variable beyond dimension " +
                              std::to_string(dim));
    }
    for (const auto& e : cs.b) {
        if (max_var_index(*e, true) > dim || max_var_index(*e, false) > dim)
            throw ConfigError("coefficient set: b references a variable beyond dimension " +
                              std::to_string(dim));
    }
    if (max_var_index(*cs.c, true) > dim || max_var_index(*cs.c, false) > dim)
        throw ConfigError("coefficient set: c references a variable beyond dimension " +
                          std::to_string(dim));

    if (x_lo.empty()) x_lo.assign(static_cast<std::size_t>(dim), -1.0);
    if (x_hi.empty()) x_hi.assign(static_cast<std::size_t>(dim), 1.0);
    std::vector<double> y_lo(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> y_hi(static_cast<std::size_t>(dim), 1.0);

    cs.y_independent = true;
    for (const auto& e : cs.a) cs.y_independent = cs.y_independent && !uses_fast_variable(*e);
    for (const auto& e : cs.b) cs.y_independent = cs.y_independent && !uses_fast_variable(*e);
    cs.y_independent = cs.y_independent && !uses_fast_variable(*cs.c);

    const double sym_tol = 1e-12;
    const double per_tol = 1e-12;
    double min_eig = std::numeric_limits<double>::infinity();
    bool c_all_zero = true;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    detail::probe_lattice(dim, probe_density, x_lo, x_hi, [&](std::span<const double> x) {
        detail::probe_lattice(dim, probe_density, y_lo, y_hi, [&](std::span<const double> y) {
            // symmetry a^{ij} = a^{ji}
            for (int i = 0; i < dim; ++i)
                for (int j = i + 1; j < dim; ++j) {
                    double d = cs.eval_a(i, j, x, y) - cs.eval_a(j, i, x, y);
                    if (std::fabs(d) > sym_tol)
                        throw ConfigError("coefficient set: a is not symmetric (a" +
                                          std::to_string(i + 1) + std::to_string(j + 1) + " vs a" +
                                          std::to_string(j + 1) + std::to_string(i + 1) +
                                          " differ by " + std::to_string(d) + ")");
                }
            // ellipticity
            if (dim == 1) {
                min_eig = std::min(min_eig, cs.eval_a(0, 0, x, y));
            } else {
                es.compute(cs.a_matrix(x, y), Eigen::EigenvaluesOnly);
                min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
            }
            if (std::fabs(cs.eval_c(x, y)) > 1e-14) c_all_zero = false;
            // periodicity in each fast coordinate
            std::vector<double> ys(y.begin(), y.end());
            for (int k = 0; k < dim; ++k) {
                ys[static_cast<std::size_t>(k)] += 1.0;
                auto check = [&](const Expression& e, const char* which) {
                    double d = evaluate(e, x, ys) - evaluate(e, x, y);
                    if (std::fabs(d) > per_tol)
                        throw ConfigError(std::string("coefficient set: ") + which +
                                          " is not 1-periodic in y" + std::to_string(k + 1) +
                                          " (jump " + std::to_string(d) + ")");
                };
                for (const auto& e : cs.a) check(e, "a");
                for (const auto& e : cs.b) check(e, "b");
                check(cs.c, "c");
                ys[static_cast<std::size_t>(k)] -= 1.0;
            }
        });
    });

    if (!(min_eig > 0.0))
        throw ConfigError("coefficient set: ellipticity failure, probed min eigenvalue of a is " +
                          std::to_string(min_eig));
    cs.ellipticity = min_eig;
    cs.c_zero = c_all_zero;
    return cs;
}

/// Convenience: build a constant-coefficient set.
inline CoefficientSet constant_coefficients(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                            double c) {
    int dim = static_cast<int>(a.rows());
    std::vector<Expression> ae, be;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            ae.push_back(parse_expression(std::to_string(a(i, j))));
    for (int j = 0; j < dim; ++j) be.push_back(parse_expression(std::to_string(b(j))));
    return validate_coefficient_set(std::move(ae), std::move(be),
                                    parse_expression(std::to_string(c)), dim, 4);
}

}  // namespace ghz
