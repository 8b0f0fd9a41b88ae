#pragma once

// Principal eigenpair (eigenvalue with maximal real part, positive
// eigenfunction) of assembled operators via inverse power iteration on the
// shifted resolvent (s I - A)^{-1}. With an upwinded assembly, s above the
// Gershgorin bound makes (s I - A) a nonsingular M-matrix whose inverse is
// positive, so the iteration converges to the Perron pair (Krein-Rutman).
// The shift is re-centred a few times to keep the contraction fast.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <string>

#include "ghz/sparse.hpp"

namespace ghz {

struct EigenPair {
    double lambda = 0.0;
    Eigen::VectorXd eigenfunction;  // on the operator's active set, strictly positive
    double residual = 0.0;          // ||A u - lambda u||_inf / ||u||_inf
    long iterations = 0;
    enum class Normalization { MaxOne, ValueAtPointOne } normalization = Normalization::MaxOne;
};

struct EigenSolveOptions {
    double tol = 1e-10;
    long max_iters = 50000;
    // assertion slack for the coefficient-bound invariants
    double bound_tol = 1e-8;
    // optional deterministic restart vector (testing the simplicity proxy)
    const Eigen::VectorXd* start = nullptr;
    bool check_bounds = true;
};

namespace detail {

inline double residual_inf(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                           const Eigen::VectorXd& u, double lambda) {
    return (A * u - lambda * u).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff();
}

}  // namespace detail

inline EigenPair principal_eigenpair(const SparseOperator& op, double shift_hint = 0.0,
                                     const EigenSolveOptions& opts = {}) {
    const long n = op.rows();
    if (n == 0) throw NumericError("eigen solve: empty operator");

    // s must stay above the spectral abscissa; Gershgorin gives a safe start.
    double s = 1.0 + std::max(op.gershgorin_upper(), shift_hint);

    Eigen::VectorXd v = opts.start ? *opts.start : Eigen::VectorXd::Ones(n);
    if (v.minCoeff() <= 0) throw NumericError("eigen solve: start vector must be positive");
    v /= v.maxCoeff();

    const Eigen::SparseMatrix<double> a_col = op.mat;  // column-major copy for the LU
    Eigen::SparseMatrix<double> ident(n, n);
    ident.setIdentity();
    Eigen::SparseMatrix<double> shifted(n, n);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    auto refactor = [&](double sh) {
        shifted = ident * sh - a_col;
        lu.compute(shifted);
        if (lu.info() != Eigen::Success)
            throw NumericError("eigen solve: factorization of (sI - A) failed at shift " +
                               std::to_string(sh));
    };
    refactor(s);

    double lambda = -std::numeric_limits<double>::infinity();
    double lambda_prev = lambda;
    long it = 0;
    const long recenter_every = 40;
    int recenters = 0;
    double last_safe_s = s;

    while (it < opts.max_iters) {
        ++it;
        Eigen::VectorXd w = lu.solve(v);
        if (lu.info() != Eigen::Success) throw NumericError("eigen solve: resolvent solve failed");
        if (w.minCoeff() <= 0.0) {
            // the shift dipped at or below the Perron root; back off halfway
            if (recenters == 0)
                throw NumericError("eigen solve: positivity lost, assembly violates the "
                                   "M-matrix sign pattern");
            s = 0.5 * (s + last_safe_s);
            ++recenters;
            refactor(s);
            continue;
        }
        // Rayleigh quotient of the resolvent with the all-ones left weight
        const double theta = w.sum() / v.sum();
        lambda_prev = lambda;
        lambda = s - 1.0 / theta;
        v = w / w.maxCoeff();

        if (std::abs(lambda - lambda_prev) <= opts.tol * std::max(1.0, std::abs(lambda))) {
            const double res = detail::residual_inf(op.mat, v, lambda);
            if (res <= opts.tol) break;
        }
        if (it % recenter_every == 0 && recenters < 12) {
            // contraction is (s - lambda_1)/(s - lambda_2); move s toward the
            // current estimate, keeping a margin above it
            last_safe_s = s;
            const double margin = std::max(1e-2 * (s - lambda), 64 * opts.tol * std::max(1.0, std::abs(lambda)));
            const double proposed = lambda + margin;
            if (proposed < s) {
                s = proposed;
                ++recenters;
                refactor(s);
            }
        }
    }

    EigenPair pair;
    pair.lambda = lambda;
    pair.eigenfunction = v;
    pair.iterations = it;
    pair.residual = detail::residual_inf(op.mat, v, lambda);
    pair.normalization = EigenPair::Normalization::MaxOne;
    if (pair.residual > opts.tol && it >= opts.max_iters)
        throw NumericError("eigen solve: no convergence after " + std::to_string(it) +
                           " iterations, residual " + std::to_string(pair.residual));

    if (opts.check_bounds) {
        // Every periodic solve obeys  min c <= mu <= max c; every Dirichlet
        // solve obeys  lambda <= sup c; with c == 0, lambda < 0.
        if (op.kind == SparseOperator::Kind::PeriodicCell) {
            if (lambda < op.zero_order_min - opts.bound_tol ||
                lambda > op.zero_order_max + opts.bound_tol)
                throw NumericError("eigen solve: periodic eigenvalue " + std::to_string(lambda) +
                                   " violates the zeroth-order bounds [" +
                                   std::to_string(op.zero_order_min) + ", " +
                                   std::to_string(op.zero_order_max) + "]");
        } else if (op.kind == SparseOperator::Kind::DirichletBox) {
            if (lambda > op.zero_order_max + opts.bound_tol)
                throw NumericError("eigen solve: Dirichlet eigenvalue " + std::to_string(lambda) +
                                   " exceeds sup c = " + std::to_string(op.zero_order_max));
            if (op.c_zero && !(lambda < 0))
                throw NumericError("eigen solve: c == 0 requires a negative eigenvalue, got " +
                                   std::to_string(lambda));
        }
    }
    return pair;
}

/// Positive kernel vector of a singular operator whose transpose kernel is
/// known to contain the constants (column sums vanish). The solve pins one
/// component to 1 and solves the remaining consistent system exactly; this is
/// one step of inverse iteration with shift 0, deflated against the known
/// kernel of the adjoint. The result is normalized to unit mean.
inline Eigen::VectorXd kernel_density(const SparseOperator& op, double residual_tol = 1e-8) {
    const long n = op.rows();
    if (op.max_abs_column_sum() > 1e-9)
        throw NumericError("kernel solve: operator does not conserve mass");

    // replace row 0 by the pin theta_0 = 1
    Eigen::SparseMatrix<double> pinned;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(op.mat.nonZeros()) + 1);
    for (int i = 0; i < op.mat.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.mat, i); it; ++it)
            if (it.row() != 0) trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    trips.emplace_back(0, 0, 1.0);
    pinned.resize(n, n);
    pinned.setFromTriplets(trips.begin(), trips.end());

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(pinned);
    if (lu.info() != Eigen::Success) throw NumericError("kernel solve: factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[0] = 1.0;
    Eigen::VectorXd theta = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NumericError("kernel solve: solve failed");

    if (theta.minCoeff() <= 0.0)
        throw NumericError("kernel solve: density lost positivity (min " +
                           std::to_string(theta.minCoeff()) + ")");
    const double res = (op.mat * theta).cwiseAbs().maxCoeff() / theta.cwiseAbs().maxCoeff();
    if (res > residual_tol)
        throw NumericError("kernel solve: residual " + std::to_string(res) + " above tolerance");
    theta /= theta.mean();  // unit mass on the unit torus
    return theta;
}

/// W_eps = -eps log u on the active set; requires max-normalization.
inline Eigen::VectorXd log_transform(const EigenPair& pair, double eps) {
    if (pair.normalization != EigenPair::Normalization::MaxOne ||
        std::abs(pair.eigenfunction.maxCoeff() - 1.0) > 1e-12)
        throw NumericError("log transform: eigenfunction must be normalized to max 1");
    const long n = pair.eigenfunction.size();
    Eigen::VectorXd w(n);
    for (long i = 0; i < n; ++i) {
        const double u = pair.eigenfunction[i];
        if (!(u > 0.0))
            throw NumericError("log transform: nonpositive eigenfunction value at node " +
                               std::to_string(i));
        w[i] = -eps * std::log(u);
        if (w[i] < 0.0) w[i] = 0.0;  // clip -0 and rounding at the max node
    }
    return w;
}

/// Scatter an active-set vector onto the full box grid (boundary gets `fill`).
inline BoxFunction scatter_to_grid(const SparseOperator& op, const Eigen::VectorXd& active_values,
                                   double fill) {
    if (op.kind != SparseOperator::Kind::DirichletBox)
        throw NumericError("scatter: only Dirichlet box operators carry an active set");
    Eigen::VectorXd full = Eigen::VectorXd::Constant(op.box.node_count(), fill);
    for (long r = 0; r < static_cast<long>(op.active_to_node.size()); ++r)
        full[op.active_to_node[static_cast<std::size_t>(r)]] = active_values[r];
    return BoxFunction(op.box, std::move(full));
}

/// Blow-up rescaling w(z) = u(xi + sqrt(eps) z) / u(xi) onto a uniform z-grid
/// of `znodes` points per axis covering [-z_radius, z_radius]^N.
inline BoxFunction blowup_rescale(const BoxFunction& u, std::span<const double> xi, double eps,
                                  double z_radius, int znodes) {
    const int dim = u.grid.dim();
    const double r = std::sqrt(eps) * z_radius;
    std::vector<double> corner_lo(xi.begin(), xi.end()), corner_hi(xi.begin(), xi.end());
    for (int k = 0; k < dim; ++k) {
        corner_lo[static_cast<std::size_t>(k)] -= r;
        corner_hi[static_cast<std::size_t>(k)] += r;
    }
    if (!u.grid.contains(corner_lo) || !u.grid.contains(corner_hi))
        throw NumericError("blow-up: ball xi + sqrt(eps) [-Z,Z]^N exits the domain");

    const double u0 = interpolate(u, xi);
    if (!(u0 > 0.0)) throw NumericError("blow-up: u(xi) must be positive");

    BoxGrid zgrid(std::vector<double>(static_cast<std::size_t>(dim), -z_radius),
                  std::vector<double>(static_cast<std::size_t>(dim), z_radius),
                  std::vector<int>(static_cast<std::size_t>(dim), znodes - 1));
    Eigen::VectorXd w(zgrid.node_count());
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (long lin = 0; lin < zgrid.node_count(); ++lin) {
        const std::vector<double> z = zgrid.node(zgrid.unindex(lin));
        for (int k = 0; k < dim; ++k)
            x[static_cast<std::size_t>(k)] = xi[static_cast<std::size_t>(k)] +
                                             std::sqrt(eps) * z[static_cast<std::size_t>(k)];
        w[lin] = interpolate(u, x) / u0;
    }
    return BoxFunction(zgrid, std::move(w));
}

}  // namespace ghz
