#pragma once

// Finite-difference assembly. Second derivatives use central differences,
// mixed derivatives the 4-point cross stencil, first derivatives upwinding on
// the sign of the convection coefficient so the discrete maximum principle
// holds. Coefficients are sampled pointwise at nodes.

#include <vector>

#include "ghz/coefficients.hpp"
#include "ghz/sparse.hpp"

namespace ghz {

namespace detail {

// Per-row accumulator; the diagonal of the derivative part is formed as the
// negated sum of its off-diagonal weights so that stencil rows sum to the
// zeroth-order coefficient exactly.
struct RowAccum {
    std::vector<std::pair<long, double>> entries;

    void add(long col, double v) {
        for (auto& e : entries)
            if (e.first == col) {
                e.second += v;
                return;
            }
        entries.emplace_back(col, v);
    }
};

}  // namespace detail

/// Discretize  eps^2 a^{ij}(x, x/eps^alpha) d_ij + eps b^j(x, x/eps^alpha) d_j
/// + c(x, x/eps^alpha)  on the interior of the box, Dirichlet rows eliminated.
inline SparseOperator assemble_dirichlet(const CoefficientSet& cs, const BoxGrid& grid, double eps,
                                         double alpha) {
    if (!(eps > 0)) throw ConfigError("assemble: eps must be positive");
    if (!(alpha > 0)) throw ConfigError("assemble: alpha must be positive");
    if (grid.dim() != cs.dim) throw ConfigError("assemble: grid and coefficients disagree on N");

    SparseOperator op;
    op.kind = SparseOperator::Kind::DirichletBox;
    op.box = grid;
    op.eps = eps;
    op.alpha = alpha;
    op.c_zero = cs.c_zero;

    const int dim = grid.dim();
    const long total = grid.node_count();
    op.node_to_active.assign(static_cast<std::size_t>(total), -1);
    for (long lin = 0; lin < total; ++lin) {
        if (!grid.is_boundary(grid.unindex(lin))) {
            op.node_to_active[static_cast<std::size_t>(lin)] = static_cast<long>(op.active_to_node.size());
            op.active_to_node.push_back(lin);
        }
    }
    const long n = static_cast<long>(op.active_to_node.size());

    const double fast_scale = std::pow(eps, alpha);
    if (!cs.y_independent)
        for (int k = 0; k < dim; ++k)
            if (grid.spacing(k) > fast_scale / 4.0) op.coarse_grid_warning = true;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * (2 * dim + 2 * dim * (dim - 1) + 1 + 2));

    std::vector<double> y(static_cast<std::size_t>(dim));
    std::vector<int> nb(static_cast<std::size_t>(dim));
    for (long row = 0; row < n; ++row) {
        const long lin = op.active_to_node[static_cast<std::size_t>(row)];
        const std::vector<int> idx = grid.unindex(lin);
        const std::vector<double> x = grid.node(idx);
        for (int k = 0; k < dim; ++k) y[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] / fast_scale;

        detail::RowAccum acc;
        double diag_derivative = 0.0;

        // Dirichlet elimination: boundary columns carry u = 0 and are dropped,
        // but the diagonal keeps the full negated stencil weight.
        auto off = [&](const std::vector<int>& q, double v) {
            if (!grid.is_boundary(q))
                acc.add(op.node_to_active[static_cast<std::size_t>(grid.index(q))], v);
            diag_derivative -= v;
        };

        // second derivatives
        for (int k = 0; k < dim; ++k) {
            const double h = grid.spacing(k);
            const double w = eps * eps * cs.eval_a(k, k, x, y) / (h * h);
            nb = idx;
            nb[static_cast<std::size_t>(k)] += 1;
            off(nb, w);
            nb[static_cast<std::size_t>(k)] -= 2;
            off(nb, w);
        }
        // mixed derivatives, pairs (k,l), k<l, coefficient 2 a^{kl}
        for (int k = 0; k < dim; ++k)
            for (int l = k + 1; l < dim; ++l) {
                const double akl = cs.eval_a(k, l, x, y);
                if (akl == 0.0) continue;
                const double w = 2.0 * eps * eps * akl / (4.0 * grid.spacing(k) * grid.spacing(l));
                for (int sk : {+1, -1})
                    for (int sl : {+1, -1}) {
                        nb = idx;
                        nb[static_cast<std::size_t>(k)] += sk;
                        nb[static_cast<std::size_t>(l)] += sl;
                        off(nb, (sk == sl ? w : -w));
                        if ((sk == sl ? w : -w) < 0) op.sign_pattern_warning = true;
                    }
            }
        // first derivatives, upwinded on the sign of eps b^j
        for (int k = 0; k < dim; ++k) {
            const double v = eps * cs.eval_b(k, x, y);
            if (v == 0.0) continue;
            const double h = grid.spacing(k);
            nb = idx;
            nb[static_cast<std::size_t>(k)] += (v > 0 ? +1 : -1);
            off(nb, std::abs(v) / h);
        }
        // zeroth order
        const double c0 = cs.eval_c(x, y);
        op.zero_order_min = std::min(op.zero_order_min, c0);
        op.zero_order_max = std::max(op.zero_order_max, c0);

        acc.add(row, diag_derivative + c0);
        for (const auto& e : acc.entries)
            trips.emplace_back(static_cast<int>(row), static_cast<int>(e.first), e.second);
    }

    op.mat.resize(n, n);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    return op;
}

namespace detail {

// Shared assembly of  visc^2 a d_ij + (first-order field) d_j + zero(y)  on
// the torus, coefficients frozen at x0behind a callback for the convection and
// the zeroth-order term.
template <class Conv, class Zero>
SparseOperator assemble_torus(const CoefficientSet& cs, std::span<const double> x0,
                              const TorusGrid& grid, double visc, Conv conv, Zero zero) {
    if (grid.dim() != cs.dim) throw ConfigError("assemble: torus grid and coefficients disagree on N");
    SparseOperator op;
    op.torus = grid;
    op.viscosity = visc;
    op.c_zero = cs.c_zero;

    const int dim = grid.dim();
    const long n = grid.node_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * (2 * dim + 2 * dim * (dim - 1) + 3));

    std::vector<int> nb(static_cast<std::size_t>(dim));
    for (long row = 0; row < n; ++row) {
        const std::vector<int> idx = grid.unindex(row);
        const std::vector<double> y = grid.node(idx);

        detail::RowAccum acc;
        double diag_derivative = 0.0;
        auto off = [&](const std::vector<int>& q, double v) {
            acc.add(grid.index(q), v);
            diag_derivative -= v;
        };

        for (int k = 0; k < dim; ++k) {
            const double h = grid.spacing(k);
            const double w = visc * visc * cs.eval_a(k, k, x0, y) / (h * h);
            nb = idx;
            nb[static_cast<std::size_t>(k)] += 1;
            off(nb, w);
            nb[static_cast<std::size_t>(k)] -= 2;
            off(nb, w);
        }
        for (int k = 0; k < dim; ++k)
            for (int l = k + 1; l < dim; ++l) {
                const double akl = cs.eval_a(k, l, x0, y);
                if (akl == 0.0) continue;
                const double w = 2.0 * visc * visc * akl / (4.0 * grid.spacing(k) * grid.spacing(l));
                for (int sk : {+1, -1})
                    for (int sl : {+1, -1}) {
                        nb = idx;
                        nb[static_cast<std::size_t>(k)] += sk;
                        nb[static_cast<std::size_t>(l)] += sl;
                        off(nb, (sk == sl ? w : -w));
                        if ((sk == sl ? w : -w) < 0) op.sign_pattern_warning = true;
                    }
            }
        for (int k = 0; k < dim; ++k) {
            const double v = conv(k, y);
            if (v == 0.0) continue;
            nb = idx;
            nb[static_cast<std::size_t>(k)] += (v > 0 ? +1 : -1);
            off(nb, std::abs(v) / grid.spacing(k));
        }
        const double z = zero(y);
        op.zero_order_min = std::min(op.zero_order_min, z);
        op.zero_order_max = std::max(op.zero_order_max, z);
        acc.add(row, diag_derivative + z);
        for (const auto& e : acc.entries)
            trips.emplace_back(static_cast<int>(row), static_cast<int>(e.first), e.second);
    }

    op.mat.resize(n, n);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    return op;
}

}  // namespace detail

/// Cell spectral operator at frozen slow point x0 and momentum p:
///   visc^2 a^{ij}(x0,y) d_ij + visc (b^j(x0,y) - 2 a^{ij}(x0,y) p_i) d_j + H(p,x0,y).
/// visc = 1 is the alpha = 1 cell problem; visc < 1 is the vanishing-viscosity
/// family used for alpha < 1.
inline SparseOperator assemble_periodic_cell(const CoefficientSet& cs, std::span<const double> x0,
                                             std::span<const double> p, double viscosity,
                                             const TorusGrid& grid) {
    if (!(viscosity > 0.0 && viscosity <= 1.0))
        throw ConfigError("assemble: viscosity must lie in (0,1]");
    auto conv = [&](int k, std::span<const double> y) {
        double v = cs.eval_b(k, x0, y);
        for (int i = 0; i < cs.dim; ++i) v -= 2.0 * cs.eval_a(i, k, x0, y) * p[static_cast<std::size_t>(i)];
        return viscosity * v;
    };
    auto zero = [&](std::span<const double> y) { return cs.hamiltonian(p, x0, y); };
    SparseOperator op = detail::assemble_torus(cs, x0, grid, viscosity, conv, zero);
    op.kind = SparseOperator::Kind::PeriodicCell;
    return op;
}

/// Divergence-form operator whose kernel is the invariant density theta*:
///   d_ij(a^{ij}(x0,y) .) - drift_scale * d_j(b^j(x0,y) .).
/// Assembled as the transpose of the consistent upwinded forward operator
///   a^{ij} d_ij + drift_scale b^j d_j,
/// so discrete column sums vanish (mass conservation). drift_scale 0 is the
/// alpha > 1 density, 1 the alpha = 1 density, eps^{alpha-1} the approximate
/// drift family.
inline SparseOperator assemble_adjoint_density(const CoefficientSet& cs, std::span<const double> x0,
                                               const TorusGrid& grid, double drift_scale) {
    if (!(drift_scale >= 0.0)) throw ConfigError("assemble: drift_scale must be >= 0");
    auto conv = [&](int k, std::span<const double> y) { return drift_scale * cs.eval_b(k, x0, y); };
    auto zero = [&](std::span<const double>) { return 0.0; };
    SparseOperator fwd = detail::assemble_torus(cs, x0, grid, 1.0, conv, zero);
    SparseOperator op;
    op.kind = SparseOperator::Kind::AdjointDensity;
    op.torus = grid;
    op.drift_scale = drift_scale;
    op.c_zero = cs.c_zero;
    op.sign_pattern_warning = fwd.sign_pattern_warning;
    op.zero_order_min = 0.0;
    op.zero_order_max = 0.0;
    Eigen::SparseMatrix<double> t = fwd.mat.transpose();
    op.mat = t;
    op.mat.makeCompressed();
    return op;
}

}  // namespace ghz
