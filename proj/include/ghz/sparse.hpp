#pragma once

#include <Eigen/Sparse>
#include <limits>
#include <vector>

#include "ghz/grid.hpp"

namespace ghz {

/// Assembled finite-difference operator. For Dirichlet box problems the
/// matrix acts on interior nodes only (active set); boundary values are
/// eliminated as zeros. Torus operators act on every node.
struct SparseOperator {
    enum class Kind { DirichletBox, PeriodicCell, AdjointDensity };

    Kind kind = Kind::DirichletBox;
    Eigen::SparseMatrix<double, Eigen::RowMajor> mat;

    BoxGrid box;      // valid when kind == DirichletBox
    TorusGrid torus;  // valid otherwise
    std::vector<long> active_to_node;  // box: matrix row -> full-grid node
    std::vector<long> node_to_active;  // box: full-grid node -> row, -1 on boundary

    double eps = 0.0;
    double alpha = 1.0;
    double viscosity = 1.0;
    double drift_scale = 1.0;

    // range of the zeroth-order coefficient over the sampled nodes; used for
    // the principal-eigenvalue bound assertions
    double zero_order_min = std::numeric_limits<double>::infinity();
    double zero_order_max = -std::numeric_limits<double>::infinity();
    bool c_zero = false;

    bool coarse_grid_warning = false;   // fewer than 4 nodes per fast oscillation
    bool sign_pattern_warning = false;  // mixed stencil broke the M-matrix sign pattern

    long rows() const { return mat.rows(); }

    /// Gershgorin upper bound on the real parts of eigenvalues:
    /// max_i (a_ii + sum_{j != i} |a_ij|).
    double gershgorin_upper() const {
        double s = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < mat.outerSize(); ++i) {
            double diag = 0, off = 0;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, i); it; ++it) {
                if (it.col() == i)
                    diag += it.value();
                else
                    off += std::abs(it.value());
            }
            s = std::max(s, diag + off);
        }
        return s;
    }

    struct SignPatternReport {
        bool diagonal_negative = true;   // every diagonal entry < 0 after ignoring zeroth order? (informational)
        bool off_diagonal_nonneg = true; // Metzler sign pattern (negated matrix is a Z-matrix)
        double worst_off_diagonal = 0.0;
        double worst_row_sum = -std::numeric_limits<double>::infinity();
    };

    /// Sign-pattern check behind the discrete maximum principle: off-diagonal
    /// entries of the operator must be >= 0 (so the negated matrix is a
    /// Z-matrix), and with c <= 0 the row sums must be <= 0 (weak dominance
    /// of the negated matrix).
    SignPatternReport sign_pattern(double tol = 0.0) const {
        SignPatternReport r;
        for (int i = 0; i < mat.outerSize(); ++i) {
            double row_sum = 0;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, i); it; ++it) {
                row_sum += it.value();
                if (it.col() == i) {
                    if (it.value() >= 0) r.diagonal_negative = false;
                } else if (it.value() < -tol) {
                    r.off_diagonal_nonneg = false;
                    r.worst_off_diagonal = std::min(r.worst_off_diagonal, it.value());
                }
            }
            r.worst_row_sum = std::max(r.worst_row_sum, row_sum);
        }
        return r;
    }

    /// Largest |column sum|; the adjoint density operator must conserve mass,
    /// i.e. every column sum vanishes.
    double max_abs_column_sum() const {
        Eigen::VectorXd sums = Eigen::VectorXd::Zero(mat.cols());
        for (int i = 0; i < mat.outerSize(); ++i)
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, i); it; ++it)
                sums[it.col()] += it.value();
        return sums.cwiseAbs().maxCoeff();
    }
};

}  // namespace ghz
