#pragma once

// Dense matrix-equation toolbox for the blow-up analysis at a hyperbolic
// fixed point: spectral projectors onto the invariant subspaces of B,
// Lyapunov/Sylvester solves, the delta-regularized Riccati equation, the
// maximal PSD solution of the Bernoulli equation 4 G Q G - B G - G B^T = 0,
// the Ornstein-Uhlenbeck constant sigma = -2 tr(Q G), and the quadratic
// barrier forms. Everything is dense; N is the space dimension (tiny).
//
// Convention: B(i,j) = d bbar_j / d x_i, the transpose of the ODE Jacobian.
// The stable subspace of dz/dt = -B^T z corresponds to eigenvalues of B with
// positive real part.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ghz/errors.hpp"

namespace ghz {

inline constexpr double kHyperTol = 1e-8;

namespace detail {

inline std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

struct OrderedSchur {
    Eigen::MatrixXd u;  // orthogonal
    Eigen::MatrixXd t;  // quasi upper triangular, selected eigenvalues leading
    int leading = 0;    // size of the leading (selected) group
};

// A X - X B = C, dense Kronecker solve for tiny blocks.
inline Eigen::MatrixXd solve_sylvester_small(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                             const Eigen::MatrixXd& c) {
    const long p = a.rows(), q = b.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p * q, p * q);
    // vec(A X) = (I_q kron A) vec(X); vec(X B) = (B^T kron I_p) vec(X)
    for (long j = 0; j < q; ++j) m.block(j * p, j * p, p, p) += a;
    for (long j = 0; j < q; ++j)
        for (long i = 0; i < q; ++i) m.block(j * p, i * p, p, p) -= b(i, j) * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd rhs(p * q);
    for (long j = 0; j < q; ++j) rhs.segment(j * p, p) = c.col(j);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) throw NumericError("sylvester block solve singular");
    Eigen::VectorXd v = lu.solve(rhs);
    Eigen::MatrixXd x(p, q);
    for (long j = 0; j < q; ++j) x.col(j) = v.segment(j * p, p);
    return x;
}

// Real Schur form with the diagonal blocks reordered so that eigenvalues with
// select(re) == true come first. Adjacent blocks are swapped through the
// direct method: solve the small Sylvester equation for the invariant
// subspace, orthonormalize, apply.
inline OrderedSchur ordered_real_schur(const Eigen::MatrixXd& b,
                                       const std::function<bool(double)>& select) {
    const long n = b.rows();
    Eigen::RealSchur<Eigen::MatrixXd> schur(b);
    if (schur.info() != Eigen::Success) throw NumericError("real Schur factorization failed");
    Eigen::MatrixXd t = schur.matrixT();
    Eigen::MatrixXd u = schur.matrixU();

    auto block_starts = [&]() {
        std::vector<long> starts;
        long i = 0;
        while (i < n) {
            starts.push_back(i);
            i += (i + 1 < n && t(i + 1, i) != 0.0) ? 2 : 1;
        }
        return starts;
    };
    auto block_re = [&](long start, long size) {
        return size == 1 ? t(start, start) : 0.5 * (t(start, start) + t(start + 1, start + 1));
    };

    bool swapped = true;
    while (swapped) {
        swapped = false;
        auto starts = block_starts();
        for (std::size_t bi = 0; bi + 1 < starts.size(); ++bi) {
            long s1 = starts[bi];
            long p = (bi + 1 < starts.size() ? starts[bi + 1] : n) - s1;
            long s2 = s1 + p;
            long q = (bi + 2 < starts.size() ? starts[bi + 2] : n) - s2;
            bool first_sel = select(block_re(s1, p));
            bool second_sel = select(block_re(s2, q));
            if (first_sel || !second_sel) continue;
            // swap blocks: T = [[A, C],[0, D]] -> leading block similar to D
            Eigen::MatrixXd a = t.block(s1, s1, p, p);
            Eigen::MatrixXd d = t.block(s2, s2, q, q);
            Eigen::MatrixXd c = t.block(s1, s2, p, q);
            Eigen::MatrixXd x = solve_sylvester_small(a, d, -c);
            Eigen::MatrixXd stacked(p + q, q);
            stacked.topRows(p) = x;
            stacked.bottomRows(q) = Eigen::MatrixXd::Identity(q, q);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
            Eigen::MatrixXd qq = qr.householderQ();
            t.block(s1, 0, p + q, n) = (qq.transpose() * t.block(s1, 0, p + q, n)).eval();
            t.block(0, s1, n, p + q) = (t.block(0, s1, n, p + q) * qq).eval();
            u.block(0, s1, n, p + q) = (u.block(0, s1, n, p + q) * qq).eval();
            t.block(s1 + q, s1, p, q).setZero();  // rounding left by the rotation
            // re-zero below each 1x1 block inside the swapped window
            for (long r = s1; r < s1 + p + q; ++r)
                for (long cidx = s1; cidx < r - 1; ++cidx) t(r, cidx) = 0.0;
            swapped = true;
            break;
        }
    }

    auto starts = block_starts();
    long lead = 0;
    for (std::size_t bi = 0; bi < starts.size(); ++bi) {
        long s = starts[bi];
        long sz = (bi + 1 < starts.size() ? starts[bi + 1] : n) - s;
        if (!select(block_re(s, sz))) break;
        lead += sz;
    }
    OrderedSchur out;
    out.u = std::move(u);
    out.t = std::move(t);
    out.leading = static_cast<int>(lead);
    return out;
}

inline void require_hyperbolic(const Eigen::MatrixXd& b, double hyper_tol) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
    for (long i = 0; i < b.rows(); ++i)
        if (std::abs(es.eigenvalues()[i].real()) < hyper_tol)
            throw NumericError("matrix is not hyperbolic: eigenvalue with |Re| = " +
                               std::to_string(std::abs(es.eigenvalues()[i].real())) +
                               " below tolerance " + std::to_string(hyper_tol));
}

}  // namespace detail

/// Spectral projectors onto the invariant subspaces of B for eigenvalues with
/// positive (pi_s) and negative (pi_u) real parts, plus orthonormal bases and
/// the restrictions of B to each subspace.
struct ProjectorPair {
    Eigen::MatrixXd pi_s, pi_u;
    int dim_stable = 0, dim_unstable = 0;
    Eigen::MatrixXd basis_s, rest_s;  // B basis_s = basis_s rest_s, eig(rest_s) in Re > 0
    Eigen::MatrixXd basis_u, rest_u;  // eig(rest_u) in Re < 0
};

inline ProjectorPair spectral_projectors(const Eigen::MatrixXd& b, double hyper_tol = kHyperTol) {
    detail::require_hyperbolic(b, hyper_tol);
    const long n = b.rows();
    ProjectorPair pp;

    auto pos = detail::ordered_real_schur(b, [](double re) { return re > 0; });
    pp.dim_stable = pos.leading;
    pp.dim_unstable = static_cast<int>(n) - pos.leading;
    const long k = pos.leading;
    pp.basis_s = pos.u.leftCols(k);
    pp.rest_s = pos.t.topLeftCorner(k, k);
    if (k == 0) {
        pp.pi_s = Eigen::MatrixXd::Zero(n, n);
    } else if (k == n) {
        pp.pi_s = Eigen::MatrixXd::Identity(n, n);
    } else {
        // projector of the block-triangular form [[T11, T12],[0, T22]] is
        // [[I, Y],[0, 0]] with the coupling Y solving T11 Y - Y T22 = T12
        Eigen::MatrixXd y = detail::solve_sylvester_small(
            pos.t.topLeftCorner(k, k), pos.t.bottomRightCorner(n - k, n - k),
            pos.t.topRightCorner(k, n - k));
        Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(n, n);
        proj.topLeftCorner(k, k).setIdentity();
        proj.topRightCorner(k, n - k) = y;
        pp.pi_s = pos.u * proj * pos.u.transpose();
    }
    pp.pi_u = Eigen::MatrixXd::Identity(n, n) - pp.pi_s;

    auto neg = detail::ordered_real_schur(b, [](double re) { return re < 0; });
    pp.basis_u = neg.u.leftCols(neg.leading);
    pp.rest_u = neg.t.topLeftCorner(neg.leading, neg.leading);
    if (neg.leading != pp.dim_unstable)
        throw NumericError("spectral projectors: inconsistent group sizes");
    return pp;
}

/// Solve A^T X + X A = C (A real, C symmetric) by complex Schur substitution.
/// Requires that no two eigenvalues of A sum to zero.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
    const long n = a.rows();
    if (n == 0) return Eigen::MatrixXd();
    using CMat = Eigen::MatrixXcd;
    Eigen::ComplexSchur<Eigen::MatrixXd> schur(a);
    if (schur.info() != Eigen::Success) throw NumericError("lyapunov: Schur factorization failed");
    const CMat t = schur.matrixT();
    const CMat q = schur.matrixU();
    CMat ctil = q.adjoint() * c * q;
    CMat y = CMat::Zero(n, n);

    double min_gap = std::numeric_limits<double>::infinity();
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            min_gap = std::min(min_gap, std::abs(std::conj(t(i, i)) + t(j, j)));
    if (min_gap < 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
        // report the smallest singular value of the Kronecker operator
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n * n, n * n);
        for (long j = 0; j < n; ++j) m.block(j * n, j * n, n, n) += a.transpose();
        for (long j = 0; j < n; ++j)
            for (long i = 0; i < n; ++i) m.block(j * n, i * n, n, n) += a(i, j) * Eigen::MatrixXd::Identity(n, n);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        throw NumericError("lyapunov operator near-singular, smallest singular value " +
                           std::to_string(svd.singularValues().minCoeff()));
    }

    // column by column: (T^* + t_jj I) y_j = ctil_j - sum_{k<j} y_k t_kj,
    // T^* lower triangular -> forward substitution
    for (long j = 0; j < n; ++j) {
        Eigen::VectorXcd rhs = ctil.col(j);
        for (long k = 0; k < j; ++k) rhs -= y.col(k) * t(k, j);
        Eigen::VectorXcd yj(n);
        for (long i = 0; i < n; ++i) {
            std::complex<double> acc = rhs(i);
            for (long k = 0; k < i; ++k) acc -= std::conj(t(k, i)) * yj(k);
            yj(i) = acc / (std::conj(t(i, i)) + t(j, j));
        }
        y.col(j) = yj;
    }
    Eigen::MatrixXd x = (q * y * q.adjoint()).real();
    x = 0.5 * (x + x.transpose()).eval();

    // backward-stability scale: the achievable residual grows with ||A|| ||X||
    const double scale = std::max({1.0, c.cwiseAbs().maxCoeff(),
                                   a.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff()});
    const double res = (a.transpose() * x + x * a - c).cwiseAbs().maxCoeff();
    if (res > 1e-10 * scale)
        throw NumericError("lyapunov residual " + detail::fmt_sci(res) + " above tolerance");
    return x;
}

/// A_s, A_u solving B A_s + A_s B^T = Pi_s Pi_s^T and B A_u + A_u B^T =
/// -Pi_u Pi_u^T, each supported on its own invariant subspace (the integral
/// representations over (-inf,0] and [0,inf)).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lyapunov_pair(const Eigen::MatrixXd& b,
                                                                 double hyper_tol = kHyperTol) {
    ProjectorPair pp = spectral_projectors(b, hyper_tol);
    const long n = b.rows();
    Eigen::MatrixXd a_s = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd a_u = Eigen::MatrixXd::Zero(n, n);
    if (pp.dim_stable > 0) {
        Eigen::MatrixXd z = pp.basis_s.transpose() * pp.pi_s * pp.pi_s.transpose() * pp.basis_s;
        // rest_s Y + Y rest_s^T = Z  <=>  solve_lyapunov(rest_s^T, Z)
        Eigen::MatrixXd y = solve_lyapunov(pp.rest_s.transpose(), z);
        a_s = pp.basis_s * y * pp.basis_s.transpose();
    }
    if (pp.dim_unstable > 0) {
        Eigen::MatrixXd z = pp.basis_u.transpose() * pp.pi_u * pp.pi_u.transpose() * pp.basis_u;
        Eigen::MatrixXd y = solve_lyapunov(pp.rest_u.transpose(), -z);
        a_u = pp.basis_u * y * pp.basis_u.transpose();
    }
    return {a_s, a_u};
}

/// Unique positive definite solution of
///   4 G Q G - (B Pi_s + delta I) G - G (B Pi_s + delta I)^T = 0
/// obtained through X = G^{-1} solving the Lyapunov equation
///   (B Pi_s + delta I)^T X + X (B Pi_s + delta I) = 4 Q.
inline Eigen::MatrixXd riccati_delta(const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                                     double delta, double hyper_tol = kHyperTol) {
    if (!(delta > 0)) throw ConfigError("riccati: delta must be positive");
    Eigen::LLT<Eigen::MatrixXd> qllt(q);
    if (qllt.info() != Eigen::Success) throw NumericError("riccati: Q must be positive definite");
    ProjectorPair pp = spectral_projectors(b, hyper_tol);
    const long n = b.rows();
    Eigen::MatrixXd a = b * pp.pi_s + delta * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd x = solve_lyapunov(a, 4.0 * q);
    Eigen::LLT<Eigen::MatrixXd> llt(x);
    if (llt.info() != Eigen::Success)
        throw NumericError("riccati: Lyapunov solution lost positive definiteness");
    Eigen::MatrixXd gamma = x.inverse();
    gamma = 0.5 * (gamma + gamma.transpose()).eval();
    const double res = (4.0 * gamma * q * gamma - a * gamma - gamma * a.transpose()).cwiseAbs().maxCoeff();
    if (res > 1e-8 * std::max(1.0, gamma.cwiseAbs().maxCoeff()))
        throw NumericError("riccati residual " + std::to_string(res) + " above tolerance");
    return gamma;
}

struct BernoulliSolution {
    Eigen::MatrixXd gamma;      // symmetric PSD, maximal solution
    double residual = 0.0;      // of 4 G Q G - B G - G B^T
    double sigma = 0.0;         // -2 tr(Q G)
    std::string route = "subspace";
    std::vector<double> delta_distances;  // ||G_delta - G|| over the delta schedule
};

/// Maximal positive semi-definite solution of 4 G Q G - B G - G B^T = 0.
/// Primary route restricts to the invariant subspace with Re > 0 and solves
/// one Lyapunov equation; the delta-continuation is rerun as a
/// cross-check and both must agree.
inline BernoulliSolution bernoulli_max(const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                                       double hyper_tol = kHyperTol) {
    Eigen::LLT<Eigen::MatrixXd> qllt(q);
    if (qllt.info() != Eigen::Success) throw NumericError("bernoulli: Q must be positive definite");
    ProjectorPair pp = spectral_projectors(b, hyper_tol);
    const long n = b.rows();

    BernoulliSolution sol;
    if (pp.dim_stable == 0) {
        sol.gamma = Eigen::MatrixXd::Zero(n, n);
    } else {
        const Eigen::MatrixXd qs = pp.basis_s.transpose() * q * pp.basis_s;
        const Eigen::MatrixXd x = solve_lyapunov(pp.rest_s, 4.0 * qs);
        Eigen::LLT<Eigen::MatrixXd> llt(x);
        if (llt.info() != Eigen::Success)
            throw NumericError("bernoulli: restricted Lyapunov solution not positive definite");
        sol.gamma = pp.basis_s * x.inverse() * pp.basis_s.transpose();
        sol.gamma = 0.5 * (sol.gamma + sol.gamma.transpose()).eval();
    }

    // delta-continuation cross-check
    const double deltas[3] = {1e-2, 1e-4, 1e-6};
    Eigen::MatrixXd g1, g2;
    for (double d : deltas) {
        Eigen::MatrixXd gd = riccati_delta(b, q, d, hyper_tol);
        sol.delta_distances.push_back((gd - sol.gamma).cwiseAbs().maxCoeff());
        g1 = g2;
        g2 = gd;
    }
    const Eigen::MatrixXd extrap =
        (deltas[1] * g2 - deltas[2] * g1) / (deltas[1] - deltas[2]);
    const double disagreement = (extrap - sol.gamma).cwiseAbs().maxCoeff();
    if (disagreement > 1e-6 * std::max(1.0, sol.gamma.cwiseAbs().maxCoeff()))
        throw NumericError("bernoulli routes disagree by " + std::to_string(disagreement));

    sol.residual = (4.0 * sol.gamma * q * sol.gamma - b * sol.gamma - sol.gamma * b.transpose())
                       .cwiseAbs()
                       .maxCoeff();
    sol.sigma = -2.0 * (q * sol.gamma).trace();

    // invariants of the maximal solution
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.gamma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw NumericError("bernoulli: solution not PSD, min eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff()));
    if (sol.residual > 1e-9)
        throw NumericError("bernoulli residual " + std::to_string(sol.residual));
    const double range_err =
        (sol.gamma - pp.pi_s * sol.gamma * pp.pi_s.transpose()).cwiseAbs().maxCoeff();
    if (range_err > 1e-8)
        throw NumericError("bernoulli: G != Pi_s G Pi_s^T, error " + std::to_string(range_err));
    const double trace_err = std::abs(2.0 * (q * sol.gamma).trace() - (b * pp.pi_s).trace());
    if (trace_err > 1e-8)
        throw NumericError("bernoulli: trace identity violated by " + std::to_string(trace_err));
    return sol;
}

/// sigma = -2 tr(Q Gamma) plus the profile matrix for exp(-z^T Gamma z).
inline BernoulliSolution ou_sigma(const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                                  double hyper_tol = kHyperTol) {
    return bernoulli_max(b, q, hyper_tol);
}

/// Quadratic barrier Phi_mu^nu(x) = mu phi_s(x-xi) - nu phi_u(x-xi) built from
/// the Lyapunov pair; validated by sampling Hbar(grad Phi(x), x) on sphere
/// shells around xi. mu and nu are halved until the largest sampled
/// Hbar/|x-xi|^2 is negative (at most 10 halvings); failure is reported, not
/// thrown.
struct QuadraticBarrier {
    Eigen::MatrixXd a_s, a_u;
    Eigen::VectorXd xi;
    double mu = 0.0, nu = 0.0;
    bool valid = false;
    double worst_ratio = 0.0;  // max Hbar / |x-xi|^2 over the sampled shell
    int halvings = 0;

    double value(const Eigen::VectorXd& x) const {
        Eigen::VectorXd d = x - xi;
        return mu * d.dot(a_s * d) - nu * d.dot(a_u * d);
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        Eigen::VectorXd d = x - xi;
        return 2.0 * (mu * a_s - nu * a_u) * d;
    }
};

inline QuadraticBarrier quadratic_barrier(
    const Eigen::VectorXd& xi, const Eigen::MatrixXd& b, double mu, double nu,
    const std::function<double(const Eigen::VectorXd& p, const Eigen::VectorXd& x)>& hbar,
    double shell_radius, double hyper_tol = kHyperTol) {
    if (mu < 0 || nu < 0) throw ConfigError("barrier: mu and nu must be nonnegative");
    QuadraticBarrier bar;
    bar.xi = xi;
    std::tie(bar.a_s, bar.a_u) = lyapunov_pair(b, hyper_tol);
    bar.mu = mu;
    bar.nu = nu;

    const int n = static_cast<int>(xi.size());
    std::vector<Eigen::VectorXd> directions;
    if (n == 1) {
        directions.push_back(Eigen::VectorXd::Constant(1, 1.0));
        directions.push_back(Eigen::VectorXd::Constant(1, -1.0));
    } else {
        const int m = 16;
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
            d[0] = std::cos(2 * M_PI * i / m);
            d[1] = std::sin(2 * M_PI * i / m);
            directions.push_back(d);
        }
        for (int k = 2; k < n; ++k)
            for (double s : {1.0, -1.0}) {
                Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
                d[k] = s;
                directions.push_back(d);
            }
    }

    for (bar.halvings = 0; bar.halvings <= 10; ++bar.halvings) {
        double worst = -std::numeric_limits<double>::infinity();
        for (double r : {shell_radius, 0.5 * shell_radius}) {
            for (const auto& d : directions) {
                Eigen::VectorXd x = xi + r * d;
                worst = std::max(worst, hbar(bar.gradient(x), x) / (r * r));
            }
        }
        bar.worst_ratio = worst;
        if (worst < 0) {
            bar.valid = true;
            return bar;
        }
        if (bar.mu == 0 && bar.nu == 0) break;  // halving cannot help
        bar.mu *= 0.5;
        bar.nu *= 0.5;
    }
    bar.valid = false;
    return bar;
}

}  // namespace ghz
