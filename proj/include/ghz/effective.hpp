#pragma once

// Effective (homogenized) objects at frozen slow variable x:
//  - regime alpha > 1: Hbar(p,x) = int_Y H(p,x,y) theta(y) dy with theta the
//    unit-mean kernel of d_ij(a^{ij} theta) = 0;
//  - regime alpha = 1: Hbar(p,x) is the principal eigenvalue of the cell
//    problem  a d2 + (b - 2 a p) d + H(p,x,y);
//  - regime alpha < 1: vanishing-viscosity limit of the same cell problem,
//    accelerated by Richardson extrapolation over a viscosity schedule.
// Plus the invariant density theta*, the effective drift bbar = int b theta*,
// and the local diffusion matrix Q = 1/2 d2_p Hbar(0,x).

#include <cstdint>
#include <map>
#include <mutex>
#include <ostream>
#include <vector>

#include "ghz/assemble.hpp"
#include "ghz/eigen_solver.hpp"

namespace ghz {

enum class Regime { Supercritical, Critical, Subcritical };

inline Regime regime_for_alpha(double alpha) {
    if (!(alpha > 0)) throw ConfigError("alpha must be positive");
    if (std::abs(alpha - 1.0) < 1e-12) return Regime::Critical;
    return alpha > 1.0 ? Regime::Supercritical : Regime::Subcritical;
}

struct EffectiveContext {
    CoefficientSet coeffs;
    Regime regime = Regime::Critical;
    TorusGrid torus;
    std::vector<double> viscosity_schedule = {0.4, 0.2, 0.1};
    EigenSolveOptions solver;
};

namespace detail {

inline std::vector<std::int64_t> quantize(std::span<const double> v) {
    std::vector<std::int64_t> key;
    key.reserve(v.size());
    for (double x : v) key.push_back(static_cast<std::int64_t>(llround(x * 1e12)));
    return key;
}

inline std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace detail

/// Unit-mean positive kernel of the adjoint density operator at x0.
inline TorusFunction steady_density(const EffectiveContext& ctx, std::span<const double> x0,
                                    double drift_scale) {
    auto op = assemble_adjoint_density(ctx.coeffs, x0, ctx.torus, drift_scale);
    Eigen::VectorXd theta = kernel_density(op);
    if (std::abs(theta.mean() - 1.0) > 1e-10)
        throw NumericError("steady density: normalization drifted");
    return TorusFunction(ctx.torus, std::move(theta));
}

/// Invariant density of the pure-diffusion cell problem: no drift contribution.
inline TorusFunction invariant_density_supercritical(const EffectiveContext& ctx,
                                                     std::span<const double> x0) {
    return steady_density(ctx, x0, 0.0);
}

/// bbar^j(x) = int_Y b^j(x,y) theta*(x,y) dy by rectangle quadrature.
inline Eigen::VectorXd effective_drift(const EffectiveContext& ctx, std::span<const double> x0,
                                       double drift_scale) {
    TorusFunction theta = steady_density(ctx, x0, drift_scale);
    const int dim = ctx.coeffs.dim;
    Eigen::VectorXd drift = Eigen::VectorXd::Zero(dim);
    const long n = ctx.torus.node_count();
    for (long i = 0; i < n; ++i) {
        const std::vector<double> y = ctx.torus.node(ctx.torus.unindex(i));
        for (int j = 0; j < dim; ++j) drift[j] += ctx.coeffs.eval_b(j, x0, y) * theta.values[i];
    }
    return drift / static_cast<double>(n);
}

inline double effective_H_supercritical(const EffectiveContext& ctx, std::span<const double> p,
                                        std::span<const double> x0,
                                        const TorusFunction* theta_hint = nullptr) {
    TorusFunction local;
    const TorusFunction* theta = theta_hint;
    if (!theta) {
        local = invariant_density_supercritical(ctx, x0);
        theta = &local;
    }
    const long n = ctx.torus.node_count();
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
        const std::vector<double> y = ctx.torus.node(ctx.torus.unindex(i));
        acc += ctx.coeffs.hamiltonian(p, x0, y) * theta->values[i];
    }
    return acc / static_cast<double>(n);
}

inline double effective_H_critical(const EffectiveContext& ctx, std::span<const double> p,
                                   std::span<const double> x0) {
    auto op = assemble_periodic_cell(ctx.coeffs, x0, p, 1.0, ctx.torus);
    return principal_eigenpair(op, 0.0, ctx.solver).lambda;
}

struct SubcriticalResult {
    double value = 0.0;                // extrapolated Hbar
    std::vector<double> viscosities;   // the schedule actually used
    std::vector<double> raw;           // mu(eta) per schedule entry
    bool extrapolated = false;
    bool oscillation_warning = false;  // sequence not monotone beyond tolerance
};

inline SubcriticalResult effective_H_subcritical(const EffectiveContext& ctx,
                                                 std::span<const double> p,
                                                 std::span<const double> x0,
                                                 std::span<const double> schedule) {
    if (schedule.empty()) throw ConfigError("subcritical: empty viscosity schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] < schedule[i - 1]))
            throw ConfigError("subcritical: viscosity schedule must be strictly decreasing");

    SubcriticalResult result;
    for (double eta : schedule) {
        auto op = assemble_periodic_cell(ctx.coeffs, x0, p, eta, ctx.torus);
        result.viscosities.push_back(eta);
        result.raw.push_back(principal_eigenpair(op, 0.0, ctx.solver).lambda);
    }
    if (result.raw.size() == 1) {
        result.value = result.raw[0];
        result.extrapolated = false;
        return result;
    }
    // assumed first-order law mu(eta) = Hbar + C eta: extrapolate from the two
    // smallest viscosities
    const std::size_t m = result.raw.size();
    const double e1 = result.viscosities[m - 2], e2 = result.viscosities[m - 1];
    const double m1 = result.raw[m - 2], m2 = result.raw[m - 1];
    result.value = (m2 * e1 - m1 * e2) / (e1 - e2);
    result.extrapolated = true;

    const double scale = 1e-9 * std::max(1.0, std::abs(result.raw[0]));
    int direction = 0;
    for (std::size_t i = 1; i < m; ++i) {
        const double d = result.raw[i] - result.raw[i - 1];
        if (std::abs(d) <= scale) continue;
        const int s = d > 0 ? 1 : -1;
        if (direction == 0)
            direction = s;
        else if (s != direction)
            result.oscillation_warning = true;
    }
    return result;
}

/// Memoized effective Hamiltonian for the context's regime. Keys are (p, x)
/// quantized to 1e-12; inserts are idempotent, so concurrent duplicate
/// evaluation of the same key is harmless.
class HamiltonianTable {
public:
    explicit HamiltonianTable(EffectiveContext ctx) : ctx_(std::move(ctx)) {}

    const EffectiveContext& context() const { return ctx_; }
    int dim() const { return ctx_.coeffs.dim; }

    double value(std::span<const double> p, std::span<const double> x) const {
        std::vector<std::int64_t> key = detail::quantize(p);
        {
            std::vector<std::int64_t> kx = detail::quantize(x);
            key.insert(key.end(), kx.begin(), kx.end());
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = memo_.find(key);
            if (it != memo_.end()) return it->second;
        }
        const double v = compute(p, x);
        std::lock_guard<std::mutex> lock(mu_);
        return memo_.emplace(std::move(key), v).first->second;
    }

    double value(const Eigen::VectorXd& p, const Eigen::VectorXd& x) const {
        return value(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                     std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }

    std::size_t tabulated() const {
        std::lock_guard<std::mutex> lock(mu_);
        return memo_.size();
    }

    /// Shift of Hbar at (p,x) when the torus resolution doubles; a table is
    /// trusted when this is below 1e-5.
    double resolution_shift(std::span<const double> p, std::span<const double> x) const {
        EffectiveContext doubled = ctx_;
        std::vector<int> n2 = ctx_.torus.nodes;
        for (int& v : n2) v *= 2;
        doubled.torus = TorusGrid(n2);
        HamiltonianTable fine(doubled);
        return std::abs(fine.value(p, x) - value(p, x));
    }

    /// CSV dump of everything tabulated so far: p1..pN, x1..xN, hbar.
    void export_csv(std::ostream& os) const {
        const int dim = ctx_.coeffs.dim;
        for (int k = 1; k <= dim; ++k) os << "p" << k << ",";
        for (int k = 1; k <= dim; ++k) os << "x" << k << ",";
        os << "hbar\n";
        std::lock_guard<std::mutex> lock(mu_);
        char buf[32];
        for (const auto& [key, v] : memo_) {
            for (std::size_t i = 0; i < key.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(key[i]) * 1e-12);
                os << buf << ",";
            }
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            os << buf << "\n";
        }
    }

private:
    double compute(std::span<const double> p, std::span<const double> x) const {
        switch (ctx_.regime) {
            case Regime::Supercritical: {
                const TorusFunction theta = density_for(x);
                return effective_H_supercritical(ctx_, p, x, &theta);
            }
            case Regime::Critical:
                return effective_H_critical(ctx_, p, x);
            case Regime::Subcritical:
                return effective_H_subcritical(ctx_, p, x, ctx_.viscosity_schedule).value;
        }
        throw NumericError("unreachable regime");
    }

    TorusFunction density_for(std::span<const double> x) const {
        auto key = detail::quantize(x);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = density_memo_.find(key);
            if (it != density_memo_.end()) return it->second;
        }
        TorusFunction theta = invariant_density_supercritical(ctx_, x);
        std::lock_guard<std::mutex> lock(mu_);
        return density_memo_.emplace(std::move(key), std::move(theta)).first->second;
    }

    EffectiveContext ctx_;
    mutable std::mutex mu_;
    mutable std::map<std::vector<std::int64_t>, double> memo_;
    mutable std::map<std::vector<std::int64_t>, TorusFunction> density_memo_;
};

/// Q = 1/2 d2_p Hbar(0, x0) by symmetrized central second differences.
/// Throws when the result is not positive definite (noise above the dp^2
/// scale; retry with a larger dp).
template <class Hbar>
Eigen::MatrixXd hessian_q_of(const Hbar& hbar, const Eigen::VectorXd& x0, double dp = 1e-3) {
    const int n = static_cast<int>(x0.size());
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    const double h00 = hbar(p, x0);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd pp = p, pm = p;
        pp[i] += dp;
        pm[i] -= dp;
        hess(i, i) = (hbar(pp, x0) - 2 * h00 + hbar(pm, x0)) / (dp * dp);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd a = p, b = p, c = p, d = p;
            a[i] += dp; a[j] += dp;
            b[i] += dp; b[j] -= dp;
            c[i] -= dp; c[j] += dp;
            d[i] -= dp; d[j] -= dp;
            double v = (hbar(a, x0) - hbar(b, x0) - hbar(c, x0) + hbar(d, x0)) / (4 * dp * dp);
            hess(i, j) = hess(j, i) = v;
        }
    Eigen::MatrixXd q = 0.5 * hess;
    Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (llt.info() != Eigen::Success)
        throw NumericError("hessian Q not positive definite at dp = " + std::to_string(dp) +
                           "; solver noise dominates, retry with larger dp");
    return q;
}

inline Eigen::MatrixXd hessian_Q(const HamiltonianTable& table, const Eigen::VectorXd& x0,
                                 double dp = 1e-3) {
    if (table.context().regime == Regime::Subcritical)
        throw ConfigError("hessian Q requires regime alpha >= 1");
    return hessian_q_of(
        [&](const Eigen::VectorXd& p, const Eigen::VectorXd& x) { return table.value(p, x); }, x0,
        dp);
}

/// Effective drift field with memoized point evaluations and a lattice
/// interpolant for orbit integration.
class DriftField {
public:
    DriftField(EffectiveContext ctx, double drift_scale)
        : ctx_(std::move(ctx)), drift_scale_(drift_scale) {}

    int dim() const { return ctx_.coeffs.dim; }
    double drift_scale() const { return drift_scale_; }
    const EffectiveContext& context() const { return ctx_; }

    Eigen::VectorXd drift(const Eigen::VectorXd& x) const {
        auto key = detail::quantize(std::span<const double>(x.data(), x.size()));
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = memo_.find(key);
            if (it != memo_.end()) return it->second;
        }
        Eigen::VectorXd b = effective_drift(ctx_, detail::to_vec(x), drift_scale_);
        std::lock_guard<std::mutex> lock(mu_);
        return memo_.emplace(std::move(key), std::move(b)).first->second;
    }

    TorusFunction theta_star(const Eigen::VectorXd& x) const {
        return steady_density(ctx_, detail::to_vec(x), drift_scale_);
    }

    /// B(i,j) = d bbar_j / d x_i by central differences.
    Eigen::MatrixXd jacobian_B(const Eigen::VectorXd& x, double step) const {
        const int n = dim();
        Eigen::MatrixXd b(n, n);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += step;
            xm[i] -= step;
            Eigen::VectorXd d = (drift(xp) - drift(xm)) / (2 * step);
            for (int j = 0; j < n; ++j) b(i, j) = d[j];
        }
        return b;
    }

    /// Lattice interpolant of the drift over `box` (n cells per axis) for the
    /// many cheap evaluations orbit integration needs. Queries outside the
    /// box are clamped onto it (integrator stage points may overshoot before
    /// the exit test fires).
    struct Interpolant {
        std::vector<BoxFunction> components;
        Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
            const BoxGrid& g = components.front().grid;
            Eigen::VectorXd xc = x;
            for (long k = 0; k < xc.size(); ++k)
                xc[k] = std::min(g.hi[static_cast<std::size_t>(k)],
                                 std::max(g.lo[static_cast<std::size_t>(k)], xc[k]));
            Eigen::VectorXd v(static_cast<long>(components.size()));
            for (std::size_t k = 0; k < components.size(); ++k)
                v[static_cast<long>(k)] =
                    interpolate(components[k], std::span<const double>(xc.data(), xc.size()));
            return v;
        }
    };

    Interpolant interpolant(const BoxGrid& box) const {
        Interpolant itp;
        const int n = dim();
        std::vector<Eigen::VectorXd> vals(static_cast<std::size_t>(n),
                                          Eigen::VectorXd(box.node_count()));
        for (long lin = 0; lin < box.node_count(); ++lin) {
            std::vector<double> x = box.node(box.unindex(lin));
            Eigen::VectorXd b =
                drift(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<long>(x.size())));
            for (int k = 0; k < n; ++k) vals[static_cast<std::size_t>(k)][lin] = b[k];
        }
        for (int k = 0; k < n; ++k)
            itp.components.emplace_back(box, std::move(vals[static_cast<std::size_t>(k)]));
        return itp;
    }

private:
    EffectiveContext ctx_;
    double drift_scale_;
    mutable std::mutex mu_;
    mutable std::map<std::vector<std::int64_t>, Eigen::VectorXd> memo_;
};

/// Drift scale of the limit objects: the alpha = 1 density carries the full
/// drift, the alpha > 1 density none.
inline double selection_drift_scale(Regime regime) {
    switch (regime) {
        case Regime::Critical: return 1.0;
        case Regime::Supercritical: return 0.0;
        case Regime::Subcritical:
            throw ConfigError("selection machinery requires alpha >= 1");
    }
    throw ConfigError("unreachable regime");
}

/// Drift scale of the eps-dependent approximate drift bbar_eps (alpha > 1).
inline double approximate_drift_scale(Regime regime, double eps, double alpha) {
    if (regime == Regime::Supercritical) return std::pow(eps, alpha - 1.0);
    return selection_drift_scale(regime);
}

}  // namespace ghz
