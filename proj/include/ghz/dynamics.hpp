#pragma once

// Fixed points of the effective flow dx/dt = -bbar(x), their linearization
// B(i,j) = d bbar_j / d x_i, hyperbolicity, the rate sigma(xi) (sum of
// negative real parts of eig(-B)), the selection constant sigma_bar, and a
// heuristic check of the structural hypothesis (finitely many hyperbolic
// fixed points, backward orbits accounted for, no heteroclinic cycle).

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "ghz/effective.hpp"
#include "ghz/matrix_eq.hpp"

namespace ghz {

/// Drift evaluations the dynamics routines need; decoupled from the PDE
/// stack so analytic fields can be tested directly.
struct DriftMap {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian_b;  // B(i,j) = d b_j / d x_i
};

inline DriftMap drift_map(const DriftField& field, double jac_step) {
    return DriftMap{
        [&field](const Eigen::VectorXd& x) { return field.drift(x); },
        [&field, jac_step](const Eigen::VectorXd& x) { return field.jacobian_B(x, jac_step); }};
}

struct FixedPoint {
    Eigen::VectorXd location;
    Eigen::MatrixXd b_matrix;             // B(i,j) = d bbar_j / d x_i at xi
    Eigen::VectorXcd eigenvalues_minus_b; // spectrum of -B
    bool hyperbolic = false;
    double sigma = 0.0;                   // sum of negative real parts of eig(-B), <= 0
    enum class Stability { Sink, Saddle, Source } stability = Stability::Sink;
    double drift_residual = 0.0;          // |bbar(xi)|_inf after convergence
};

inline const char* to_string(FixedPoint::Stability s) {
    switch (s) {
        case FixedPoint::Stability::Sink: return "sink";
        case FixedPoint::Stability::Saddle: return "saddle";
        case FixedPoint::Stability::Source: return "source";
    }
    return "?";
}

struct FixedPointOptions {
    double newton_tol = 1e-10;
    double hyper_tol = kHyperTol;
    double jac_step_rel = 1e-4;    // times box diameter
    double dedupe_rel = 1e-5;      // times box diameter
    int max_newton_iters = 60;
};

inline FixedPoint annotate_fixed_point(const DriftMap& drift, const Eigen::VectorXd& xi,
                                       double jac_step, double hyper_tol) {
    FixedPoint fp;
    fp.location = xi;
    fp.drift_residual = drift.value(xi).cwiseAbs().maxCoeff();
    fp.b_matrix = drift.jacobian_b(xi);
    Eigen::EigenSolver<Eigen::MatrixXd> es(-fp.b_matrix, false);
    fp.eigenvalues_minus_b = es.eigenvalues();
    fp.hyperbolic = fp.eigenvalues_minus_b.real().cwiseAbs().minCoeff() >= hyper_tol;
    fp.sigma = 0.0;
    int negatives = 0;
    for (long i = 0; i < fp.eigenvalues_minus_b.size(); ++i) {
        double re = fp.eigenvalues_minus_b[i].real();
        if (re < 0) {
            fp.sigma += re;
            ++negatives;
        }
    }
    if (negatives == fp.eigenvalues_minus_b.size())
        fp.stability = FixedPoint::Stability::Sink;
    else if (negatives == 0)
        fp.stability = FixedPoint::Stability::Source;
    else
        fp.stability = FixedPoint::Stability::Saddle;
    (void)jac_step;
    return fp;
}

/// Damped Newton from a lattice of seeds; converged roots deduplicated and
/// restricted to the open box. Seeds with a singular Jacobian are skipped.
inline std::vector<FixedPoint> find_fixed_points(const DriftMap& drift, const BoxGrid& box,
                                                 int seeds_per_axis,
                                                 const FixedPointOptions& opts = {}) {
    if (seeds_per_axis < 1) throw ConfigError("fixed points: need at least one seed per axis");
    const int dim = box.dim();
    const double diam = box.diameter();
    const double jac_step = opts.jac_step_rel * diam;

    std::vector<Eigen::VectorXd> roots;
    std::vector<int> seed_idx(static_cast<std::size_t>(dim), 0);
    for (;;) {
        Eigen::VectorXd x(dim);
        for (int k = 0; k < dim; ++k) {
            double t = (seed_idx[static_cast<std::size_t>(k)] + 1.0) / (seeds_per_axis + 1.0);
            x[k] = box.lo[static_cast<std::size_t>(k)] +
                   t * (box.hi[static_cast<std::size_t>(k)] - box.lo[static_cast<std::size_t>(k)]);
        }

        bool ok = true;
        Eigen::VectorXd f = drift.value(x);
        for (int it = 0; it < opts.max_newton_iters && ok; ++it) {
            if (f.cwiseAbs().maxCoeff() <= opts.newton_tol) break;
            // standard Jacobian J(i,j) = d b_i / d x_j is B^T
            Eigen::MatrixXd jac = drift.jacobian_b(x).transpose();
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
            if (!lu.isInvertible()) {
                ok = false;
                break;
            }
            Eigen::VectorXd step = lu.solve(-f);
            double damp = 1.0;
            bool advanced = false;
            for (int half = 0; half < 12; ++half, damp *= 0.5) {
                Eigen::VectorXd xn = x + damp * step;
                Eigen::VectorXd fn = drift.value(xn);
                if (fn.cwiseAbs().maxCoeff() < f.cwiseAbs().maxCoeff()) {
                    x = xn;
                    f = fn;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                ok = false;
                break;
            }
        }
        if (ok && f.cwiseAbs().maxCoeff() <= opts.newton_tol &&
            box.contains(std::span<const double>(x.data(), x.size()), 1e-12)) {
            bool dup = false;
            for (const auto& r : roots)
                if ((r - x).cwiseAbs().maxCoeff() <= opts.dedupe_rel * diam) dup = true;
            if (!dup) roots.push_back(x);
        }

        int k = 0;
        while (k < dim && ++seed_idx[static_cast<std::size_t>(k)] >= seeds_per_axis) {
            seed_idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == dim) break;
    }

    std::sort(roots.begin(), roots.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (long k = 0; k < a.size(); ++k)
            if (a[k] != b[k]) return a[k] < b[k];
        return false;
    });

    std::vector<FixedPoint> out;
    out.reserve(roots.size());
    for (const auto& r : roots)
        out.push_back(annotate_fixed_point(drift, r, jac_step, opts.hyper_tol));
    return out;
}

struct SigmaBarResult {
    double sigma_bar = 0.0;
    std::vector<std::size_t> maximizers;
    bool unique = false;
};

/// sigma_bar = max sigma(xi); ties within tie_tol are reported, not resolved.
inline SigmaBarResult sigma_bar(const std::vector<FixedPoint>& points, double tie_tol = 1e-9) {
    if (points.empty()) throw NumericError("sigma_bar: no fixed points");
    for (const auto& fp : points)
        if (!fp.hyperbolic)
            throw NumericError("sigma_bar: non-hyperbolic fixed point in the input");
    SigmaBarResult r;
    r.sigma_bar = -std::numeric_limits<double>::infinity();
    for (const auto& fp : points) r.sigma_bar = std::max(r.sigma_bar, fp.sigma);
    for (std::size_t i = 0; i < points.size(); ++i)
        if (points[i].sigma >= r.sigma_bar - tie_tol) r.maximizers.push_back(i);
    r.unique = r.maximizers.size() == 1;
    return r;
}

struct StructureReport {
    enum class Verdict { Pass, Fail, Inconclusive } verdict = Verdict::Inconclusive;
    int backward_exited = 0;       // backward orbits leaving the box
    int backward_converged = 0;    // backward orbits reaching a fixed point
    int backward_unclassified = 0;
    std::vector<std::pair<int, int>> connections;  // heteroclinic edges i -> j
    bool cycle_found = false;
    std::vector<int> cycle;        // one offending cycle if found
    std::vector<std::string> notes;
};

inline const char* to_string(StructureReport::Verdict v) {
    switch (v) {
        case StructureReport::Verdict::Pass: return "pass";
        case StructureReport::Verdict::Fail: return "fail";
        case StructureReport::Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct StructureOptions {
    double horizon = 200.0;
    double converge_tol = 1e-3;
    double rk_tol = 1e-7;
    double unstable_seed_scale = 5e-3;  // times box diameter
};

namespace detail {

// One adaptive RK4 step (step doubling); returns the accepted step size used
// and updates x in place.
inline double rk4_adaptive_step(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                Eigen::VectorXd& x, double h, double tol) {
    auto rk4 = [&](const Eigen::VectorXd& x0, double dt) {
        Eigen::VectorXd k1 = f(x0);
        Eigen::VectorXd k2 = f(x0 + 0.5 * dt * k1);
        Eigen::VectorXd k3 = f(x0 + 0.5 * dt * k2);
        Eigen::VectorXd k4 = f(x0 + dt * k3);
        return (x0 + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)).eval();
    };
    for (;;) {
        Eigen::VectorXd full = rk4(x, h);
        Eigen::VectorXd half = rk4(rk4(x, 0.5 * h), 0.5 * h);
        double err = (full - half).cwiseAbs().maxCoeff();
        if (err <= tol || h <= 1e-8) {
            x = half;
            double grow = err > 0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
            return std::min(1.0, h * std::min(2.0, std::max(0.3, grow)));
        }
        h *= 0.5;
    }
}

enum class OrbitOutcome { Exited, Converged, Unclassified };

inline std::pair<OrbitOutcome, int> integrate_orbit(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
    const BoxGrid& box, const std::vector<FixedPoint>& points, const StructureOptions& opts,
    double min_travel = 0.0) {
    double t = 0.0, h = 1e-2;
    const Eigen::VectorXd start = x;
    while (t < opts.horizon) {
        h = rk4_adaptive_step(f, x, std::min(h, opts.horizon - t), opts.rk_tol);
        t += h;
        if (!box.contains(std::span<const double>(x.data(), x.size())))
            return {OrbitOutcome::Exited, -1};
        if ((x - start).norm() < min_travel) continue;
        for (std::size_t j = 0; j < points.size(); ++j)
            if ((x - points[j].location).norm() <= opts.converge_tol)
                return {OrbitOutcome::Converged, static_cast<int>(j)};
    }
    return {OrbitOutcome::Unclassified, -1};
}

inline bool find_cycle(const std::vector<std::vector<int>>& adj, std::vector<int>& cycle) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 new, 1 active, 2 done
    std::vector<int> stack;
    std::function<bool(int)> dfs = [&](int v) {
        state[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (state[static_cast<std::size_t>(w)] == 1) {
                auto it = std::find(stack.begin(), stack.end(), w);
                cycle.assign(it, stack.end());
                cycle.push_back(w);
                return true;
            }
            if (state[static_cast<std::size_t>(w)] == 0 && dfs(w)) return true;
        }
        stack.pop_back();
        state[static_cast<std::size_t>(v)] = 2;
        return false;
    };
    for (int v = 0; v < n; ++v)
        if (state[static_cast<std::size_t>(v)] == 0 && dfs(v)) return true;
    return false;
}

}  // namespace detail

/// Numerical diagnostic for the structural hypothesis. Backward orbits of
/// dx/dt = -bbar (integrated as forward orbits of +bbar) from a seed lattice
/// must either leave the box or converge to a fixed point; heteroclinic
/// connections are probed from the unstable directions of each point, and the
/// connection digraph must be acyclic. Never a proof: inconclusive is a valid
/// outcome.
inline StructureReport verify_structure(const DriftMap& drift,
                                        const std::vector<FixedPoint>& points, const BoxGrid& box,
                                        int n_orbit_seeds, const StructureOptions& opts = {}) {
    if (points.empty()) throw ConfigError("verify_structure: no fixed points supplied");
    StructureReport rep;

    bool all_hyperbolic = true;
    for (const auto& fp : points)
        if (!fp.hyperbolic) {
            all_hyperbolic = false;
            rep.notes.push_back("non-hyperbolic fixed point present");
        }

    auto backward = [&](const Eigen::VectorXd& x) { return drift.value(x).eval(); };   // +bbar
    auto forward = [&](const Eigen::VectorXd& x) { return (-drift.value(x)).eval(); }; // -bbar

    const int dim = box.dim();
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (;;) {
        Eigen::VectorXd seed(dim);
        for (int k = 0; k < dim; ++k) {
            double t = (idx[static_cast<std::size_t>(k)] + 0.5) / n_orbit_seeds;
            seed[k] = box.lo[static_cast<std::size_t>(k)] +
                      t * (box.hi[static_cast<std::size_t>(k)] - box.lo[static_cast<std::size_t>(k)]);
        }
        auto [outcome, target] = detail::integrate_orbit(backward, seed, box, points, opts);
        (void)target;
        switch (outcome) {
            case detail::OrbitOutcome::Exited: ++rep.backward_exited; break;
            case detail::OrbitOutcome::Converged: ++rep.backward_converged; break;
            case detail::OrbitOutcome::Unclassified: ++rep.backward_unclassified; break;
        }
        int k = 0;
        while (k < dim && ++idx[static_cast<std::size_t>(k)] >= n_orbit_seeds) {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == dim) break;
    }

    // heteroclinic connections from each point's unstable directions
    const double r = opts.unstable_seed_scale * box.diameter();
    std::vector<std::vector<int>> adj(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        // flow matrix of dx/dt = -bbar is -B^T; unstable directions have Re > 0
        Eigen::EigenSolver<Eigen::MatrixXd> es(-points[i].b_matrix.transpose());
        for (long k = 0; k < es.eigenvalues().size(); ++k) {
            if (es.eigenvalues()[k].real() <= 0) continue;
            for (const Eigen::VectorXd& dir :
                 {es.eigenvectors().col(k).real().eval(), es.eigenvectors().col(k).imag().eval()}) {
                if (dir.norm() < 1e-12) continue;
                for (double s : {1.0, -1.0}) {
                    Eigen::VectorXd seed = points[i].location + s * r * dir.normalized();
                    if (!box.contains(std::span<const double>(seed.data(), seed.size()))) continue;
                    auto [outcome, target] =
                        detail::integrate_orbit(forward, seed, box, points, opts, 2 * r);
                    if (outcome == detail::OrbitOutcome::Converged) {
                        if (std::find(adj[i].begin(), adj[i].end(), target) == adj[i].end())
                            adj[i].push_back(target);
                    }
                }
            }
        }
        std::sort(adj[i].begin(), adj[i].end());
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int j : adj[i]) rep.connections.emplace_back(static_cast<int>(i), j);

    rep.cycle_found = detail::find_cycle(adj, rep.cycle);

    if (rep.cycle_found)
        rep.verdict = StructureReport::Verdict::Fail;
    else if (!all_hyperbolic || rep.backward_unclassified > 0)
        rep.verdict = StructureReport::Verdict::Inconclusive;
    else
        rep.verdict = StructureReport::Verdict::Pass;
    return rep;
}

}  // namespace ghz
