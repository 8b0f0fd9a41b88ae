#pragma once

// Weak-KAM side of the pipeline: the Legendre transform Lbar(v,x) =
// max_p (v.p - Hbar(p,x)), a directed path graph whose edge costs are
// time-optimized actions t Lbar(dx/t, mid), the additive eigenvalue via
// parametric minimum-mean-cycle search, single-source distance fields,
// Aubry-set confirmation through cheapest nontrivial cycles, the
// state-constraint representation W = min (d(.,xi) + g(xi)), the symmetrized
// distance uniqueness criterion, and the selected solution d(., xi_bar).

#include <array>
#include <deque>
#include <functional>
#include <numeric>
#include <queue>
#include <vector>

#include "ghz/effective.hpp"

namespace ghz {

using HbarFn = std::function<double(const Eigen::VectorXd& p, const Eigen::VectorXd& x)>;

/// Tensor-product sampling of Hbar: Catmull-Rom cubic interpolation along
/// each p axis, multilinear in x on the half-step grid of `box` (so graph
/// edge midpoints are exact sample points). Exists purely to make the many
/// Lagrangian evaluations behind a path graph cheap.
class SampledHamiltonian {
public:
    SampledHamiltonian(const HbarFn& exact, const BoxGrid& box, double p_radius, int p_nodes)
        : p_radius_(p_radius), p_nodes_(p_nodes), dim_(box.dim()) {
        if (p_nodes_ < 4) throw ConfigError("sampled hamiltonian: need at least 4 p nodes");
        std::vector<int> cells2 = box.cells;
        for (int& c : cells2) c *= 2;
        xgrid_ = BoxGrid(box.lo, box.hi, cells2);

        long pn = 1;
        for (int k = 0; k < dim_; ++k) pn *= p_nodes_;
        p_count_ = pn;
        values_.resize(xgrid_.node_count() * p_count_);

        Eigen::VectorXd p(dim_), x(dim_);
        for (long xl = 0; xl < xgrid_.node_count(); ++xl) {
            const std::vector<double> xv = xgrid_.node(xgrid_.unindex(xl));
            for (int k = 0; k < dim_; ++k) x[k] = xv[static_cast<std::size_t>(k)];
            for (long pl = 0; pl < p_count_; ++pl) {
                long rem = pl;
                for (int k = 0; k < dim_; ++k) {
                    p[k] = -p_radius_ + (2 * p_radius_) * (rem % p_nodes_) / (p_nodes_ - 1);
                    rem /= p_nodes_;
                }
                values_[static_cast<std::size_t>(xl * p_count_ + pl)] = exact(p, x);
            }
        }
    }

    double p_radius() const { return p_radius_; }

    double operator()(const Eigen::VectorXd& p, const Eigen::VectorXd& x) const {
        // x weights (multilinear on the half-step grid)
        std::vector<int> xbase(static_cast<std::size_t>(dim_));
        std::vector<double> xfrac(static_cast<std::size_t>(dim_));
        for (int k = 0; k < dim_; ++k) {
            double t = (x[k] - xgrid_.lo[static_cast<std::size_t>(k)]) / xgrid_.spacing(k);
            int i = static_cast<int>(std::floor(t));
            i = std::max(0, std::min(i, xgrid_.cells[static_cast<std::size_t>(k)] - 1));
            xbase[static_cast<std::size_t>(k)] = i;
            xfrac[static_cast<std::size_t>(k)] = t - i;
        }
        // p cells and Catmull-Rom weights
        const double dp = 2 * p_radius_ / (p_nodes_ - 1);
        std::vector<int> pbase(static_cast<std::size_t>(dim_));
        std::vector<std::array<double, 4>> pw(static_cast<std::size_t>(dim_));
        for (int k = 0; k < dim_; ++k) {
            double t = (p[k] + p_radius_) / dp;
            if (t < -1e-9 || t > p_nodes_ - 1 + 1e-9)
                throw NumericError("sampled hamiltonian: p outside the tabulated range");
            int i = static_cast<int>(std::floor(t));
            i = std::max(0, std::min(i, p_nodes_ - 2));
            double u = t - i;
            pbase[static_cast<std::size_t>(k)] = i;
            pw[static_cast<std::size_t>(k)] = {
                ((-0.5 * u + 1.0) * u - 0.5) * u,
                (1.5 * u - 2.5) * u * u + 1.0,
                ((-1.5 * u + 2.0) * u + 0.5) * u,
                (0.5 * u - 0.5) * u * u};
        }

        double acc = 0.0;
        std::vector<int> xidx(static_cast<std::size_t>(dim_));
        const int pcombos = 1 << (2 * dim_);  // 4^dim
        for (int xc = 0; xc < (1 << dim_); ++xc) {
            double wx = 1.0;
            for (int k = 0; k < dim_; ++k) {
                int bit = (xc >> k) & 1;
                xidx[static_cast<std::size_t>(k)] = xbase[static_cast<std::size_t>(k)] + bit;
                wx *= bit ? xfrac[static_cast<std::size_t>(k)] : 1.0 - xfrac[static_cast<std::size_t>(k)];
            }
            if (wx == 0.0) continue;
            const long xoff = xgrid_.index(xidx) * p_count_;
            for (int pc = 0; pc < pcombos; ++pc) {
                double wp = 1.0;
                long pl = 0, stride = 1;
                for (int k = 0; k < dim_; ++k) {
                    int off = (pc >> (2 * k)) & 3;
                    int node = std::max(0, std::min(p_nodes_ - 1,
                                                    pbase[static_cast<std::size_t>(k)] - 1 + off));
                    wp *= pw[static_cast<std::size_t>(k)][static_cast<std::size_t>(off)];
                    pl += node * stride;
                    stride *= p_nodes_;
                }
                if (wp != 0.0) acc += wx * wp * values_[static_cast<std::size_t>(xoff + pl)];
            }
        }
        return acc;
    }

private:
    double p_radius_;
    int p_nodes_;
    int dim_;
    long p_count_ = 0;
    BoxGrid xgrid_;
    std::vector<double> values_;
};

struct LagrangianOptions {
    double p_radius = 5.0;  // initial half-width of the p search box
    int p_density = 9;      // lattice points per axis (forced odd)
    int refine_rounds = 3;  // local refinement, factor 4 each
    int max_growths = 3;    // doublings of p_radius when the argmax hits the boundary
    double v_max = 70.0;
};

/// Legendre transform Lbar(v,x) = max_p (v.p - Hbar(p,x)) by coarse lattice
/// search, local refinement, and a final per-axis parabolic polish.
class LagrangianEvaluator {
public:
    LagrangianEvaluator(HbarFn hbar, int dim, LagrangianOptions opt = {})
        : hbar_(std::move(hbar)), dim_(dim), opt_(opt) {
        if (opt_.p_density % 2 == 0) ++opt_.p_density;
        if (opt_.p_density < 3) opt_.p_density = 3;
    }

    struct Result {
        double value = 0.0;
        Eigen::VectorXd argmax;
    };

    const HbarFn& hbar() const { return hbar_; }
    int dim() const { return dim_; }

    Result transform(const Eigen::VectorXd& v, const Eigen::VectorXd& x) const {
        if (v.cwiseAbs().maxCoeff() > opt_.v_max)
            throw ConfigError("legendre transform: |v| exceeds the configured v_max");
        auto objective = [&](const Eigen::VectorXd& p) { return v.dot(p) - hbar_(p, x); };

        double radius = opt_.p_radius;
        Eigen::VectorXd center = Eigen::VectorXd::Zero(dim_);
        Eigen::VectorXd best;
        double best_val = 0;
        for (int growth = 0;; ++growth) {
            bool on_boundary = false;
            std::tie(best_val, best) = lattice_max(objective, center, radius, &on_boundary);
            if (!on_boundary) break;
            if (growth >= opt_.max_growths)
                throw NumericError("legendre transform: argmax pinned to the search boundary; "
                                   "coercivity violated numerically");
            radius *= 2;
        }

        double spacing = 2 * radius / (opt_.p_density - 1);
        for (int round = 0; round < opt_.refine_rounds; ++round) {
            center = best;
            double w = spacing;  // new half-width = previous spacing (factor-4 shrink)
            auto [val, arg] = lattice_max(objective, center, w, nullptr);
            if (val > best_val) {
                best_val = val;
                best = arg;
            }
            spacing = 2 * w / (opt_.p_density - 1);
        }

        // parabolic vertex polish, one pass per axis
        Eigen::VectorXd polished = best;
        for (int k = 0; k < dim_; ++k) {
            Eigen::VectorXd pp = polished, pm = polished;
            pp[k] += spacing;
            pm[k] -= spacing;
            const double f0 = objective(polished), fp = objective(pp), fm = objective(pm);
            const double denom = fm - 2 * f0 + fp;
            if (denom < -1e-300) {
                double delta = 0.5 * spacing * (fm - fp) / denom;
                polished[k] += std::max(-spacing, std::min(spacing, delta));
            }
        }
        const double pol_val = objective(polished);
        Result r;
        if (pol_val > best_val) {
            r.value = pol_val;
            r.argmax = polished;
        } else {
            r.value = best_val;
            r.argmax = best;
        }
        return r;
    }

    double operator()(const Eigen::VectorXd& v, const Eigen::VectorXd& x) const {
        return transform(v, x).value;
    }

private:
    std::pair<double, Eigen::VectorXd> lattice_max(
        const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& center,
        double halfwidth, bool* on_boundary) const {
        const int d = opt_.p_density;
        std::vector<int> idx(static_cast<std::size_t>(dim_), 0);
        Eigen::VectorXd p(dim_), best;
        double best_val = -std::numeric_limits<double>::infinity();
        std::vector<int> best_idx;
        for (;;) {
            for (int k = 0; k < dim_; ++k)
                p[k] = center[k] - halfwidth +
                       2 * halfwidth * idx[static_cast<std::size_t>(k)] / (d - 1);
            double val = f(p);
            if (val > best_val) {
                best_val = val;
                best = p;
                best_idx = idx;
            }
            int k = 0;
            while (k < dim_ && ++idx[static_cast<std::size_t>(k)] >= d) {
                idx[static_cast<std::size_t>(k)] = 0;
                ++k;
            }
            if (k == dim_) break;
        }
        if (on_boundary) {
            *on_boundary = false;
            for (int k = 0; k < dim_; ++k)
                if (best_idx[static_cast<std::size_t>(k)] == 0 ||
                    best_idx[static_cast<std::size_t>(k)] == d - 1)
                    *on_boundary = true;
        }
        return {best_val, best};
    }

    HbarFn hbar_;
    int dim_;
    LagrangianOptions opt_;
};

struct PathGraphOptions {
    int t_level_min = -6;  // traversal times t = 2^j |dx|, j in [min, max]
    int t_level_max = 6;
    int t_refine_samples = 9;  // log-spaced refinement around the best level
};

/// Directed action graph on the grid nodes. Offsets up to Chebyshev radius 2;
/// in more than one dimension even multiples of shorter offsets are dropped
/// (16 directions in 2D, 4 in 1D). No edge leaves the closed box, which is
/// exactly the state-constraint boundary condition.
struct PathGraph {
    struct Edge {
        int from = 0, to = 0;
        double cost = 0, time = 0;
    };

    BoxGrid grid;
    int nodes = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> out;  // edge indices per from-node
    std::vector<std::vector<int>> in;   // edge indices per to-node
    double max_h0 = 0.0;                // max over nodes of Hbar(0,x)
    bool c_zero = false;
    double t_cap = 64.0;                // documented in run metadata

    int node_count() const { return nodes; }

    int nearest_node(std::span<const double> x) const {
        std::vector<int> idx(static_cast<std::size_t>(grid.dim()));
        for (int k = 0; k < grid.dim(); ++k) {
            double t = (x[static_cast<std::size_t>(k)] - grid.lo[static_cast<std::size_t>(k)]) /
                       grid.spacing(k);
            int i = static_cast<int>(std::lround(t));
            idx[static_cast<std::size_t>(k)] =
                std::max(0, std::min(grid.cells[static_cast<std::size_t>(k)], i));
        }
        return static_cast<int>(grid.index(idx));
    }
};

namespace detail {

inline std::vector<std::vector<int>> stencil_offsets(int dim) {
    std::vector<std::vector<int>> offsets;
    std::vector<int> k(static_cast<std::size_t>(dim), -2);
    for (;;) {
        bool zero = true;
        int g = 0;
        for (int v : k) {
            if (v != 0) zero = false;
            g = std::gcd(g, std::abs(v));
        }
        if (!zero && (dim == 1 || g == 1)) offsets.push_back(k);
        int i = 0;
        while (i < dim && ++k[static_cast<std::size_t>(i)] > 2) {
            k[static_cast<std::size_t>(i)] = -2;
            ++i;
        }
        if (i == dim) break;
    }
    return offsets;
}

}  // namespace detail

inline PathGraph build_path_graph(const BoxGrid& grid, const LagrangianEvaluator& lag,
                                  bool c_zero, const PathGraphOptions& opts = {}) {
    if (grid.node_count() > 20000)
        throw ConfigError("path graph: grid beyond desk scale (> 20000 nodes)");
    PathGraph g;
    g.grid = grid;
    g.nodes = static_cast<int>(grid.node_count());
    g.c_zero = c_zero;
    g.t_cap = std::pow(2.0, opts.t_level_max);

    const int dim = grid.dim();
    const auto offsets = detail::stencil_offsets(dim);
    const long n = grid.node_count();
    g.out.resize(static_cast<std::size_t>(n));
    g.in.resize(static_cast<std::size_t>(n));

    // Hbar(0, .) over the nodes, for the Fenchel cost floor
    {
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
        g.max_h0 = -std::numeric_limits<double>::infinity();
        for (long u = 0; u < n; ++u) {
            const std::vector<double> xv = grid.node(grid.unindex(u));
            Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xv.data(), dim);
            g.max_h0 = std::max(g.max_h0, lag.hbar()(zero, x));
        }
    }

    Eigen::VectorXd mid(dim), vel(dim);
    for (long u = 0; u < n; ++u) {
        const std::vector<int> ui = grid.unindex(u);
        const std::vector<double> xu = grid.node(ui);
        for (const auto& off : offsets) {
            std::vector<int> vi = ui;
            bool inside = true;
            for (int k = 0; k < dim; ++k) {
                vi[static_cast<std::size_t>(k)] += off[static_cast<std::size_t>(k)];
                if (vi[static_cast<std::size_t>(k)] < 0 ||
                    vi[static_cast<std::size_t>(k)] > grid.cells[static_cast<std::size_t>(k)])
                    inside = false;
            }
            if (!inside) continue;  // state constraint: never leave the closed box
            const long v = grid.index(vi);
            const std::vector<double> xv = grid.node(vi);

            double dx_norm = 0;
            for (int k = 0; k < dim; ++k) {
                mid[k] = 0.5 * (xu[static_cast<std::size_t>(k)] + xv[static_cast<std::size_t>(k)]);
                double d = xv[static_cast<std::size_t>(k)] - xu[static_cast<std::size_t>(k)];
                vel[k] = d;
                dx_norm += d * d;
            }
            dx_norm = std::sqrt(dx_norm);

            auto edge_cost = [&](double t) {
                return t * lag(Eigen::VectorXd(vel / t), mid);
            };
            double best_t = 0, best_c = std::numeric_limits<double>::infinity();
            int best_j = opts.t_level_min;
            for (int j = opts.t_level_min; j <= opts.t_level_max; ++j) {
                double t = std::pow(2.0, j) * dx_norm;
                double c = edge_cost(t);
                if (c < best_c) {
                    best_c = c;
                    best_t = t;
                    best_j = j;
                }
            }
            // one refinement pass, log-spaced over the neighbouring levels
            const double t_lo = std::pow(2.0, std::max(opts.t_level_min, best_j - 1)) * dx_norm;
            const double t_hi = std::pow(2.0, std::min(opts.t_level_max, best_j + 1)) * dx_norm;
            for (int s = 0; s <= opts.t_refine_samples - 1; ++s) {
                double t = t_lo * std::pow(t_hi / t_lo,
                                           static_cast<double>(s) / (opts.t_refine_samples - 1));
                double c = edge_cost(t);
                if (c < best_c) {
                    best_c = c;
                    best_t = t;
                }
            }

            // with c == 0 the action is nonnegative; clear solver-noise dust
            if (g.c_zero && best_c < 0 && best_c > -1e-8 * std::max(1.0, best_t)) best_c = 0.0;
            if (best_c < -best_t * std::max(0.0, g.max_h0) - 1e-8)
                throw NumericError("path graph: edge cost below the Fenchel floor");

            PathGraph::Edge e;
            e.from = static_cast<int>(u);
            e.to = static_cast<int>(v);
            e.cost = best_c;
            e.time = best_t;
            g.out[static_cast<std::size_t>(u)].push_back(static_cast<int>(g.edges.size()));
            g.in[static_cast<std::size_t>(v)].push_back(static_cast<int>(g.edges.size()));
            g.edges.push_back(e);
        }
    }
    return g;
}

namespace detail {

// negative-cycle detection with weights cost - lambda * time (SPFA with
// enqueue counting)
inline bool has_negative_cycle(const PathGraph& g, double lambda, double tol = 0.0) {
    const int n = g.node_count();
    std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    std::vector<char> inq(static_cast<std::size_t>(n), 1);
    std::deque<int> queue;
    for (int i = 0; i < n; ++i) queue.push_back(i);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        inq[static_cast<std::size_t>(u)] = 0;
        for (int ei : g.out[static_cast<std::size_t>(u)]) {
            const auto& e = g.edges[static_cast<std::size_t>(ei)];
            double w = e.cost - lambda * e.time;
            if (dist[static_cast<std::size_t>(u)] + w < dist[static_cast<std::size_t>(e.to)] - tol) {
                dist[static_cast<std::size_t>(e.to)] = dist[static_cast<std::size_t>(u)] + w;
                if (!inq[static_cast<std::size_t>(e.to)]) {
                    if (++count[static_cast<std::size_t>(e.to)] > n) return true;
                    inq[static_cast<std::size_t>(e.to)] = 1;
                    queue.push_back(e.to);
                }
            }
        }
    }
    return false;
}

inline void check_strong_connectivity(const PathGraph& g) {
    const int n = g.node_count();
    auto bfs = [&](bool reversed) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::deque<int> q{0};
        seen[0] = 1;
        int visited = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            const auto& adj = reversed ? g.in[static_cast<std::size_t>(u)]
                                       : g.out[static_cast<std::size_t>(u)];
            for (int ei : adj) {
                const auto& e = g.edges[static_cast<std::size_t>(ei)];
                int v = reversed ? e.from : e.to;
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    ++visited;
                    q.push_back(v);
                }
            }
        }
        return visited == n;
    };
    if (n == 0 || g.edges.empty() || !bfs(false) || !bfs(true))
        throw NumericError("path graph is not strongly connected");
}

}  // namespace detail

/// Additive eigenvalue lambda_Hbar = -lambda*, where lambda* is the minimum
/// cycle mean of cost/time, found by bisection with negative-cycle detection.
inline double additive_eigenvalue(const PathGraph& g, int bisection_steps = 60) {
    detail::check_strong_connectivity(g);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& e : g.edges) {
        lo = std::min(lo, e.cost / e.time);
        hi = std::max(hi, e.cost / e.time);
    }
    if (!(lo <= hi)) throw NumericError("additive eigenvalue: empty bracket");
    lo -= 1e-9;
    hi += 1e-9;
    if (detail::has_negative_cycle(g, lo))
        throw NumericError("additive eigenvalue: bracket failure (cycle below the edge-ratio bound)");
    for (int i = 0; i < bisection_steps; ++i) {
        double mid = 0.5 * (lo + hi);
        if (detail::has_negative_cycle(g, mid))
            hi = mid;
        else
            lo = mid;
    }
    return -lo;  // certified side: no cycle has negative reduced cost at lo
}

struct DistanceField {
    int source = -1;        // snapped source node
    double lambda = 0.0;    // additive eigenvalue used in the reduced costs
    Eigen::VectorXd d;      // d(x, source) per node
    std::vector<int> predecessor;  // edge index into PathGraph::edges, -1 at source
};

namespace detail {

inline DistanceField shortest_paths(const PathGraph& g, double lambda, int source, bool reversed) {
    const int n = g.node_count();
    DistanceField f;
    f.source = source;
    f.lambda = lambda;
    f.d = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    f.predecessor.assign(static_cast<std::size_t>(n), -1);
    f.d[source] = 0.0;

    double min_w = 0;
    for (const auto& e : g.edges) min_w = std::min(min_w, e.cost + lambda * e.time);

    if (min_w >= 0) {
        // Dijkstra fast path
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        heap.emplace(0.0, source);
        std::vector<char> done(static_cast<std::size_t>(n), 0);
        while (!heap.empty()) {
            auto [du, u] = heap.top();
            heap.pop();
            if (done[static_cast<std::size_t>(u)]) continue;
            done[static_cast<std::size_t>(u)] = 1;
            const auto& adj = reversed ? g.in[static_cast<std::size_t>(u)]
                                       : g.out[static_cast<std::size_t>(u)];
            for (int ei : adj) {
                const auto& e = g.edges[static_cast<std::size_t>(ei)];
                int v = reversed ? e.from : e.to;
                double w = e.cost + lambda * e.time;
                if (du + w < f.d[v]) {
                    f.d[v] = du + w;
                    f.predecessor[static_cast<std::size_t>(v)] = ei;
                    heap.emplace(f.d[v], v);
                }
            }
        }
        return f;
    }

    // queue-based Bellman-Ford tolerating slightly negative reduced costs
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    std::vector<char> inq(static_cast<std::size_t>(n), 0);
    std::deque<int> queue{source};
    inq[static_cast<std::size_t>(source)] = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        inq[static_cast<std::size_t>(u)] = 0;
        const auto& adj = reversed ? g.in[static_cast<std::size_t>(u)]
                                   : g.out[static_cast<std::size_t>(u)];
        for (int ei : adj) {
            const auto& e = g.edges[static_cast<std::size_t>(ei)];
            int v = reversed ? e.from : e.to;
            double w = e.cost + lambda * e.time;
            if (f.d[u] + w < f.d[v] - 1e-15) {
                f.d[v] = f.d[u] + w;
                f.predecessor[static_cast<std::size_t>(v)] = ei;
                if (!inq[static_cast<std::size_t>(v)]) {
                    if (++count[static_cast<std::size_t>(v)] > n + 1)
                        throw NumericError("distance: negative cycle detected, lambda too small");
                    inq[static_cast<std::size_t>(v)] = 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return f;
}

}  // namespace detail

/// d(x, y) = shortest reduced cost from the snapped source y to every node.
inline DistanceField distance_function(const PathGraph& g, double lambda,
                                       std::span<const double> y) {
    return detail::shortest_paths(g, lambda, g.nearest_node(y), false);
}

struct AubryResult {
    struct Candidate {
        Eigen::VectorXd point;
        int node = -1;
        bool confirmed = false;
        double cycle_cost = 0.0;  // cheapest nontrivial reduced-cost cycle through the node
        double cycle_time = 0.0;  // traversal time of that cycle
        double cycle_mean = 0.0;  // cost per unit time; the confirmation statistic
    };
    std::vector<Candidate> candidates;
    Eigen::MatrixXd s_matrix;            // symmetrized distances between candidates
    std::vector<DistanceField> fields;   // fields[i] = d(., candidate_i)
    double tolerance = 0.0;
};

/// Confirm candidates as Aubry points. The cheapest nontrivial cycle (two or
/// more edges) through the node is found by one reversed shortest-path run;
/// confirmation compares its reduced cost PER UNIT TIME against aubry_tol.
/// Normalizing by the traversal time is the graph rendition of the
/// variational characterization, which quantifies loops of duration t > delta:
/// a raw cost threshold cannot discriminate, because the cheapest hover loop
/// through any node costs only O(h). Also returns the full symmetrized
/// distance matrix between candidates.
inline AubryResult aubry_set(const PathGraph& g, double lambda,
                             const std::vector<Eigen::VectorXd>& candidates, double aubry_tol) {
    AubryResult res;
    res.tolerance = aubry_tol;
    const std::size_t m = candidates.size();
    res.s_matrix = Eigen::MatrixXd::Zero(m, m);
    for (const auto& c : candidates) {
        AubryResult::Candidate cand;
        cand.point = c;
        cand.node = g.nearest_node(std::span<const double>(c.data(), c.size()));
        res.candidates.push_back(std::move(cand));
    }
    for (std::size_t i = 0; i < m; ++i)
        res.fields.push_back(detail::shortest_paths(g, lambda, res.candidates[i].node, false));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            // d(xi_i, xi_j) + d(xi_j, xi_i)
            res.s_matrix(i, j) = res.fields[j].d[res.candidates[i].node] +
                                 res.fields[i].d[res.candidates[j].node];
        }
    for (std::size_t i = 0; i < m; ++i) {
        const int s = res.candidates[i].node;
        DistanceField to_s = detail::shortest_paths(g, lambda, s, true);  // cost v -> s
        auto path_time = [&](int v) {
            double t = 0;
            int node = v;
            while (node != s) {
                int ei = to_s.predecessor[static_cast<std::size_t>(node)];
                if (ei < 0) return std::numeric_limits<double>::infinity();
                // reversed run: predecessor edge goes node -> next toward s
                t += g.edges[static_cast<std::size_t>(ei)].time;
                node = g.edges[static_cast<std::size_t>(ei)].to;
            }
            return t;
        };
        double best_cost = std::numeric_limits<double>::infinity();
        double best_time = 0;
        for (int ei : g.out[static_cast<std::size_t>(s)]) {
            const auto& e = g.edges[static_cast<std::size_t>(ei)];
            double c = e.cost + lambda * e.time + to_s.d[e.to];
            if (c < best_cost) {
                best_cost = c;
                best_time = e.time + path_time(e.to);
            }
        }
        res.candidates[i].cycle_cost = best_cost;
        res.candidates[i].cycle_time = best_time;
        res.candidates[i].cycle_mean =
            best_time > 0 ? best_cost / best_time : std::numeric_limits<double>::infinity();
        res.candidates[i].confirmed = res.candidates[i].cycle_mean <= aubry_tol;
    }
    return res;
}

/// W(x) = min over Aubry points of d(x, xi) + g(xi), after checking the
/// compatibility condition g(xi) - g(xi') <= d(xi, xi').
inline Eigen::VectorXd solve_state_constraint(const AubryResult& aubry,
                                              const std::vector<double>& g_values,
                                              double compat_tol = 1e-9) {
    const std::size_t m = aubry.candidates.size();
    if (g_values.size() != m)
        throw ConfigError("state constraint: boundary data size mismatch");
    if (m == 0) throw ConfigError("state constraint: no Aubry points");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const double dij = aubry.fields[j].d[aubry.candidates[i].node];
            if (g_values[i] - g_values[j] > dij + compat_tol)
                throw ConfigError("state constraint: incompatible boundary data at pair (" +
                                  std::to_string(i) + ", " + std::to_string(j) + "): g_i - g_j = " +
                                  std::to_string(g_values[i] - g_values[j]) + " > d = " +
                                  std::to_string(dij));
        }
    Eigen::VectorXd w = aubry.fields[0].d.array() + g_values[0];
    for (std::size_t i = 1; i < m; ++i)
        w = w.cwiseMin(Eigen::VectorXd(aubry.fields[i].d.array() + g_values[i]));
    return w;
}

/// Unique up to a constant iff every off-diagonal symmetrized distance
/// between Aubry points vanishes (within the Aubry tolerance).
inline bool uniqueness_check(const Eigen::MatrixXd& s_matrix, double aubry_tol) {
    for (long i = 0; i < s_matrix.rows(); ++i)
        for (long j = 0; j < s_matrix.cols(); ++j)
            if (i != j && s_matrix(i, j) > aubry_tol) return false;
    return true;
}

/// The selected solution W = d(., xi_bar), defined only when the sigma_bar
/// maximizer is unique. The least-element property W(xi) = d(xi, xi_bar) is
/// re-verified over the other Aubry points.
inline Eigen::VectorXd selected_solution(const AubryResult& aubry, std::size_t maximizer_index,
                                         bool maximizer_unique, double check_tol = 1e-9) {
    if (!maximizer_unique)
        throw NumericError("selected solution: sigma_bar maximizer is not unique, the selected "
                           "limit is undefined");
    if (maximizer_index >= aubry.candidates.size())
        throw ConfigError("selected solution: maximizer index out of range");
    const Eigen::VectorXd& w = aubry.fields[maximizer_index].d;
    for (std::size_t j = 0; j < aubry.candidates.size(); ++j) {
        if (!aubry.candidates[j].confirmed) continue;
        const double diff = std::abs(w[aubry.candidates[j].node] -
                                     aubry.fields[maximizer_index].d[aubry.candidates[j].node]);
        if (diff > check_tol)
            throw NumericError("selected solution: least-element check failed");
    }
    return w;
}

}  // namespace ghz
