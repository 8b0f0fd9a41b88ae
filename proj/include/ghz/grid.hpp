#pragma once

// Structured grids: an axis-aligned box with boundary nodes (Dirichlet
// problems) and the unit torus Y = (0,1)^N with wraparound (cell problems).
// Both are cheap value types; grid functions copy them.

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "ghz/errors.hpp"

namespace ghz {

struct BoxGrid {
    std::vector<double> lo, hi;
    std::vector<int> cells;  // n_k cells per axis -> n_k + 1 nodes including boundary

    BoxGrid() = default;
    BoxGrid(std::vector<double> lo_, std::vector<double> hi_, std::vector<int> cells_)
        : lo(std::move(lo_)), hi(std::move(hi_)), cells(std::move(cells_)) {
        if (lo.size() != hi.size() || lo.size() != cells.size() || lo.empty())
            throw ConfigError("box grid: inconsistent dimensions");
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (cells[k] < 8) throw ConfigError("box grid: need at least 8 cells per axis");
            if (!(hi[k] > lo[k])) throw ConfigError("box grid: hi must exceed lo");
        }
    }

    int dim() const { return static_cast<int>(cells.size()); }

    double spacing(int k) const {
        return (hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]) /
               cells[static_cast<std::size_t>(k)];
    }

    int nodes_per_axis(int k) const { return cells[static_cast<std::size_t>(k)] + 1; }

    long node_count() const {
        long n = 1;
        for (int k = 0; k < dim(); ++k) n *= nodes_per_axis(k);
        return n;
    }

    long index(const std::vector<int>& idx) const {
        long lin = 0;
        for (int k = dim() - 1; k >= 0; --k) lin = lin * nodes_per_axis(k) + idx[static_cast<std::size_t>(k)];
        return lin;
    }

    std::vector<int> unindex(long lin) const {
        std::vector<int> idx(static_cast<std::size_t>(dim()));
        for (int k = 0; k < dim(); ++k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(lin % nodes_per_axis(k));
            lin /= nodes_per_axis(k);
        }
        return idx;
    }

    bool is_boundary(const std::vector<int>& idx) const {
        for (int k = 0; k < dim(); ++k)
            if (idx[static_cast<std::size_t>(k)] <= 0 ||
                idx[static_cast<std::size_t>(k)] >= cells[static_cast<std::size_t>(k)])
                return true;
        return false;
    }

    std::vector<double> node(const std::vector<int>& idx) const {
        std::vector<double> x(static_cast<std::size_t>(dim()));
        for (int k = 0; k < dim(); ++k)
            x[static_cast<std::size_t>(k)] = lo[static_cast<std::size_t>(k)] +
                                             idx[static_cast<std::size_t>(k)] * spacing(k);
        return x;
    }

    bool contains(std::span<const double> x, double pad = 0.0) const {
        for (int k = 0; k < dim(); ++k)
            if (x[static_cast<std::size_t>(k)] < lo[static_cast<std::size_t>(k)] + pad ||
                x[static_cast<std::size_t>(k)] > hi[static_cast<std::size_t>(k)] - pad)
                return false;
        return true;
    }

    double diameter() const {
        double d2 = 0;
        for (int k = 0; k < dim(); ++k) {
            double s = hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
            d2 += s * s;
        }
        return std::sqrt(d2);
    }

    double max_spacing() const {
        double h = 0;
        for (int k = 0; k < dim(); ++k) h = std::max(h, spacing(k));
        return h;
    }

    bool operator==(const BoxGrid& o) const {
        return lo == o.lo && hi == o.hi && cells == o.cells;
    }
};

struct TorusGrid {
    std::vector<int> nodes;  // n_k nodes per axis on (0,1)^N, spacing 1/n_k, wraparound

    TorusGrid() = default;
    explicit TorusGrid(std::vector<int> nodes_) : nodes(std::move(nodes_)) {
        if (nodes.empty()) throw ConfigError("torus grid: empty dimension list");
        for (int n : nodes)
            if (n < 4) throw ConfigError("torus grid: need at least 4 nodes per axis");
    }
    TorusGrid(int dim, int n) : TorusGrid(std::vector<int>(static_cast<std::size_t>(dim), n)) {}

    int dim() const { return static_cast<int>(nodes.size()); }
    double spacing(int k) const { return 1.0 / nodes[static_cast<std::size_t>(k)]; }

    long node_count() const {
        long n = 1;
        for (int m : nodes) n *= m;
        return n;
    }

    long index(const std::vector<int>& idx) const {
        long lin = 0;
        for (int k = dim() - 1; k >= 0; --k) {
            int n = nodes[static_cast<std::size_t>(k)];
            int i = ((idx[static_cast<std::size_t>(k)] % n) + n) % n;  // wraparound
            lin = lin * n + i;
        }
        return lin;
    }

    std::vector<int> unindex(long lin) const {
        std::vector<int> idx(static_cast<std::size_t>(dim()));
        for (int k = 0; k < dim(); ++k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(lin % nodes[static_cast<std::size_t>(k)]);
            lin /= nodes[static_cast<std::size_t>(k)];
        }
        return idx;
    }

    std::vector<double> node(const std::vector<int>& idx) const {
        std::vector<double> y(static_cast<std::size_t>(dim()));
        for (int k = 0; k < dim(); ++k)
            y[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)] * spacing(k);
        return y;
    }

    bool operator==(const TorusGrid& o) const { return nodes == o.nodes; }
};

/// Values attached to every node of a grid.
template <class Grid>
struct GridFunctionT {
    Grid grid;
    Eigen::VectorXd values;

    GridFunctionT() = default;
    GridFunctionT(Grid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.node_count())
            throw ConfigError("grid function: value count does not match node count");
    }

    double min() const { return values.minCoeff(); }
    double max() const { return values.maxCoeff(); }
    double mean() const { return values.mean(); }
};

using BoxFunction = GridFunctionT<BoxGrid>;
using TorusFunction = GridFunctionT<TorusGrid>;

/// Multilinear interpolation on a box grid. x must lie inside the box.
inline double interpolate(const BoxFunction& f, std::span<const double> x) {
    const BoxGrid& g = f.grid;
    int dim = g.dim();
    std::vector<int> base(static_cast<std::size_t>(dim));
    std::vector<double> frac(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
        double t = (x[static_cast<std::size_t>(k)] - g.lo[static_cast<std::size_t>(k)]) / g.spacing(k);
        int i = static_cast<int>(std::floor(t));
        i = std::max(0, std::min(i, g.cells[static_cast<std::size_t>(k)] - 1));
        base[static_cast<std::size_t>(k)] = i;
        frac[static_cast<std::size_t>(k)] = t - i;
        if (t < -1e-9 || t > g.cells[static_cast<std::size_t>(k)] + 1e-9)
            throw NumericError("interpolation point outside the grid");
    }
    double acc = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(dim));
    for (int corner = 0; corner < (1 << dim); ++corner) {
        double w = 1.0;
        for (int k = 0; k < dim; ++k) {
            int bit = (corner >> k) & 1;
            idx[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)] + bit;
            w *= bit ? frac[static_cast<std::size_t>(k)] : 1.0 - frac[static_cast<std::size_t>(k)];
        }
        if (w != 0.0) acc += w * f.values[g.index(idx)];
    }
    return acc;
}

}  // namespace ghz
