#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "ferroconnect/errors.hpp"
#include "ferroconnect/geometry.hpp"

namespace ferroconnect::grid {

using geom::Vec2;

// Square lattice of nx*ny cells; cell (i,j) has its center at
// origin + ((i+1/2)h, (j+1/2)h) and corners on the integer lattice origin + (i*h, j*h).
struct Grid {
    double ox = 0.0, oy = 0.0;
    double h = 1.0;
    int nx = 0, ny = 0;

    int size() const { return nx * ny; }
    int idx(int i, int j) const { return j * nx + i; }
    bool valid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    Vec2 center(int i, int j) const { return {ox + (i + 0.5) * h, oy + (j + 0.5) * h}; }
    Vec2 center(int c) const { return center(c % nx, c / nx); }
    Vec2 corner(int i, int j) const { return {ox + i * h, oy + j * h}; }

    bool operator==(const Grid& o) const {
        return ox == o.ox && oy == o.oy && h == o.h && nx == o.nx && ny == o.ny;
    }
};

// Cell-sampled vector field masked to a domain.
struct GridField {
    Grid g;
    int ncomp = 2;
    std::vector<std::uint8_t> mask;  // 1 = in-domain cell
    std::vector<double> v;           // size = nx*ny*ncomp, row-major by j then i

    GridField() = default;
    GridField(Grid grid, int ncomponents) : g(grid), ncomp(ncomponents) {
        mask.assign(static_cast<std::size_t>(g.size()), 0);
        v.assign(static_cast<std::size_t>(g.size()) * ncomp, 0.0);
    }

    bool in(int i, int j) const { return g.valid(i, j) && mask[g.idx(i, j)] != 0; }
    bool in(int c) const { return mask[c] != 0; }
    double* at(int c) { return &v[static_cast<std::size_t>(c) * ncomp]; }
    const double* at(int c) const { return &v[static_cast<std::size_t>(c) * ncomp]; }
    Vec2 vec(int c) const { return {at(c)[0], at(c)[1]}; }
    void set_vec(int c, Vec2 val) {
        at(c)[0] = val.x;
        at(c)[1] = val.y;
    }
};

// Grid covering the domain bounding box with n cells across the larger side,
// masked to cells whose centers lie in the closed domain.
inline GridField make_domain_field(const geom::Domain& dom, int n, int ncomp = 2) {
    if (n < 4) throw usage_error("grid: need at least 4 cells per side");
    const Vec2 lo = dom.bbox_min(), hi = dom.bbox_max();
    const double side = std::max(hi.x - lo.x, hi.y - lo.y);
    Grid g;
    g.h = side / n;
    g.nx = n;
    g.ny = n;
    // Center the lattice on the bounding box.
    g.ox = 0.5 * (lo.x + hi.x) - 0.5 * n * g.h;
    g.oy = 0.5 * (lo.y + hi.y) - 0.5 * n * g.h;
    GridField f(g, ncomp);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (dom.contains(g.center(i, j)) != geom::Containment::Outside)
                f.mask[g.idx(i, j)] = 1;
    // Keep only the largest 4-connected component; the mask must be connected.
    std::vector<int> comp(static_cast<std::size_t>(g.size()), -1);
    int ncomps = 0, best = -1, best_count = 0;
    for (int s = 0; s < g.size(); ++s) {
        if (!f.mask[s] || comp[s] >= 0) continue;
        int count = 0;
        std::queue<int> q;
        q.push(s);
        comp[s] = ncomps;
        while (!q.empty()) {
            const int c = q.front();
            q.pop();
            ++count;
            const int i = c % g.nx, j = c / g.nx;
            const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
            for (const auto& b : nb) {
                if (!g.valid(b[0], b[1])) continue;
                const int d = g.idx(b[0], b[1]);
                if (f.mask[d] && comp[d] < 0) {
                    comp[d] = ncomps;
                    q.push(d);
                }
            }
        }
        if (count > best_count) {
            best_count = count;
            best = ncomps;
        }
        ++ncomps;
    }
    if (best < 0) throw numeric_error("grid: empty mask");
    for (int c = 0; c < g.size(); ++c)
        if (f.mask[c] && comp[c] != best) f.mask[c] = 0;
    return f;
}

// Cells of the mask with a missing 4-neighbor; these carry Dirichlet data.
inline std::vector<std::uint8_t> boundary_cells(const GridField& f) {
    std::vector<std::uint8_t> b(static_cast<std::size_t>(f.g.size()), 0);
    for (int j = 0; j < f.g.ny; ++j)
        for (int i = 0; i < f.g.nx; ++i) {
            if (!f.in(i, j)) continue;
            if (!f.in(i + 1, j) || !f.in(i - 1, j) || !f.in(i, j + 1) || !f.in(i, j - 1))
                b[f.g.idx(i, j)] = 1;
        }
    return b;
}

// Subset of in-domain cells, as a dense flag array over the full lattice.
struct PixelSet {
    Grid g;
    std::vector<std::uint8_t> cells;

    PixelSet() = default;
    explicit PixelSet(const Grid& grid) : g(grid), cells(static_cast<std::size_t>(grid.size()), 0) {}

    bool contains(int c) const { return cells[c] != 0; }
    int count() const { return static_cast<int>(std::count(cells.begin(), cells.end(), std::uint8_t(1))); }

    PixelSet sym_diff(const PixelSet& other) const {
        PixelSet r(g);
        for (std::size_t c = 0; c < cells.size(); ++c) r.cells[c] = cells[c] ^ other.cells[c];
        return r;
    }
};

// Undirected lattice edges between 4-adjacent cells. The key encodes the lower
// cell and the step direction; the geometric carrier of an edge is the shared
// cell interface, a length-h segment between lattice corners.
struct EdgeSet {
    Grid g;
    std::vector<std::uint64_t> keys;  // sorted, unique

    EdgeSet() = default;
    explicit EdgeSet(const Grid& grid) : g(grid) {}

    static std::uint64_t key(const Grid& g, int i, int j, int dir) {
        return (static_cast<std::uint64_t>(g.idx(i, j)) << 1) | static_cast<std::uint64_t>(dir);
    }
    // Canonical key of the edge between adjacent cells a and b.
    static std::uint64_t key_between(const Grid& g, int ca, int cb) {
        if (ca > cb) std::swap(ca, cb);
        const int ia = ca % g.nx, ja = ca / g.nx;
        const int dir = (cb == ca + 1) ? 0 : 1;
        return key(g, ia, ja, dir);
    }

    void insert(std::uint64_t k) { keys.push_back(k); }
    void finalize() {
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    }
    bool contains(std::uint64_t k) const {
        return std::binary_search(keys.begin(), keys.end(), k);
    }
    std::size_t count() const { return keys.size(); }
    double length() const { return g.h * static_cast<double>(keys.size()); }

    // Cells on either side of an edge key.
    static std::pair<int, int> cells_of(const Grid& g, std::uint64_t k) {
        const int c = static_cast<int>(k >> 1);
        const int dir = static_cast<int>(k & 1);
        return {c, dir == 0 ? c + 1 : c + g.nx};
    }

    // Interface endpoints on the corner lattice: ((i,j) indexes a corner).
    static std::pair<std::pair<int, int>, std::pair<int, int>> corners_of(const Grid& g,
                                                                          std::uint64_t k) {
        const int c = static_cast<int>(k >> 1);
        const int dir = static_cast<int>(k & 1);
        const int i = c % g.nx, j = c / g.nx;
        if (dir == 0) return {{i + 1, j}, {i + 1, j + 1}};  // vertical interface
        return {{i, j + 1}, {i + 1, j + 1}};                // horizontal interface
    }

    Vec2 midpoint(std::uint64_t k) const {
        const auto [a, b] = corners_of(g, k);
        const Vec2 pa = g.corner(a.first, a.second);
        const Vec2 pb = g.corner(b.first, b.second);
        return 0.5 * (pa + pb);
    }

    EdgeSet sym_diff(const EdgeSet& other) const {
        EdgeSet r(g);
        std::set_symmetric_difference(keys.begin(), keys.end(), other.keys.begin(),
                                      other.keys.end(), std::back_inserter(r.keys));
        return r;
    }

    bool operator==(const EdgeSet& o) const { return keys == o.keys; }
};

}  // namespace ferroconnect::grid
