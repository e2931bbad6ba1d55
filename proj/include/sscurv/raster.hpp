// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "contour.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "ifs.hpp"
#include "kdtree.hpp"

namespace sscurv {

// Uniform lattice of cell centres origin + h (i, j), 0 <= i < nx, 0 <= j < ny.
struct Grid {
    Vec2 origin;
    double h = 1;
    int nx = 0, ny = 0;

    Vec2 node(long i, long j) const { return {origin.x + h * static_cast<double>(i), origin.y + h * static_cast<double>(j)}; }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i); }

    // Lattice covering box dilated by margin + 2h.
    static Grid covering(const Box& box, double h, double margin) {
        Grid g;
        g.h = h;
        g.origin = {box.lo.x - margin - 2 * h, box.lo.y - margin - 2 * h};
        g.nx = static_cast<int>(std::ceil((box.width() + 2 * margin + 4 * h) / h)) + 1;
        g.ny = static_cast<int>(std::ceil((box.height() + 2 * margin + 4 * h) / h)) + 1;
        return g;
    }
};

inline constexpr std::size_t kDefaultCellBudget = 200'000'000;

struct DistanceField {
    Grid grid;
    std::vector<double> values;
    double source_error = 0;
    std::shared_ptr<const KdTree> tree;

    double at(int i, int j) const { return values[grid.index(i, j)]; }
    double at(Vec2 p) const { return tree->nearest(p); }
    // exact field at the centre of quad (i,j)
    double center(int i, int j) const { return tree->nearest(grid.node(i, j) + Vec2{0.5 * grid.h, 0.5 * grid.h}); }
};

inline DistanceField distance_field(const PointCloud& cloud, const Grid& grid, std::size_t cell_budget = kDefaultCellBudget) {
    if (cloud.points.empty()) throw DomainError("distance field needs a nonempty cloud");
    if (grid.cells() > cell_budget) throw ResourceError("grid exceeds the cell budget");
    DistanceField f;
    f.grid = grid;
    f.source_error = cloud.hausdorff_error;
    f.tree = std::make_shared<KdTree>(cloud.points);
    f.values.resize(grid.cells());
    const double slack = grid.h * (1 + 1e-9) + 1e-15;
    for (int j = 0; j < grid.ny; ++j) {
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid.nx; ++i) {
            prev = f.tree->nearest(grid.node(i, j), prev + slack);
            f.values[grid.index(i, j)] = prev;
        }
    }
    return f;
}

struct BinaryMask {
    Grid grid;
    std::vector<std::uint8_t> bits;
    double eps = 0;
    double delta = 0;  // sandwich half-width: source error + h sqrt(2) / 2

    bool at(long i, long j) const {
        if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) return false;
        return bits[grid.index(static_cast<int>(i), static_cast<int>(j))] != 0;
    }
    std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }
    double area() const { return static_cast<double>(count()) * grid.h * grid.h; }
};

inline BinaryMask parallel_mask(const DistanceField& field, double eps) {
    if (!(eps > 0)) throw DomainError("eps must be positive");
    BinaryMask m;
    m.grid = field.grid;
    m.eps = eps;
    m.delta = field.source_error + field.grid.h * std::numbers::sqrt2 / 2;
    m.bits.resize(field.values.size());
    for (std::size_t k = 0; k < m.bits.size(); ++k) m.bits[k] = field.values[k] <= eps ? 1 : 0;
    return m;
}

// V - E + F of the union of closed pixels centred at the foreground cells.
inline long euler_characteristic(const BinaryMask& m) {
    long chi = 0;
    for (long j = -1; j < m.grid.ny; ++j)
        for (long i = -1; i < m.grid.nx; ++i) chi += quad_euler_term(m.at(i, j), m.at(i + 1, j), m.at(i + 1, j + 1), m.at(i, j + 1));
    return chi;
}

// Number of 8-connected foreground components.
inline long component_count(const BinaryMask& m) {
    std::vector<int> label(m.bits.size(), 0);
    std::vector<std::pair<int, int>> stack;
    long count = 0;
    for (int j = 0; j < m.grid.ny; ++j)
        for (int i = 0; i < m.grid.nx; ++i) {
            if (!m.at(i, j) || label[m.grid.index(i, j)]) continue;
            ++count;
            stack.push_back({i, j});
            label[m.grid.index(i, j)] = 1;
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        const int x = a + di, y = b + dj;
                        if (!m.at(x, y) || label[m.grid.index(x, y)]) continue;
                        label[m.grid.index(x, y)] = 1;
                        stack.push_back({x, y});
                    }
            }
        }
    return count;
}

inline BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    BinaryMask m = a;
    for (std::size_t k = 0; k < m.bits.size(); ++k) m.bits[k] = a.bits[k] & b.bits[k];
    return m;
}

inline BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    BinaryMask m = a;
    for (std::size_t k = 0; k < m.bits.size(); ++k) m.bits[k] = a.bits[k] | b.bits[k];
    return m;
}

inline bool mask_subset(const BinaryMask& a, const BinaryMask& b) {
    for (std::size_t k = 0; k < a.bits.size(); ++k)
        if (a.bits[k] && !b.bits[k]) return false;
    return true;
}

// Cells with n . x >= c.
inline BinaryMask half_plane_mask(const Grid& g, Vec2 n, double c) {
    BinaryMask m;
    m.grid = g;
    m.bits.resize(g.cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) m.bits[g.index(i, j)] = dot(n, g.node(i, j)) >= c ? 1 : 0;
    return m;
}

struct BoundaryPolygons {
    std::vector<ContourLoop> loops;
    std::vector<std::vector<double>> turning;  // per loop, per vertex
    long chi = 0;                              // pixel Euler characteristic plus split saddles
    long split_saddles = 0;
    double eps = 0;
    double h = 0;

    double total_turning() const {
        double t = 0;
        for (auto& th : turning)
            for (double x : th) t += x;
        return t;
    }
    double length() const {
        double L = 0;
        for (auto& l : loops) L += loop_arclength(l).back();
        return L;
    }
    double area() const {
        double A = 0;
        for (auto& l : loops) {
            std::vector<Vec2> pts;
            for (auto& v : l.v) pts.push_back(v.p);
            A += signed_area(pts);
        }
        return A;
    }
};

// Level-eps contour with linear interpolation; saddles resolved by the exact
// field at the quad centre. Cells outside the grid count as background.
inline BoundaryPolygons boundary_polygons(const DistanceField& field, double eps) {
    if (!(eps > field.grid.h)) throw DomainError("eps must exceed the grid spacing");
    const Grid& g = field.grid;
    const double outside = eps + g.h;
    auto value = [&](int i, int j) { return (i < 0 || j < 0 || i >= g.nx || j >= g.ny) ? outside : field.at(i, j); };
    auto center = [&](int i, int j) { return field.center(i, j); };
    ContourBlock blk = contour_block(0, 0, g.nx, g.ny, g.origin, g.h, eps, value, center);
    BoundaryPolygons bp;
    bp.eps = eps;
    bp.h = g.h;
    bp.chi = blk.chi;
    bp.split_saddles = blk.splits;
    bp.loops = std::move(blk.loops);
    for (auto& l : bp.loops) bp.turning.push_back(loop_turning(l));
    return bp;
}

struct CurvatureC0 {
    double signed_value = 0;
    double variation = 0;
    long clusters = 0;  // groups of nearby in-region vertices turning more than the threshold
};

struct C0Options {
    double window_h = 4.0;          // smoothing arc length in units of h
    double cluster_threshold = 0.05;  // in full turns
};

// A vertex belongs to the region when either end node of its lattice edge does.
inline CurvatureC0 curvature_c0(const BoundaryPolygons& bp, const BinaryMask* region = nullptr, C0Options opt = {}) {
    CurvatureC0 out;
    const double two_pi = 2 * std::numbers::pi;
    std::vector<std::pair<Vec2, double>> turns;
    for (std::size_t l = 0; l < bp.loops.size(); ++l) {
        const auto& loop = bp.loops[l];
        std::vector<double> w = bp.turning[l];
        if (region)
            for (std::size_t k = 0; k < w.size(); ++k) {
                const EdgeId e = loop.v[k].edge;
                const bool in = region->at(e.I, e.J) || (e.dir == 0 ? region->at(e.I + 1, e.J) : region->at(e.I, e.J + 1));
                if (!in) w[k] = 0;
            }
        for (double x : w) out.signed_value += x / two_pi;
        const auto s = loop_arclength(loop);
        TurningDensity dens(s, w, opt.window_h * bp.h);
        out.variation += dens.abs_integral(0, dens.length) / two_pi;
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k] != 0) turns.emplace_back(loop.v[k].p, w[k]);
    }
    out.clusters = turn_clusters(std::move(turns), opt.window_h * bp.h, opt.cluster_threshold);
    return out;
}

enum class RegionMode { intersection, union_ };

// Per-cylinder parallel masks combined cellwise.
inline BinaryMask region_from_cylinders(const Ifs& ifs, const std::vector<Word>& words, double eps, const Grid& grid,
                                        RegionMode mode, double target_error = -1, double slack = 0) {
    if (words.empty()) throw DomainError("region needs at least one word");
    if (target_error <= 0) target_error = grid.h / 2;
    std::optional<BinaryMask> acc;
    for (auto& w : words) {
        const PointCloud c = attractor_cloud(ifs, target_error, w);
        const BinaryMask m = parallel_mask(distance_field(c, grid), eps + slack);
        if (!acc)
            acc = m;
        else
            acc = mode == RegionMode::intersection ? mask_and(*acc, m) : mask_or(*acc, m);
    }
    acc->eps = eps;
    return *acc;
}

inline void write_svg(std::ostream& os, const BoundaryPolygons& bp, const BinaryMask* highlight = nullptr, double px_per_unit = 400) {
    Box bb;
    for (auto& l : bp.loops)
        for (auto& v : l.v) bb.expand(v.p);
    if (bb.empty()) bb = Box::around({0, 0}, 1);
    bb = bb.dilated(0.05 * std::max(bb.width(), bb.height()) + 1e-9);
    const double W = bb.width() * px_per_unit, H = bb.height() * px_per_unit;
    auto X = [&](Vec2 p) { return (p.x - bb.lo.x) * px_per_unit; };
    auto Y = [&](Vec2 p) { return (bb.hi.y - p.y) * px_per_unit; };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    os << "<path fill=\"#9ab\" fill-rule=\"evenodd\" stroke=\"#123\" stroke-width=\"0.5\" d=\"";
    for (auto& l : bp.loops) {
        if (l.v.empty()) continue;
        os << 'M' << X(l.v[0].p) << ',' << Y(l.v[0].p);
        for (std::size_t k = 1; k < l.v.size(); ++k) os << 'L' << X(l.v[k].p) << ',' << Y(l.v[k].p);
        os << 'Z';
    }
    os << "\"/>\n";
    if (highlight) {
        const Grid& g = highlight->grid;
        os << "<g fill=\"#d33\" fill-opacity=\"0.5\">\n";
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (highlight->at(i, j)) {
                    const Vec2 p = g.node(i, j);
                    os << "<rect x=\"" << X(p) - 0.5 * g.h * px_per_unit << "\" y=\"" << Y(p) - 0.5 * g.h * px_per_unit << "\" width=\""
                       << g.h * px_per_unit << "\" height=\"" << g.h * px_per_unit << "\"/>\n";
                }
        os << "</g>\n";
    }
    os << "</svg>\n";
}

// Binary PGM dump of a mask, top row first.
inline void write_pgm(std::ostream& os, const BinaryMask& m) {
    os << "P5\n" << m.grid.nx << ' ' << m.grid.ny << "\n255\n";
    for (int j = m.grid.ny - 1; j >= 0; --j)
        for (int i = 0; i < m.grid.nx; ++i) os.put(m.at(i, j) ? static_cast<char>(255) : static_cast<char>(0));
}

}  // namespace sscurv
