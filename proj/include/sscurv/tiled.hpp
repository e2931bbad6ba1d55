// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <unordered_map>
#include <vector>

#include "contour.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "ifs.hpp"
#include "cylinder_tree.hpp"

// Sparse raster engine. The lattice origin + h (I, J) is virtual; only tiles that
// may carry boundary (or region) contributions are sampled, each with a halo so
// that turning angles and smoothed densities of owned items are exact.
namespace sscurv {

// Field value = max over groups of (min over the group's words of dist(x, S_w F)).
// The default single group {()} is the distance to F itself.
struct FieldSpec {
    std::vector<std::vector<Word>> groups{{Word{}}};
};

// Vertices count for the region when they lie within eps + slack_h * h of every
// listed cylinder and on the kept side n . x >= c of the optional half plane.
struct RegionSpec {
    std::vector<Word> words;
    double slack_h = 2.0;
    std::optional<Vec2> half_plane_normal;
    double half_plane_offset = 0;
    bool skip_outside = true;  // do not sample tiles that cannot hold region vertices
};

// Many two-cylinder regions at once: every listed pair of sigma(level) words, each
// region defined as in RegionSpec. Results land in LocalMeasure::pair_*.
struct PairRegions {
    double level = 0;
    std::vector<Word> words;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // indices into words
    double slack_h = 2.0;
};

struct EngineOptions {
    int tile = 0;  // 0: chosen from eps_max / h
    int halo = 6;
    double tile_factor = 3.0;
    double window_h = 4.0;
    double cluster_threshold = 0.05;
    double leaf_error_h = 0.5;
    std::size_t node_budget = 300'000'000;
};

struct LocalMeasure {
    double eps = 0, h = 0, cloud_error = 0;
    long chi = 0;
    long splits = 0;
    double length = 0;
    double area = 0;
    double turning = 0;    // total signed turning in full turns
    double variation = 0;  // smoothed total variation in full turns
    double region_signed = 0;
    double region_variation = 0;
    long region_clusters = 0;
    long region_vertices = 0;
    std::vector<std::pair<Vec2, double>> region_turns;  // owned in-region vertices and their turning
    std::vector<double> pair_signed, pair_variation;
    double gb_residual = 0;  // worst per-tile |sum theta - 2 pi chi| of the tile-local mask
    std::size_t tiles = 0;
    std::size_t nodes = 0;
};

namespace detail {

struct TileRange {
    long tx0, tx1, ty0, ty1;
};

}  // namespace detail

inline Box default_window(const Ifs& ifs, double eps_max, double h) {
    const Ball b = bounding_ball(ifs);
    return Box::around(b.center, b.radius).dilated(eps_max + 4 * h);
}

inline std::vector<LocalMeasure> local_measure(const Ifs& ifs, const Box& window, double h, const std::vector<double>& eps_list,
                                               const FieldSpec& field = {}, const RegionSpec* region = nullptr, EngineOptions opt = {},
                                               const PairRegions* pairwise = nullptr) {
    if (eps_list.empty()) throw DomainError("no thresholds given");
    const double eps_max = *std::max_element(eps_list.begin(), eps_list.end());
    const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
    if (!(eps_min > h)) throw DomainError("eps must exceed the grid spacing");
    const Frame fr(ifs);
    const double two_pi = 2 * std::numbers::pi;
    const double leaf_error = opt.leaf_error_h * h;
    const double cap = eps_max + 3 * h;
    const double deep = eps_min - 4 * h;  // below this only "inside" matters
    const double region_slack = region ? region->slack_h * h : 0.0;
    const Vec2 origin = window.lo;
    const long NX = static_cast<long>(std::ceil(window.width() / h)) + 1;
    const long NY = static_cast<long>(std::ceil(window.height() / h)) + 1;
    int T = opt.tile;
    if (T <= 0) {
        T = static_cast<int>(std::ceil(opt.tile_factor * cap / h));
        T = std::max(40, std::min<int>(T, static_cast<int>(std::max(NX, NY) / 8)));
    }
    const int H = opt.halo;
    const long NTX = (NX + T - 1) / T, NTY = (NY + T - 1) / T;

    std::vector<LocalMeasure> out(eps_list.size());
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        out[e].eps = eps_list[e];
        out[e].h = h;
        out[e].cloud_error = leaf_error;
        if (pairwise) {
            out[e].pair_signed.assign(pairwise->pairs.size(), 0.0);
            out[e].pair_variation.assign(pairwise->pairs.size(), 0.0);
        }
    }
    std::map<Word, std::size_t> pw_index;
    std::unordered_map<std::uint64_t, std::size_t> pw_pair;
    if (pairwise) {
        for (std::size_t k = 0; k < pairwise->words.size(); ++k) pw_index.emplace(pairwise->words[k], k);
        for (std::size_t k = 0; k < pairwise->pairs.size(); ++k) {
            auto [a, b] = pairwise->pairs[k];
            pw_pair.emplace((std::uint64_t{std::min(a, b)} << 32) | std::max(a, b), k);
        }
    }

    // balls of the pairwise family, bucketed for the tile test
    std::vector<Vec2> pw_c;
    std::vector<double> pw_r;
    double pw_cell = 1, pw_rmax = 0;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> pw_grid;
    auto pw_key = [&](long x, long y) { return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y); };
    if (pairwise) {
        for (auto& w : pairwise->words) {
            const Affine a = compose_affine(ifs, w);
            pw_c.push_back(a.apply(fr.ball.center));
            pw_r.push_back(a.ratio * fr.ball.radius);
            pw_rmax = std::max(pw_rmax, pw_r.back());
        }
        pw_cell = std::max(2 * pw_rmax, h);
        for (std::size_t k = 0; k < pw_c.size(); ++k)
            pw_grid[pw_key(static_cast<long>(std::floor(pw_c[k].x / pw_cell)), static_cast<long>(std::floor(pw_c[k].y / pw_cell)))].push_back(k);
    }
    // fewer than two family cylinders within reach of the disk (c, rad)?
    auto pw_lonely = [&](Vec2 c, double rad, double tol) {
        const double reach = rad + eps_max + pairwise->slack_h * h;
        const double ext = reach + pw_rmax;
        const long x0 = static_cast<long>(std::floor((c.x - ext) / pw_cell)), x1 = static_cast<long>(std::floor((c.x + ext) / pw_cell));
        const long y0 = static_cast<long>(std::floor((c.y - ext) / pw_cell)), y1 = static_cast<long>(std::floor((c.y + ext) / pw_cell));
        if ((x1 - x0 + 1) * (y1 - y0 + 1) > 4 * static_cast<long>(pw_grid.size()) + 16) return false;
        int count = 0;
        for (long x = x0; x <= x1; ++x)
            for (long y = y0; y <= y1; ++y) {
                auto it = pw_grid.find(pw_key(x, y));
                if (it == pw_grid.end()) continue;
                for (std::size_t k : it->second) {
                    if (distance(c, pw_c[k]) - pw_r[k] > reach) continue;
                    if (distance_bounds(fr, c, tol, pairwise->words[k]).lower > reach) continue;
                    if (++count >= 2) return false;
                }
            }
        return true;
    };

    // certified tile selection
    auto node_pos = [&](double I, double J) { return Vec2{origin.x + h * I, origin.y + h * J}; };
    std::vector<std::pair<long, long>> active;
    std::vector<detail::TileRange> stack{{0, NTX, 0, NTY}};
    while (!stack.empty()) {
        const detail::TileRange r = stack.back();
        stack.pop_back();
        const double I0 = static_cast<double>(r.tx0 * T), I1 = static_cast<double>(std::min(r.tx1 * T, NX));
        const double J0 = static_cast<double>(r.ty0 * T), J1 = static_cast<double>(std::min(r.ty1 * T, NY));
        const Vec2 c = node_pos(0.5 * (I0 + I1), 0.5 * (J0 + J1));
        const double rad = 0.5 * h * std::hypot(I1 - I0, J1 - J0);
        const double tol = std::max(0.25 * rad, h);
        bool skip = false;
        if (region && region->half_plane_normal) {
            const Vec2 n = *region->half_plane_normal;
            if (dot(n, c) + rad * n.norm() < region->half_plane_offset) skip = true;
        }
        if (!skip && pairwise && pw_lonely(c, rad, tol)) skip = true;
        if (!skip && region && region->skip_outside)
            for (auto& w : region->words) {
                const DistanceBounds b = distance_bounds(fr, c, tol, w);
                if (b.lower - rad > eps_max + region_slack) {
                    skip = true;
                    break;
                }
            }
        if (!skip) {
            double lo = 0, hi = 0;
            for (auto& g : field.groups) {
                double glo = std::numeric_limits<double>::infinity(), ghi = glo;
                for (auto& w : g) {
                    const DistanceBounds b = distance_bounds(fr, c, tol, w);
                    glo = std::min(glo, b.lower);
                    ghi = std::min(ghi, b.upper);
                }
                lo = std::max(lo, glo);
                hi = std::max(hi, ghi);
            }
            if (lo - rad > eps_max) skip = true;
            if (hi + rad + leaf_error < eps_min) skip = true;
        }
        if (skip) continue;
        if (r.tx1 - r.tx0 == 1 && r.ty1 - r.ty0 == 1) {
            active.emplace_back(r.tx0, r.ty0);
            continue;
        }
        const long mx = (r.tx1 - r.tx0 > 1) ? (r.tx0 + r.tx1) / 2 : r.tx1;
        const long my = (r.ty1 - r.ty0 > 1) ? (r.ty0 + r.ty1) / 2 : r.ty1;
        for (auto [a, b] : {std::pair{r.tx0, mx}, std::pair{mx, r.tx1}})
            for (auto [c2, d] : {std::pair{r.ty0, my}, std::pair{my, r.ty1}})
                if (a < b && c2 < d) stack.push_back({a, b, c2, d});
    }
    std::sort(active.begin(), active.end());
    const int NB = T + 2 * H + 1;
    if (active.size() * static_cast<std::size_t>(NB) * static_cast<std::size_t>(NB) > opt.node_budget)
        throw ResourceError("tiled raster exceeds the node budget");

    const std::size_t ng = field.groups.size();
    const std::size_t nr = region ? region->words.size() : 0;
    std::vector<double> vals(static_cast<std::size_t>(NB) * NB);
    std::vector<std::vector<long>> groots(ng), rroots(nr);
    CylinderTree tree(fr, window, cap, leaf_error);
    for (auto [tx, ty] : active) {
        const long I0 = tx * T, J0 = ty * T;
        const long BI = I0 - H, BJ = J0 - H;
        Box block{node_pos(static_cast<double>(BI), static_cast<double>(BJ)),
                  node_pos(static_cast<double>(BI + NB - 1), static_cast<double>(BJ + NB - 1))};
        tree.reset(block);
        for (std::size_t g = 0; g < ng; ++g) {
            groots[g].clear();
            for (auto& pw : field.groups[g]) groots[g].push_back(tree.find(pw));
        }
        for (std::size_t k = 0; k < nr; ++k) rroots[k] = {tree.find(region->words[k])};

        auto field_at = [&](Vec2 x) {
            double v = 0;
            for (std::size_t g = 0; g < ng; ++g) v = std::max(v, tree.nearest(x, cap, groots[g], deep));
            return v;
        };
        for (int j = 0; j < NB; ++j)
            for (int i = 0; i < NB; ++i) {
                const long I = BI + i, J = BJ + j;
                double v = cap;
                if (I >= 0 && J >= 0 && I < NX && J < NY) v = field_at(node_pos(static_cast<double>(I), static_cast<double>(J)));
                vals[static_cast<std::size_t>(j) * NB + i] = v;
            }
        for (auto& m : out) {
            ++m.tiles;
            m.nodes += static_cast<std::size_t>(NB) * NB;
        }
        auto value = [&](int i, int j) {
            if (i < 0 || j < 0 || i >= NB || j >= NB) return cap;
            return vals[static_cast<std::size_t>(j) * NB + i];
        };
        auto center = [&](int i, int j) {
            return field_at(node_pos(static_cast<double>(BI + i) + 0.5, static_cast<double>(BJ + j) + 0.5));
        };
        auto owned = [&](long I, long J) { return I >= I0 && I < I0 + T && J >= J0 && J < J0 + T; };
        auto in_region = [&](Vec2 p, double eps) {
            if (!region) return false;
            if (region->half_plane_normal && dot(*region->half_plane_normal, p) < region->half_plane_offset) return false;
            const double lim = eps + region_slack;
            for (std::size_t k = 0; k < nr; ++k)
                if (tree.nearest(p, lim * 2 + h, rroots[k]) > lim) return false;
            return true;
        };

        // pairs of listed cylinders within eps + slack of p
        std::vector<std::size_t> near;
        auto pairs_at = [&](Vec2 p, double eps, std::vector<std::size_t>& found) {
            found.clear();
            near.clear();
            const double lim = eps + pairwise->slack_h * h;
            tree.cylinders_within(p, lim, ifs.big_R, pairwise->level, [&](const Word& w) {
                auto it = pw_index.find(w);
                if (it != pw_index.end()) near.push_back(it->second);
            });
            std::sort(near.begin(), near.end());
            for (std::size_t x = 0; x < near.size(); ++x)
                for (std::size_t y = x + 1; y < near.size(); ++y) {
                    auto it = pw_pair.find((std::uint64_t{near[x]} << 32) | near[y]);
                    if (it != pw_pair.end()) found.push_back(it->second);
                }
        };
        std::vector<std::size_t> found;

        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            const double eps = eps_list[e];
            LocalMeasure& m = out[e];
            const ContourBlock blk = contour_block(BI, BJ, NB, NB, origin, h, eps, value, center);
            // owned quads: Euler terms and split saddles
            for (int j = H; j < H + T; ++j)
                for (int i = H; i < H + T; ++i) {
                    const double v0 = value(i, j), v1 = value(i + 1, j), v2 = value(i + 1, j + 1), v3 = value(i, j + 1);
                    const bool f0 = v0 <= eps, f1 = v1 <= eps, f2 = v2 <= eps, f3 = v3 <= eps;
                    m.chi += quad_euler_term(f0, f1, f2, f3);
                    if (f0 == f2 && f1 == f3 && f0 != f1 && center(i, j) > eps) {
                        ++m.chi;
                        ++m.splits;
                    }
                }
            double block_turn = 0;
            for (const ContourLoop& loop : blk.loops) {
                const std::vector<double> th = loop_turning(loop);
                const std::vector<double> s = loop_arclength(loop);
                const std::size_t n = th.size();
                std::vector<double> rw(n, 0.0);
                bool any_region = false;
                for (std::size_t k = 0; k < n; ++k) {
                    block_turn += th[k];
                    if (region && th[k] != 0 && in_region(loop.v[k].p, eps)) {
                        rw[k] = th[k];
                        any_region = true;
                    }
                }
                bool any_owned = false;
                for (std::size_t k = 0; k < n; ++k) any_owned |= owned(loop.quad_I[k], loop.quad_J[k]);
                if (!any_owned) continue;
                const TurningDensity all(s, th, opt.window_h * h);
                std::optional<TurningDensity> reg;
                if (any_region) reg.emplace(s, rw, opt.window_h * h);
                for (std::size_t k = 0; k < n; ++k) {
                    const EdgeId ed = loop.v[k].edge;
                    if (owned(ed.I, ed.J)) {
                        m.turning += th[k] / two_pi;
                        m.region_signed += rw[k] / two_pi;
                        if (rw[k] != 0) {
                            ++m.region_vertices;
                            m.region_turns.emplace_back(loop.v[k].p, rw[k]);
                        }
                    }
                    if (!owned(loop.quad_I[k], loop.quad_J[k])) continue;
                    const Vec2 a = loop.v[k].p, b = loop.v[(k + 1) % n].p;
                    m.length += distance(a, b);
                    m.area += 0.5 * cross(a - origin, b - origin);
                    m.variation += all.abs_integral(s[k], s[k + 1]) / two_pi;
                    if (reg) m.region_variation += reg->abs_integral(s[k], s[k + 1]) / two_pi;
                }
                if (pairwise) {
                    std::map<std::size_t, std::vector<std::pair<double, double>>> masses;
                    for (std::size_t k = 0; k < n; ++k) {
                        if (th[k] == 0) continue;
                        pairs_at(loop.v[k].p, eps, found);
                        const EdgeId ed = loop.v[k].edge;
                        for (std::size_t q : found) {
                            masses[q].emplace_back(s[k], th[k]);
                            if (owned(ed.I, ed.J)) m.pair_signed[q] += th[k] / two_pi;
                        }
                    }
                    if (masses.empty()) continue;
                    // owned arclength up to position x
                    std::vector<double> pre(n + 1, 0.0);
                    for (std::size_t k = 0; k < n; ++k)
                        pre[k + 1] = pre[k] + (owned(loop.quad_I[k], loop.quad_J[k]) ? s[k + 1] - s[k] : 0.0);
                    auto owned_upto = [&](double x) {
                        std::size_t k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
                        k = k == 0 ? 0 : std::min(k - 1, n - 1);
                        const double part = owned(loop.quad_I[k], loop.quad_J[k]) ? std::clamp(x - s[k], 0.0, s[k + 1] - s[k]) : 0.0;
                        return pre[k] + part;
                    };
                    for (auto& [q, ms] : masses) {
                        const TurningDensity d(s.back(), ms, opt.window_h * h);
                        double v = 0;
                        for (std::size_t k = 0; k < d.val.size(); ++k)
                            if (d.val[k] != 0) v += std::abs(d.val[k]) * (owned_upto(d.cut[k + 1]) - owned_upto(d.cut[k]));
                        m.pair_variation[q] += v / two_pi;
                    }
                }
            }
            m.gb_residual = std::max(m.gb_residual, std::abs(block_turn - two_pi * static_cast<double>(blk.chi)));
        }
    }
    for (auto& m : out) m.region_clusters = turn_clusters(m.region_turns, opt.window_h * h, opt.cluster_threshold);
    return out;
}

inline LocalMeasure local_measure(const Ifs& ifs, const Box& window, double h, double eps, const FieldSpec& field = {},
                                  const RegionSpec* region = nullptr, EngineOptions opt = {}) {
    return local_measure(ifs, window, h, std::vector<double>{eps}, field, region, opt).front();
}

}  // namespace sscurv
