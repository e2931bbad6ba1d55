// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <tuple>
#include <vector>

#include "geometry.hpp"

namespace sscurv {

// Lattice edge (I,J)-(I+1,J) for dir 0, (I,J)-(I,J+1) for dir 1, in global node indices.
struct EdgeId {
    long I = 0, J = 0;
    std::uint8_t dir = 0;
};

struct ContourVertex {
    Vec2 p;
    EdgeId edge;
};

// Closed loop with the material on the left; segment k joins vertex k to k+1
// and lies in quad (quad_I[k], quad_J[k]).
struct ContourLoop {
    std::vector<ContourVertex> v;
    std::vector<long> quad_I, quad_J;
};

struct ContourBlock {
    std::vector<ContourLoop> loops;
    long chi = 0;     // Euler characteristic of the block mask including saddle splits
    long splits = 0;  // saddle quads whose diagonal pixels are separated by the contour
};

// Per-quad pixel-complex term: dual vertex - two dual edges + face, all owned by node (i,j).
inline int quad_euler_term(bool f0, bool f1, bool f2, bool f3) {
    // corners: 0 = (i,j), 1 = (i+1,j), 2 = (i+1,j+1), 3 = (i,j+1)
    const int v = (f0 || f1 || f2 || f3) ? 1 : 0;
    const int eh = (f0 || f3) ? 1 : 0;
    const int ev = (f0 || f1) ? 1 : 0;
    const int f = f0 ? 1 : 0;
    return v - eh - ev + f;
}

// Marching squares over a block of nx * ny nodes whose node (0,0) is global node
// (I0,J0). value(i,j) must return the sample for local indices in [-1,nx]x[-1,ny]
// (callers return a background value outside the block). center(i,j) gives the
// field at the centre of quad (i,j) and is consulted only for saddles.
template <class ValueFn, class CenterFn>
ContourBlock contour_block(long I0, long J0, int nx, int ny, Vec2 origin, double h, double eps, ValueFn&& value, CenterFn&& center) {
    ContourBlock out;
    const int sx = nx + 2, sy = ny + 2;
    auto key = [&](int i, int j, int dir) { return ((static_cast<long>(j) + 1) * sx + (i + 1)) * 2 + dir; };
    struct Seg {
        long from, to;
        int qi, qj;
    };
    std::vector<Seg> segs;
    std::vector<int> start_of(static_cast<std::size_t>(2L * sx * sy), -1);
    std::vector<double> row0(static_cast<std::size_t>(nx + 2)), row1(static_cast<std::size_t>(nx + 2));
    for (int i = -1; i <= nx; ++i) row1[static_cast<std::size_t>(i + 1)] = value(i, -1);
    for (int j = -1; j < ny; ++j) {
        std::swap(row0, row1);
        for (int i = -1; i <= nx; ++i) row1[static_cast<std::size_t>(i + 1)] = value(i, j + 1);
        for (int i = -1; i < nx; ++i) {
            const double v0 = row0[static_cast<std::size_t>(i + 1)], v1 = row0[static_cast<std::size_t>(i + 2)];
            const double v2 = row1[static_cast<std::size_t>(i + 2)], v3 = row1[static_cast<std::size_t>(i + 1)];
            const bool f[4] = {v0 <= eps, v1 <= eps, v2 <= eps, v3 <= eps};
            out.chi += quad_euler_term(f[0], f[1], f[2], f[3]);
            const int nf = f[0] + f[1] + f[2] + f[3];
            if (nf == 0 || nf == 4) continue;
            const long e[4] = {key(i, j, 0), key(i + 1, j, 1), key(i, j + 1, 0), key(i, j, 1)};
            auto add = [&](int from_edge, int to_edge) {
                start_of[static_cast<std::size_t>(e[from_edge])] = static_cast<int>(segs.size());
                segs.push_back({e[from_edge], e[to_edge], i, j});
            };
            const bool saddle = nf == 2 && f[0] == f[2];
            if (saddle) {
                const bool joined = center(i, j) <= eps;
                if (joined) {
                    // background corners become isolated: reversed single-corner segments
                    for (int k = 0; k < 4; ++k)
                        if (!f[k]) add((k + 3) % 4, k);
                } else {
                    ++out.splits;
                    for (int k = 0; k < 4; ++k)
                        if (f[k]) add(k, (k + 3) % 4);
                }
                continue;
            }
            // single foreground run c_a..c_b in counterclockwise order
            int a = 0;
            while (!(f[a] && !f[(a + 3) % 4])) ++a;
            int b = a;
            while (f[(b + 1) % 4]) b = (b + 1) % 4;
            add(b, (a + 3) % 4);
        }
    }
    out.chi += out.splits;

    auto edge_of = [&](long k) {
        const int dir = static_cast<int>(k % 2);
        const long cell = k / 2;
        const int i = static_cast<int>(cell % sx) - 1, j = static_cast<int>(cell / sx) - 1;
        return std::tuple<int, int, int>{i, j, dir};
    };
    auto vertex = [&](long k) {
        const auto [i, j, dir] = edge_of(k);
        const double a = value(i, j);
        const double b = dir == 0 ? value(i + 1, j) : value(i, j + 1);
        const double t = (eps - a) / (b - a);
        const double gi = static_cast<double>(I0 + i), gj = static_cast<double>(J0 + j);
        ContourVertex cv;
        cv.p = dir == 0 ? Vec2{origin.x + h * (gi + t), origin.y + h * gj} : Vec2{origin.x + h * gi, origin.y + h * (gj + t)};
        cv.edge = {I0 + i, J0 + j, static_cast<std::uint8_t>(dir)};
        return cv;
    };
    std::vector<char> used(segs.size(), 0);
    for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        ContourLoop loop;
        std::size_t s = s0;
        while (!used[s]) {
            used[s] = 1;
            loop.v.push_back(vertex(segs[s].from));
            loop.quad_I.push_back(I0 + segs[s].qi);
            loop.quad_J.push_back(J0 + segs[s].qj);
            const int nxt = start_of[static_cast<std::size_t>(segs[s].to)];
            if (nxt < 0) break;
            s = static_cast<std::size_t>(nxt);
        }
        out.loops.push_back(std::move(loop));
    }
    return out;
}

// Turning angle at each vertex of a closed loop. Runs of coincident vertices put
// the whole turn on the last vertex of the run, so the loop total is exact.
inline std::vector<double> loop_turning(const ContourLoop& loop) {
    const std::size_t n = loop.v.size();
    std::vector<double> th(n, 0.0);
    if (n < 3) return th;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 p = loop.v[k].p, q = loop.v[(k + 1) % n].p;
        if (p == q) continue;
        std::size_t j = (k + n - 1) % n;
        std::size_t guard = 0;
        while (loop.v[j].p == p && guard++ < n) j = (j + n - 1) % n;
        if (loop.v[j].p == p) continue;
        th[k] = turning_angle(p - loop.v[j].p, q - p);
    }
    return th;
}

// Arc-length position of every vertex; back() of the result is the loop length.
inline std::vector<double> loop_arclength(const ContourLoop& loop) {
    const std::size_t n = loop.v.size();
    std::vector<double> s(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) s[k + 1] = s[k] + distance(loop.v[k].p, loop.v[(k + 1) % n].p);
    return s;
}

// Piecewise-constant density obtained by spreading each vertex weight uniformly
// over an arc of length w centred on the vertex (periodic along the loop).
struct TurningDensity {
    double length = 0;
    std::vector<double> cut;  // piece k spans [cut[k], cut[k+1])
    std::vector<double> val;

    TurningDensity(const std::vector<double>& s, const std::vector<double>& weight, double w)
        : TurningDensity(s.back(), masses_of(s, weight), w) {}

    // Point masses (position, weight) on a loop of the given length.
    TurningDensity(double loop_length, const std::vector<std::pair<double, double>>& masses, double w) {
        length = loop_length;
        if (!(length > 0)) {
            cut = {0.0, 0.0};
            val = {0.0};
            return;
        }
        if (w >= length) {
            double tot = 0;
            for (auto& m : masses) tot += m.second;
            cut = {0.0, length};
            val = {tot / length};
            return;
        }
        struct Ev {
            double x, d;
        };
        std::vector<Ev> ev;
        double v0 = 0;
        for (auto [pos, wt] : masses) {
            const double d = wt / w;
            double a = std::fmod(pos - 0.5 * w + 2 * length, length);
            double b = a + w;
            ev.push_back({a, d});
            if (b >= length) {
                v0 += d;
                ev.push_back({b - length, -d});
            } else {
                ev.push_back({b, -d});
            }
        }
        std::sort(ev.begin(), ev.end(), [](const Ev& p, const Ev& q) { return p.x < q.x; });
        cut.push_back(0.0);
        double cur = v0;
        for (auto& e : ev) {
            if (e.x > cut.back()) {
                val.push_back(cur);
                cut.push_back(e.x);
            }
            cur += e.d;
        }
        if (length > cut.back()) {
            val.push_back(cur);
            cut.push_back(length);
        } else if (val.size() < cut.size() - 1) {
            val.push_back(cur);
        }
        if (val.empty()) {
            cut = {0.0, length};
            val = {0.0};
        }
    }

    static std::vector<std::pair<double, double>> masses_of(const std::vector<double>& s, const std::vector<double>& weight) {
        std::vector<std::pair<double, double>> m;
        for (std::size_t k = 0; k < weight.size(); ++k)
            if (weight[k] != 0) m.emplace_back(s[k], weight[k]);
        return m;
    }

    std::size_t piece(double x) const {
        auto it = std::upper_bound(cut.begin(), cut.end(), x);
        std::size_t k = static_cast<std::size_t>(std::max<long>(0, (it - cut.begin()) - 1));
        return std::min(k, val.size() - 1);
    }

    // Integral of |density| over [a,b] with 0 <= a <= b <= length.
    double abs_integral(double a, double b) const {
        double sum = 0;
        for (std::size_t k = piece(a); k < val.size() && cut[k] < b; ++k) {
            const double lo = std::max(a, cut[k]), hi = std::min(b, cut[k + 1]);
            if (hi > lo) sum += std::abs(val[k]) * (hi - lo);
        }
        return sum;
    }
};

// Single-linkage groups of turning vertices closer than `link`; counts the groups whose
// net turning exceeds `threshold` full turns in absolute value.
inline long turn_clusters(std::vector<std::pair<Vec2, double>> turns, double link, double threshold) {
    std::sort(turns.begin(), turns.end(), [](const auto& a, const auto& b) { return a.first.x < b.first.x; });
    const std::size_t n = turns.size();
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    auto root = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n && turns[j].first.x - turns[i].first.x <= link; ++j)
            if (distance(turns[i].first, turns[j].first) <= link) parent[root(i)] = root(j);
    std::vector<double> sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) sum[root(i)] += turns[i].second;
    long count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (root(i) == i && std::abs(sum[i]) / (2 * std::numbers::pi) > threshold) ++count;
    return count;
}

}  // namespace sscurv
