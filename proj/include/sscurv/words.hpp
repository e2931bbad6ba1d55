// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "ifs.hpp"

namespace sscurv {

enum class FamilyKind { sigma, sigma_b };

struct WordFamily {
    double epsilon = 0;
    FamilyKind kind = FamilyKind::sigma;
    std::vector<Word> words;
    double slack = 0;  // resolution slack of the boundary test (sigma_b only)
};

// Words with R r_w < eps <= R r_{w minus last letter}, all of length >= 1.
inline WordFamily sigma(const Ifs& ifs, double eps) {
    if (!(eps > 0 && eps <= ifs.big_R)) throw DomainError("eps must lie in (0, R]");
    WordFamily fam;
    fam.epsilon = eps;
    Word w;
    auto rec = [&](auto&& self, double r) -> void {
        for (std::size_t i = 0; i < ifs.size(); ++i) {
            const double rc = r * ifs.maps[i].ratio;
            w.push_back(static_cast<int>(i) + 1);
            if (ifs.big_R * rc < eps)
                fam.words.push_back(w);
            else
                self(self, rc);
            w.pop_back();
        }
    };
    rec(rec, 1.0);
    return fam;
}

// Sum of r_w^D over sigma(eps) without materializing the family.
inline double sigma_partition_sum(const Ifs& ifs, double eps, double D) {
    if (!(eps > 0 && eps <= ifs.big_R)) throw DomainError("eps must lie in (0, R]");
    auto rec = [&](auto&& self, double r) -> double {
        double acc = 0;
        for (auto& m : ifs.maps) {
            const double rc = r * m.ratio;
            acc += ifs.big_R * rc < eps ? std::pow(rc, D) : self(self, rc);
        }
        return acc;
    };
    return rec(rec, 1.0);
}

// Partition sum over the family; equals 1 for sigma families.
inline double partition_sum(const Ifs& ifs, const WordFamily& fam, double D) {
    double s = 0;
    for (auto& w : fam.words) s += std::pow(word_ratio(ifs, w), D);
    return s;
}

struct MinBounds {
    double lower = 0;  // certified lower bound of min phi over S_root F
    double upper = std::numeric_limits<double>::infinity();  // value of phi at a point of S_root F
};

// Bounds on the minimum of a 1-Lipschitz phi over S_root F by best-first
// branch and bound on the cylinder tree, until upper - lower <= tol.
template <class Phi>
MinBounds min_over_cylinder(const Frame& fr, const Word& root, double tol, Phi&& phi) {
    struct Item {
        double lower;
        Affine s;
        bool operator<(const Item& o) const { return lower > o.lower; }
    };
    MinBounds out;
    std::priority_queue<Item> pq;
    const Affine s0 = compose_affine(*fr.ifs, root);
    out.upper = phi(s0.apply(fr.seed.point));
    pq.push({phi(s0.apply(fr.ball.center)) - s0.ratio * fr.ball.radius, s0});
    int guard = 0;
    while (!pq.empty()) {
        const Item it = pq.top();
        out.lower = std::min(it.lower, out.upper);
        if (out.upper - out.lower <= tol || ++guard > 2'000'000) return out;
        pq.pop();
        for (auto& m : fr.maps) {
            const Affine s = compose(it.s, m);
            out.upper = std::min(out.upper, phi(s.apply(fr.seed.point)));
            const double lb = phi(s.apply(fr.ball.center)) - s.ratio * fr.ball.radius;
            if (lb < out.upper) pq.push({lb, s});
        }
    }
    out.lower = out.upper;
    return out;
}

inline std::vector<Vec2> map_polygon(const Similarity& s, const std::vector<Vec2>& poly) {
    std::vector<Vec2> out;
    out.reserve(poly.size());
    for (auto p : poly) out.push_back(s.apply(p));
    return out;
}

// Words of sigma(eps) whose cylinder comes within 2 eps of the complement of the
// union of the first-level images of O.
inline WordFamily sigma_b(const Ifs& ifs, double eps, double rel_error = 0.01) {
    WordFamily base = sigma(ifs, eps);
    WordFamily fam;
    fam.epsilon = eps;
    fam.kind = FamilyKind::sigma_b;
    const Frame fr(ifs);
    std::vector<std::vector<Vec2>> images;
    for (auto& m : ifs.maps) images.push_back(map_polygon(m, ifs.open_set));
    const double tol = rel_error * eps;
    fam.slack = tol;
    for (auto& w : base.words) {
        const auto& poly = images[static_cast<std::size_t>(w.front() - 1)];
        const MinBounds mb = min_over_cylinder(fr, w, tol, [&](Vec2 y) {
            return point_in_polygon(y, poly) ? distance_to_polygon_boundary(y, poly) : 0.0;
        });
        if (mb.lower <= 2 * eps) fam.words.push_back(w);
    }
    return fam;
}

struct SoscConstants {
    Word u;
    double alpha = 0;
    double rho = 0;
    double lambda_min = 1;
};

inline SoscConstants sosc_constants(const Ifs& ifs, const Word& u, double tol = 1e-7) {
    const Frame fr(ifs);
    const auto& O = ifs.open_set;
    const MinBounds mb = min_over_cylinder(fr, u, tol, [&](Vec2 y) {
        return point_in_polygon(y, O) ? distance_to_polygon_boundary(y, O) : 0.0;
    });
    SoscConstants c;
    c.u = u;
    c.alpha = mb.lower;
    if (!(c.alpha > 0)) throw DomainError("S_u F is not certified inside the open set for u = " + to_string(u));
    c.rho = ifs.r_min() * c.alpha / 2;
    c.lambda_min = std::max(1.0, ifs.big_R / c.rho);
    return c;
}

// Smallest lambda_min over words of length up to `max_len` (and at most `budget` words).
inline SoscConstants auto_sosc(const Ifs& ifs, int max_len = 8, std::size_t budget = 4000, double tol = 1e-4) {
    std::optional<SoscConstants> best;
    std::vector<Word> level{Word{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Word> next;
        for (auto& w : level)
            for (int a = 1; a <= static_cast<int>(ifs.size()); ++a) {
                Word v = w;
                v.push_back(a);
                next.push_back(std::move(v));
            }
        if (next.size() > budget) break;
        for (auto& u : next) {
            try {
                const SoscConstants c = sosc_constants(ifs, u, tol);
                if (!best || c.lambda_min < best->lambda_min) best = c;
            } catch (const DomainError&) {
            }
        }
        level = std::move(next);
    }
    if (!best) throw DomainError("no word certified inside the open set; give lambda explicitly");
    return *best;
}

struct GapBounds {
    double lower = 0;
    double upper = std::numeric_limits<double>::infinity();
};

// Bounds on dist(S_a F, S_b F); stops early once the gap is decided against `threshold`.
inline GapBounds cylinder_gap(const Frame& fr, const Word& a, const Word& b, double tol,
                              double threshold = -1) {
    struct Item {
        double lower;
        Affine s, t;
        bool operator<(const Item& o) const { return lower > o.lower; }
    };
    auto lb = [&](const Affine& s, const Affine& t) {
        return std::max(0.0, distance(s.apply(fr.ball.center), t.apply(fr.ball.center)) - (s.ratio + t.ratio) * fr.ball.radius);
    };
    const Affine sa = compose_affine(*fr.ifs, a), sb = compose_affine(*fr.ifs, b);
    GapBounds g;
    g.upper = distance(sa.apply(fr.seed.point), sb.apply(fr.seed.point));
    std::priority_queue<Item> pq;
    pq.push({lb(sa, sb), sa, sb});
    int guard = 0;
    while (!pq.empty()) {
        const Item it = pq.top();
        g.lower = it.lower;
        if (g.upper - g.lower <= tol) return g;
        if (threshold >= 0 && (g.lower > threshold || g.upper <= threshold)) return g;
        if (++guard > 400000) return g;
        pq.pop();
        const bool split_first = it.s.ratio >= it.t.ratio;
        for (auto& m : fr.maps) {
            const Affine s = split_first ? compose(it.s, m) : it.s;
            const Affine t = split_first ? it.t : compose(it.t, m);
            g.upper = std::min(g.upper, distance(s.apply(fr.seed.point), t.apply(fr.seed.point)));
            const double l = lb(s, t);
            if (l < g.upper) pq.push({l, s, t});
        }
    }
    g.lower = g.upper;
    return g;
}

// Certified superset test: may report a non-neighbour, never drops a true one.
inline bool cylinders_close(const Frame& fr, const Word& a, const Word& b, double threshold, double tol) {
    const GapBounds g = cylinder_gap(fr, a, b, tol, threshold);
    return g.lower <= threshold;
}

// Members of sigma(lambda eps) other than w whose cylinders come within
// 2 eps + 2 err of S_w F, where err = eps / 100.
inline std::vector<Word> neighbors(const Ifs& ifs, double eps, double lambda, const Word& w) {
    const WordFamily fam = sigma(ifs, std::min(ifs.big_R, lambda * eps));
    const Frame fr(ifs);
    const double err = eps / 100;
    std::vector<Word> out;
    for (auto& v : fam.words) {
        if (v == w) continue;
        if (cylinders_close(fr, w, v, 2 * eps + 2 * err, err)) out.push_back(v);
    }
    return out;
}

// All unordered neighbour pairs (i < j by family index) of a family; `margin` widens
// the threshold to 2 eps (1 + margin).
inline std::vector<std::pair<std::size_t, std::size_t>> neighbor_pairs(const Ifs& ifs, const WordFamily& fam, double eps,
                                                                       double margin = 0.01) {
    const Frame fr(ifs);
    const double err = eps * margin;
    const double thr = 2 * eps + 2 * err;
    std::vector<Vec2> centers;
    std::vector<double> radii;
    double rmax = 0;
    for (auto& w : fam.words) {
        const Similarity s = compose(ifs, w);
        centers.push_back(s.apply(fr.ball.center));
        radii.push_back(s.ratio * fr.ball.radius);
        rmax = std::max(rmax, radii.back());
    }
    const double cell = std::max(2 * rmax + thr, 1e-12);
    std::map<std::pair<long, long>, std::vector<std::size_t>> grid;
    auto key = [&](Vec2 p) { return std::pair<long, long>{static_cast<long>(std::floor(p.x / cell)), static_cast<long>(std::floor(p.y / cell))}; };
    for (std::size_t i = 0; i < centers.size(); ++i) grid[key(centers[i])].push_back(i);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const auto [kx, ky] = key(centers[i]);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({kx + dx, ky + dy});
                if (it == grid.end()) continue;
                for (std::size_t j : it->second) {
                    if (j <= i) continue;
                    if (distance(centers[i], centers[j]) - radii[i] - radii[j] > thr) continue;
                    if (cylinders_close(fr, fam.words[i], fam.words[j], thr, err)) out.emplace_back(i, j);
                }
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace sscurv
