// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace sscurv {

// z -> ratio * R(rotation) * (reflect ? conj(z) : z) + translation
struct Similarity {
    double ratio = 1.0;
    double rotation = 0.0;
    bool reflect = false;
    Vec2 translation{};

    Vec2 apply(Vec2 p) const {
        if (reflect) p.y = -p.y;
        return rotate(p, rotation) * ratio + translation;
    }
    Vec2 operator()(Vec2 p) const { return apply(p); }

    // linear part applied to a direction
    Vec2 linear(Vec2 v) const {
        if (reflect) v.y = -v.y;
        return rotate(v, rotation) * ratio;
    }

    Similarity inverse() const {
        Similarity inv;
        inv.ratio = 1.0 / ratio;
        inv.reflect = reflect;
        inv.rotation = reflect ? rotation : -rotation;
        inv.translation = {0, 0};
        inv.translation = -inv.apply(translation);
        return inv;
    }

    static Similarity identity() { return {}; }
};

// (a o b)(x) = a(b(x))
inline Similarity compose(const Similarity& a, const Similarity& b) {
    Similarity c;
    c.ratio = a.ratio * b.ratio;
    c.reflect = a.reflect != b.reflect;
    c.rotation = a.rotation + (a.reflect ? -b.rotation : b.rotation);
    c.translation = a.apply(b.translation);
    return c;
}

// Similarity with its linear part expanded to a matrix; used on hot tree walks.
struct Affine {
    double a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]
    Vec2 t{};
    double ratio = 1;

    Affine() = default;
    explicit Affine(const Similarity& s) : t(s.translation), ratio(s.ratio) {
        const double co = std::cos(s.rotation) * s.ratio, si = std::sin(s.rotation) * s.ratio;
        if (s.reflect) {
            a = co; b = si; c = si; d = -co;
        } else {
            a = co; b = -si; c = si; d = co;
        }
    }
    Vec2 apply(Vec2 p) const { return {a * p.x + b * p.y + t.x, c * p.x + d * p.y + t.y}; }
};

inline Affine compose(const Affine& f, const Affine& g) {
    Affine h;
    h.a = f.a * g.a + f.b * g.c;
    h.b = f.a * g.b + f.b * g.d;
    h.c = f.c * g.a + f.d * g.c;
    h.d = f.c * g.b + f.d * g.d;
    h.t = f.apply(g.t);
    h.ratio = f.ratio * g.ratio;
    return h;
}

// Solves (I - A) x = t for the unique fixed point of a contraction.
inline Vec2 fixed_point(const Similarity& s) {
    const double c = std::cos(s.rotation) * s.ratio, sn = std::sin(s.rotation) * s.ratio;
    double a11, a12, a21, a22;
    if (s.reflect) {
        a11 = c; a12 = sn; a21 = sn; a22 = -c;
    } else {
        a11 = c; a12 = -sn; a21 = sn; a22 = c;
    }
    const double m11 = 1 - a11, m12 = -a12, m21 = -a21, m22 = 1 - a22;
    const double det = m11 * m22 - m12 * m21;
    return {(m22 * s.translation.x - m12 * s.translation.y) / det, (m11 * s.translation.y - m21 * s.translation.x) / det};
}

// Letters are 1-based map indices.
using Word = std::vector<int>;

inline Word concat(const Word& a, const Word& b) {
    Word w = a;
    w.insert(w.end(), b.begin(), b.end());
    return w;
}

inline Word prefix(const Word& w, std::size_t k) { return Word(w.begin(), w.begin() + static_cast<long>(std::min(k, w.size()))); }

inline bool is_prefix(const Word& p, const Word& w) {
    return p.size() <= w.size() && std::equal(p.begin(), p.end(), w.begin());
}

inline std::string to_string(const Word& w) {
    std::string s = "(";
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
    return s + ")";
}

struct Ifs {
    std::string name;
    std::vector<Similarity> maps;
    std::vector<Vec2> open_set;
    double big_R = 3.0;

    std::size_t size() const { return maps.size(); }
    const Similarity& map(int letter) const { return maps.at(static_cast<std::size_t>(letter - 1)); }
    double r_min() const {
        double r = 1;
        for (auto& m : maps) r = std::min(r, m.ratio);
        return r;
    }
    double r_max() const {
        double r = 0;
        for (auto& m : maps) r = std::max(r, m.ratio);
        return r;
    }
};

inline Similarity compose(const Ifs& ifs, const Word& w) {
    Similarity s;
    for (int letter : w) {
        if (letter < 1 || letter > static_cast<int>(ifs.size())) throw DomainError("word letter out of range");
        s = compose(s, ifs.map(letter));
    }
    return s;
}

inline double word_ratio(const Ifs& ifs, const Word& w) {
    double r = 1;
    for (int letter : w) r *= ifs.map(letter).ratio;
    return r;
}

inline double similarity_dimension(const Ifs& ifs) {
    auto f = [&](double s) {
        double v = -1;
        for (auto& m : ifs.maps) v += std::pow(m.ratio, s);
        return v;
    };
    double lo = 0, hi = 1;
    while (f(hi) > 0) hi *= 2;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        double df = 0;
        for (auto& m : ifs.maps) df += std::pow(m.ratio, s) * std::log(m.ratio);
        if (df == 0) break;
        const double next = s - f(s) / df;
        if (!(next > lo - 1e-9 && next < hi + 1e-9)) break;
        s = next;
    }
    return s;
}

struct ArithmeticVerdict {
    bool arithmetic = false;
    double h = 0;  // generator of the lattice of -ln r_i when arithmetic
    double tolerance = 1e-12;
    std::int64_t max_denominator = 10000;
};

namespace detail {
// Best rational approximation p/q of x with q <= qmax by continued fractions.
inline bool small_rational(double x, std::int64_t qmax, double tol, std::int64_t& p, std::int64_t& q) {
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double y = x;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(y);
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > qmax) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) < tol) {
            p = p1;
            q = q1;
            return true;
        }
        const double frac = y - a;
        if (frac < 1e-300) break;
        y = 1.0 / frac;
    }
    return false;
}
}  // namespace detail

inline ArithmeticVerdict is_arithmetic(const Ifs& ifs, double tol = 1e-12, std::int64_t qmax = 10000) {
    ArithmeticVerdict v;
    v.tolerance = tol;
    v.max_denominator = qmax;
    const double L0 = -std::log(ifs.maps.at(0).ratio);
    std::vector<std::int64_t> ps, qs;
    for (auto& m : ifs.maps) {
        std::int64_t p = 0, q = 1;
        if (!detail::small_rational(-std::log(m.ratio) / L0, qmax, tol, p, q)) return v;
        ps.push_back(p);
        qs.push_back(q);
    }
    std::int64_t Q = 1;
    for (auto q : qs) Q = std::lcm(Q, q);
    std::int64_t g = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) g = std::gcd(g, ps[i] * (Q / qs[i]));
    v.arithmetic = true;
    v.h = L0 / static_cast<double>(Q) * static_cast<double>(g);
    return v;
}

inline std::vector<Affine> affine_maps(const Ifs& ifs) {
    std::vector<Affine> out;
    for (auto& m : ifs.maps) out.emplace_back(m);
    return out;
}

inline Affine compose_affine(const Ifs& ifs, const Word& w) {
    Affine s;
    for (int letter : w) {
        if (letter < 1 || letter > static_cast<int>(ifs.size())) throw DomainError("word letter out of range");
        s = compose(s, Affine(ifs.map(letter)));
    }
    return s;
}

// A ball containing the attractor.
struct Ball {
    Vec2 center;
    double radius = 0;
};

inline Ball bounding_ball(const Ifs& ifs) {
    Vec2 c{};
    for (auto& m : ifs.maps) c += fixed_point(m);
    c = c / static_cast<double>(ifs.size());
    double rho = 0;
    for (auto& m : ifs.maps) rho = std::max(rho, distance(m.apply(c), c) / (1 - m.ratio));
    // one refinement sweep over a few levels
    std::size_t depth = 0, count = 1;
    while (count * ifs.size() <= 4096) {
        count *= ifs.size();
        ++depth;
    }
    double refined = 0;
    const std::vector<Affine> maps = affine_maps(ifs);
    auto rec = [&](auto& self, const Affine& s, std::size_t d) -> void {
        if (d == depth) {
            refined = std::max(refined, distance(s.apply(c), c) + s.ratio * rho);
            return;
        }
        for (auto& m : maps) self(self, compose(s, m), d + 1);
    };
    rec(rec, Affine{}, 0);
    return {c, std::min(rho, refined)};
}

// Seed point in F and a radius with F inside B(seed, radius).
struct Seed {
    Vec2 point;
    double radius = 0;
};

inline Seed attractor_seed(const Ifs& ifs) {
    const Ball b = bounding_ball(ifs);
    const Vec2 seed = fixed_point(ifs.maps.at(0));
    double r = distance(seed, b.center) + b.radius;
    double refined = 0;
    for (auto& m : ifs.maps)
        for (auto& m2 : ifs.maps) {
            const Similarity s = compose(m, m2);
            refined = std::max(refined, distance(s.apply(b.center), seed) + s.ratio * b.radius);
        }
    return {seed, std::min(r, refined)};
}

struct PointCloud {
    std::vector<Vec2> points;
    double hausdorff_error = 0;
    int depth = 0;
};

struct CloudOptions {
    std::size_t point_budget = 10'000'000;
    bool include_fixed_points = true;
};

inline PointCloud attractor_cloud(const Ifs& ifs, double target_error, const Word& root = {}, CloudOptions opt = {}) {
    if (!(target_error > 0)) throw DomainError("target_error must be positive");
    const Seed seed = attractor_seed(ifs);
    const Affine base = compose_affine(ifs, root);
    const std::vector<Affine> maps = affine_maps(ifs);
    const double base_r = base.ratio;
    int n = 0;
    double err = base_r * seed.radius;
    double count = 1;
    while (err > target_error) {
        err *= ifs.r_max();
        count *= static_cast<double>(ifs.size());
        ++n;
        if (count > static_cast<double>(opt.point_budget)) throw ResourceError("attractor cloud exceeds point budget");
    }
    PointCloud cloud;
    cloud.depth = n;
    cloud.hausdorff_error = err;
    cloud.points.reserve(static_cast<std::size_t>(count) + (opt.include_fixed_points ? ifs.size() : 0));
    auto rec = [&](auto& self, const Affine& s, int d) -> void {
        if (d == n) {
            cloud.points.push_back(s.apply(seed.point));
            return;
        }
        for (auto& m : maps) self(self, compose(s, m), d + 1);
    };
    rec(rec, base, 0);
    if (opt.include_fixed_points)
        for (auto& m : ifs.maps) cloud.points.push_back(base.apply(fixed_point(m)));
    return cloud;
}

// Ball and seed of an IFS, computed once and shared by cylinder-tree searches.
struct Frame {
    const Ifs* ifs = nullptr;
    Ball ball;
    Seed seed;
    std::vector<Affine> maps;

    explicit Frame(const Ifs& f) : ifs(&f), ball(bounding_ball(f)), seed(attractor_seed(f)), maps(affine_maps(f)) {}
};

// Visits leaves S_v(seed) of the cylinder tree under `root` whose balls come
// within `cap` of `box`, stopping where r_v * seed_radius <= leaf_error.
// The callback receives the point and the full word v.
template <class Fn>
void for_each_leaf(const Frame& fr, const Word& root, const Box& box, double cap, double leaf_error, Fn&& fn) {
    Word w = root;
    auto rec = [&](auto& self, const Affine& s) -> void {
        const Vec2 c = s.apply(fr.ball.center);
        if (box.distance(c) - s.ratio * fr.ball.radius > cap) return;
        if (s.ratio * fr.seed.radius <= leaf_error) {
            fn(s.apply(fr.seed.point), static_cast<const Word&>(w));
            return;
        }
        for (std::size_t i = 0; i < fr.maps.size(); ++i) {
            w.push_back(static_cast<int>(i) + 1);
            self(self, compose(s, fr.maps[i]));
            w.pop_back();
        }
    };
    rec(rec, compose_affine(*fr.ifs, root));
}

struct DistanceBounds {
    double lower = 0;
    double upper = 0;
};

// Certified bounds on dist(x, S_root F) by best-first descent until upper - lower <= tol.
inline DistanceBounds distance_bounds(const Frame& fr, Vec2 x, double tol, const Word& root = {}) {
    struct Item {
        double lower;
        Affine s;
        bool operator<(const Item& o) const { return lower > o.lower; }
    };
    std::priority_queue<Item> pq;
    const Affine s0 = compose_affine(*fr.ifs, root);
    double upper = distance(x, s0.apply(fr.seed.point));
    pq.push({std::max(0.0, distance(x, s0.apply(fr.ball.center)) - s0.ratio * fr.ball.radius), s0});
    int guard = 0;
    while (!pq.empty()) {
        Item it = pq.top();
        if (upper - it.lower <= tol || ++guard > 200000) return {it.lower, upper};
        pq.pop();
        for (auto& m : fr.maps) {
            const Affine s = compose(it.s, m);
            upper = std::min(upper, distance(x, s.apply(fr.seed.point)));
            const double lb = std::max(0.0, distance(x, s.apply(fr.ball.center)) - s.ratio * fr.ball.radius);
            if (lb < upper) pq.push({lb, s});
        }
    }
    return {upper, upper};
}

// Conjugates every map by g, so the attractor becomes g(F).
inline Ifs transformed(const Ifs& ifs, const Similarity& g) {
    Ifs out = ifs;
    const Similarity gi = g.inverse();
    for (auto& m : out.maps) m = compose(g, compose(m, gi));
    for (auto& p : out.open_set) p = g.apply(p);
    out.big_R = ifs.big_R * g.ratio;
    return out;
}

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline Ifs koch_preset() {
    const double r = 1.0 / std::sqrt(3.0);
    const Vec2 c{0.5, std::sqrt(3.0) / 6.0};
    Ifs f;
    f.name = "koch";
    f.maps = {Similarity{r, deg(30), true, {0, 0}}, Similarity{r, deg(-30), true, c}};
    f.open_set = {{0, 0}, {1, 0}, c};
    f.big_R = 3.0;
    return f;
}

inline Ifs uset_preset() {
    const double t = 1.0 / 3.0;
    auto cell = [&](int col, int row) { return Similarity{t, 0, false, {col * t, row * t}}; };
    Ifs f;
    f.name = "uset";
    f.maps = {cell(0, 2), cell(0, 1), cell(0, 0), Similarity{t, deg(-90), false, {t, t}}, cell(2, 0), cell(2, 1), cell(2, 2)};
    f.open_set = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    f.big_R = 3.0;
    return f;
}

inline Ifs cantor_square_preset(double p) {
    if (!(p > 0 && p < 0.5)) throw DomainError("cantor-square parameter p must lie in (0, 1/2)");
    Ifs f;
    f.name = "cantor-square";
    f.maps = {Similarity{p, 0, false, {0, 0}}, Similarity{p, 0, false, {1 - p, 0}}, Similarity{p, 0, false, {0, 1 - p}},
              Similarity{p, 0, false, {1 - p, 1 - p}}};
    f.open_set = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    f.big_R = 3.0;
    return f;
}

// The unit square as the attractor of four half-size copies.
inline Ifs square_preset() {
    Ifs f;
    f.name = "square";
    f.maps = {Similarity{0.5, 0, false, {0, 0}}, Similarity{0.5, 0, false, {0.5, 0}}, Similarity{0.5, 0, false, {0, 0.5}},
              Similarity{0.5, 0, false, {0.5, 0.5}}};
    f.open_set = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    f.big_R = 3.0;
    return f;
}

inline Ifs preset(const std::string& name, double p = 1.0 / 3.0) {
    if (name == "koch") return koch_preset();
    if (name == "uset") return uset_preset();
    if (name == "cantor-square") return cantor_square_preset(p);
    if (name == "square") return square_preset();
    throw ConfigError("unknown preset: " + name);
}

// Throws ConfigError when the system violates its structural invariants.
inline void validate(const Ifs& ifs) {
    if (ifs.size() < 2) throw ConfigError("an IFS needs at least two maps");
    for (auto& m : ifs.maps)
        if (!(m.ratio > 0 && m.ratio < 1)) throw ConfigError("map ratio must lie in (0,1)");
    if (!is_simple_polygon(ifs.open_set) || !(std::abs(signed_area(ifs.open_set)) > 0))
        throw ConfigError("open set must be a simple polygon with positive area");
    double diam = 0;
    std::vector<Vec2> pts;
    std::function<void(const Similarity&, int)> rec = [&](const Similarity& s, int d) {
        if (d == 0) {
            for (auto& m : ifs.maps) pts.push_back(s.apply(fixed_point(m)));
            return;
        }
        for (auto& m : ifs.maps) rec(compose(s, m), d - 1);
    };
    rec(Similarity::identity(), ifs.size() > 4 ? 2 : 3);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, distance(pts[i], pts[j]));
    if (!(ifs.big_R > std::sqrt(2.0) * diam)) throw ConfigError("R must exceed sqrt(2) times the attractor diameter");
}

}  // namespace sscurv
