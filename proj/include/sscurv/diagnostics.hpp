// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <iterator>
#include <limits>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "curvature.hpp"
#include "errors.hpp"
#include "ifs.hpp"
#include "tiled.hpp"
#include "words.hpp"

// Pairwise cylinder-intersection scans over eps ladders and their growth verdicts.
namespace sscurv {

struct ScanPoint {
    double eps = 0;
    double value = 0;  // localized C_0 variation
    bool near_critical = false;
    bool dropped = false;  // resolution not reachable within the node budget
    double signed_value = 0;
    long clusters = 0;
    std::size_t pairs = 0;  // neighbour pairs of the pairwise scan
    std::size_t types = 0;  // pairs actually measured
    double h = 0;
    double gb_residual = 0;
};

struct Thresholds {
    double slope = -0.15;
    double r2 = 0.7;
    std::size_t min_points = 10;
    double min_decades = 1.5;
    double value_floor = 0.01;  // raster residue on straight edges stays far below this
};

enum class VerdictKind { bounded, unbounded, insufficient };

inline const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::bounded: return "bounded";
        case VerdictKind::unbounded: return "unbounded";
        default: return "insufficient-data";
    }
}

struct Verdict {
    VerdictKind kind = VerdictKind::insufficient;
    double bound_estimate = 0;
    double exponent = 0;
    double slope = 0;
    double r2 = 0;
    std::size_t used = 0;
    double decades = 0;
    Thresholds thresholds{};
};

enum class ScanKind { scbc_pair, cbc_pairwise };

struct ScanSeries {
    ScanKind kind = ScanKind::scbc_pair;
    int i = 0, j = 0;
    double lambda = 0;
    std::vector<ScanPoint> points;  // eps descending
    Verdict verdict;

    std::string label() const {
        if (kind == ScanKind::scbc_pair) return "scbc_pair(" + std::to_string(i) + "," + std::to_string(j) + ")";
        return "cbc_pairwise(" + format_number(lambda) + ")";
    }
};

struct ScanOptions {
    double h_ratio = 1.0 / 50;
    double slack_h = 2.0;
    double critical_rel = 1e-3;
    double critical_jump = 0.1;  // flag when the signed region value moves more than this
    bool exhaustive = false;
    EngineOptions engine{};
    Thresholds thresholds{};
};

// Geometric ladder from hi (excluded when `open_top`) down to lo, descending.
inline std::vector<double> scan_ladder(double lo, double hi, double per_decade = 12, bool open_top = true) {
    if (!(lo > 0 && lo < hi)) throw DomainError("ladder needs 0 < lo < hi");
    if (!(per_decade > 0)) throw DomainError("points per decade must be positive");
    const double step = std::log(10.0) / per_decade;
    std::vector<double> out;
    for (long k = open_top ? 1 : 0;; ++k) {
        const double e = hi * std::exp(-static_cast<double>(k) * step);
        if (e < lo * (1 - 1e-12)) break;
        out.push_back(e);
    }
    return out;
}

// Least-squares fit of ln value on ln eps over the regular points above the floor.
inline Verdict growth_classifier(const std::vector<ScanPoint>& pts, const Thresholds& th = {}) {
    Verdict v;
    v.thresholds = th;
    double lo = std::numeric_limits<double>::infinity(), hi = 0, vmax = 0;
    std::vector<double> x, y;
    for (auto& p : pts) {
        if (p.near_critical || p.dropped || !std::isfinite(p.value)) continue;
        ++v.used;
        lo = std::min(lo, p.eps);
        hi = std::max(hi, p.eps);
        vmax = std::max(vmax, p.value);
        if (p.value > th.value_floor) {
            x.push_back(std::log(p.eps));
            y.push_back(std::log(p.value));
        }
    }
    v.decades = v.used ? std::log10(hi / lo) : 0;
    v.bound_estimate = vmax;
    if (v.used < th.min_points || v.decades < th.min_decades) return v;
    v.kind = VerdictKind::bounded;
    if (x.size() < 3) return v;
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx <= 0) return v;
    v.slope = sxy / sxx;
    v.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 0;
    if (v.slope <= th.slope && v.r2 >= th.r2) {
        v.kind = VerdictKind::unbounded;
        v.exponent = -v.slope;
    }
    return v;
}

inline Verdict growth_classifier(const std::vector<std::pair<double, double>>& series, const Thresholds& th = {}) {
    std::vector<ScanPoint> pts;
    for (auto [e, val] : series) {
        ScanPoint p;
        p.eps = e;
        p.value = val;
        pts.push_back(p);
    }
    return growth_classifier(pts, th);
}

// C_0 variation of F_eps on the vertices within eps of both cylinders.
inline ScanPoint region_point(const Ifs& ifs, const Word& a, const Word& b, double eps, const ScanOptions& opt) {
    const double h = opt.h_ratio * eps;
    RegionSpec rs;
    rs.words = {a, b};
    rs.slack_h = opt.slack_h;
    const std::vector<double> el{eps, eps * (1 - opt.critical_rel), eps * (1 + opt.critical_rel)};
    const auto ms = local_measure(ifs, default_window(ifs, el[2], h), h, el, FieldSpec{}, &rs, opt.engine);
    ScanPoint p;
    p.eps = eps;
    p.h = h;
    p.value = ms[0].region_variation;
    p.signed_value = ms[0].region_signed;
    p.clusters = ms[0].region_clusters;
    p.gb_residual = ms[0].gb_residual;
    p.near_critical = std::abs(ms[1].region_signed - ms[0].region_signed) > opt.critical_jump ||
                      std::abs(ms[2].region_signed - ms[0].region_signed) > opt.critical_jump;
    return p;
}

inline ScanSeries scbc_scan(const Ifs& ifs, int i, int j, const std::vector<double>& ladder, const ScanOptions& opt = {}) {
    if (i == j) throw DomainError("scbc scan needs two different maps");
    if (i < 1 || j < 1 || i > static_cast<int>(ifs.size()) || j > static_cast<int>(ifs.size())) throw DomainError("map index out of range");
    ScanSeries s;
    s.kind = ScanKind::scbc_pair;
    s.i = i;
    s.j = j;
    std::vector<double> lad = ladder;
    std::sort(lad.begin(), lad.end(), std::greater<>());
    for (double e : lad) {
        if (!(e > 0 && e < ifs.big_R)) throw DomainError("scan eps must lie in (0, R)");
        try {
            s.points.push_back(region_point(ifs, Word{i}, Word{j}, e, opt));
        } catch (const ResourceError&) {
            ScanPoint p;
            p.eps = e;
            p.dropped = true;
            s.points.push_back(p);
        }
    }
    s.verdict = growth_classifier(s.points, opt.thresholds);
    return s;
}

namespace detail {

// S_a^{-1} S_b rounded, for grouping congruent configurations.
inline std::array<long long, 6> relative_key(const Affine& A, const Affine& B) {
    const double det = A.a * A.d - A.b * A.c;
    const double ia = A.d / det, ib = -A.b / det, ic = -A.c / det, id = A.a / det;
    const Vec2 dt = B.t - A.t;
    const double m[6] = {ia * B.a + ib * B.c, ia * B.b + ib * B.d, ic * B.a + id * B.c, ic * B.b + id * B.d,
                         ia * dt.x + ib * dt.y, ic * dt.x + id * dt.y};
    std::array<long long, 6> k{};
    for (std::size_t q = 0; q < 6; ++q) k[q] = std::llround(m[q] * 1e7);
    return k;
}

}  // namespace detail

// Largest localized variation over neighbouring pairs of sigma(lambda eps) for
// eps < R / lambda; total variation of F_eps above. Typed mode measures one pair per
// congruence class of (pair, cylinders near both); exhaustive mode measures every
// pair in one pass over F_eps.
inline ScanPoint cbc_point(const Ifs& ifs, double lambda, double eps, const ScanOptions& opt) {
    ScanPoint best;
    best.eps = eps;
    best.h = opt.h_ratio * eps;
    if (eps >= ifs.big_R / lambda) {
        CurvatureOptions co;
        co.h_ratio = opt.h_ratio;
        co.critical_rel = opt.critical_rel;
        co.engine = opt.engine;
        const CurvatureRecord r = total_curvatures(ifs, eps, co);
        best.value = r.c0_var;
        best.signed_value = static_cast<double>(r.c0);
        best.near_critical = r.near_critical;
        return best;
    }
    const double level = lambda * eps;
    const WordFamily fam = sigma(ifs, level);
    const auto pairs = neighbor_pairs(ifs, fam, eps);
    best.pairs = pairs.size();
    if (pairs.empty()) return best;
    const double h = best.h;
    const std::vector<double> el{eps, eps * (1 - opt.critical_rel), eps * (1 + opt.critical_rel)};

    if (opt.exhaustive) {
        PairRegions pr;
        pr.level = level;
        pr.words = fam.words;
        pr.pairs = pairs;
        pr.slack_h = opt.slack_h;
        const auto ms = local_measure(ifs, default_window(ifs, el[2], h), h, el, FieldSpec{}, nullptr, opt.engine, &pr);
        const auto& v = ms[0].pair_variation;
        const std::size_t q = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
        best.value = v[q];
        best.signed_value = ms[0].pair_signed[q];
        best.gb_residual = ms[0].gb_residual;
        best.types = pairs.size();
        best.near_critical = std::abs(ms[1].pair_signed[q] - best.signed_value) > opt.critical_jump ||
                             std::abs(ms[2].pair_signed[q] - best.signed_value) > opt.critical_jump;
        return best;
    }

    // everything that can shape F_eps within eps + slack of both cylinders
    const auto wide = neighbor_pairs(ifs, fam, eps, 0.1);
    std::vector<std::vector<std::size_t>> adj(fam.words.size());
    for (auto [a, b] : wide) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
    std::vector<Affine> aff;
    for (auto& w : fam.words) aff.push_back(compose_affine(ifs, w));
    using Key = std::pair<long long, std::vector<std::array<long long, 6>>>;
    auto key_from = [&](std::size_t u, std::size_t v) {
        std::vector<std::size_t> common;
        std::set_intersection(adj[u].begin(), adj[u].end(), adj[v].begin(), adj[v].end(), std::back_inserter(common));
        Key key;
        key.first = std::llround(std::log(aff[u].ratio) * 1e7);
        key.second.push_back(detail::relative_key(aff[u], aff[v]));
        std::vector<std::array<long long, 6>> rest;
        for (std::size_t c : common) rest.push_back(detail::relative_key(aff[u], aff[c]));
        std::sort(rest.begin(), rest.end());
        key.second.insert(key.second.end(), rest.begin(), rest.end());
        return key;
    };
    std::map<Key, std::pair<std::size_t, std::size_t>> types;
    for (auto [a, b] : pairs) types.emplace(std::min(key_from(a, b), key_from(b, a)), std::pair{a, b});
    best.types = types.size();
    bool first = true;
    for (auto& [key, rep] : types) {
        const ScanPoint p = region_point(ifs, fam.words[rep.first], fam.words[rep.second], eps, opt);
        if (first || p.value > best.value) {
            const std::size_t np = best.pairs, nt = best.types;
            best = p;
            best.pairs = np;
            best.types = nt;
            first = false;
        }
    }
    return best;
}

inline ScanSeries cbc_pairwise_scan(const Ifs& ifs, double lambda, const std::vector<double>& ladder, const ScanOptions& opt = {}) {
    ScanSeries s;
    s.kind = ScanKind::cbc_pairwise;
    s.lambda = lambda;
    std::vector<double> lad = ladder;
    std::sort(lad.begin(), lad.end(), std::greater<>());
    for (double e : lad) {
        if (!(e > 0 && e < ifs.big_R)) throw DomainError("scan eps must lie in (0, R)");
        try {
            s.points.push_back(cbc_point(ifs, lambda, e, opt));
        } catch (const ResourceError&) {
            ScanPoint p;
            p.eps = e;
            p.dropped = true;
            s.points.push_back(p);
        }
    }
    s.verdict = growth_classifier(s.points, opt.thresholds);
    return s;
}

inline void write_scan_csv(std::ostream& os, const ScanSeries& s) {
    os << "eps,value,near_critical,dropped,signed,clusters,pairs,types,h\n";
    for (auto& p : s.points)
        os << format_number(p.eps) << ',' << format_number(p.value) << ',' << (p.near_critical ? 1 : 0) << ',' << (p.dropped ? 1 : 0)
           << ',' << format_number(p.signed_value) << ',' << p.clusters << ',' << p.pairs << ',' << p.types << ',' << format_number(p.h)
           << '\n';
}

}  // namespace sscurv
