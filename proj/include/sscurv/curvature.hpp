// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ifs.hpp"
#include "tiled.hpp"
#include "words.hpp"

namespace sscurv {

struct CurvatureRecord {
    double eps = 0;
    long c0 = 0;       // Euler characteristic
    double c1 = 0;     // half boundary length
    double c2 = 0;     // area
    double c0_var = 0;
    bool near_critical = false;
    double h = 0;
    double target_error = 0;
};

struct CurvatureOptions {
    double h_ratio = 1.0 / 50;
    double critical_rel = 1e-3;  // chi compared at eps (1 +- critical_rel)
    EngineOptions engine{};
};

// Signed totals C_0, C_1, C_2 with the near-critical flag.
struct Totals {
    std::array<double, 3> c{0, 0, 0};
    bool near_critical = false;

    Totals& operator+=(const Totals& o) {
        for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(k)] += o.c[static_cast<std::size_t>(k)];
        near_critical |= o.near_critical;
        return *this;
    }
    Totals scaled(const std::array<double, 3>& f) const {
        Totals t = *this;
        for (std::size_t k = 0; k < 3; ++k) t.c[k] *= f[k];
        return t;
    }
};

namespace detail {
inline std::vector<double> critical_triple(double eps, double rel) { return {eps, eps * (1 - rel), eps * (1 + rel)}; }

inline Totals totals_of(const std::vector<LocalMeasure>& ms) {
    Totals t;
    t.c = {static_cast<double>(ms[0].chi), ms[0].length / 2, ms[0].area};
    t.near_critical = ms[1].chi != ms[0].chi || ms[2].chi != ms[0].chi;
    return t;
}
}  // namespace detail

// Direct raster totals of F_eps.
inline CurvatureRecord total_curvatures(const Ifs& ifs, double eps, const CurvatureOptions& opt = {}) {
    if (!(eps > 0 && eps <= ifs.big_R)) throw DomainError("eps must lie in (0, R]");
    const double h = opt.h_ratio * eps;
    const auto eps_list = detail::critical_triple(eps, opt.critical_rel);
    const auto ms = local_measure(ifs, default_window(ifs, eps_list[2], h), h, eps_list, FieldSpec{}, nullptr, opt.engine);
    CurvatureRecord r;
    r.eps = eps;
    r.c0 = ms[0].chi;
    r.c1 = ms[0].length / 2;
    r.c2 = ms[0].area;
    r.c0_var = ms[0].variation;
    r.near_critical = ms[1].chi != ms[0].chi || ms[2].chi != ms[0].chi;
    r.h = h;
    r.target_error = ms[0].cloud_error;
    return r;
}

// Totals of the parallel set of a union of cylinders given by groups of words
// (intersection over groups when several are given).
inline Totals cylinder_totals(const Ifs& ifs, const FieldSpec& field, double eps, const CurvatureOptions& opt = {}) {
    const double h = opt.h_ratio * eps;
    const auto eps_list = detail::critical_triple(eps, opt.critical_rel);
    return detail::totals_of(local_measure(ifs, default_window(ifs, eps_list[2], h), h, eps_list, field, nullptr, opt.engine));
}

// Subsets (size >= 2) of first-level maps whose eps-parallel cylinders may all meet pairwise.
inline std::vector<std::vector<int>> overlapping_subsets(const Ifs& ifs, double eps) {
    const Frame fr(ifs);
    const int n = static_cast<int>(ifs.size());
    std::vector<std::vector<bool>> close(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
    const double thr = 2 * eps * (1 + 2e-3);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const bool c = cylinders_close(fr, Word{i + 1}, Word{j + 1}, thr, eps * 1e-3);
            close[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = close[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = c;
        }
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int start) -> void {
        if (cur.size() >= 2) out.push_back(cur);
        for (int k = start; k < n; ++k) {
            bool ok = true;
            for (int m : cur) ok &= close[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(k)];
            if (!ok) continue;
            cur.push_back(k + 1);
            self(self, k + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

// Evaluates C_k(F_eps) and R_k(eps). Below r_min the totals follow the renewal
// identity C(eps) = sum_i r_i^k C(eps / r_i) + R(eps), with R from inclusion-exclusion
// over the overlapping first-level cylinders; above r_min they are measured directly.
class CurvatureEngine {
public:
    explicit CurvatureEngine(Ifs ifs, CurvatureOptions opt = {}) : ifs_(std::move(ifs)), opt_(opt) {}

    const Ifs& ifs() const { return ifs_; }
    const CurvatureOptions& options() const { return opt_; }

    // Direct raster measurement (memoized).
    const CurvatureRecord& direct(double eps) {
        const long long key = key_of(eps);
        auto it = direct_.find(key);
        if (it != direct_.end()) return it->second;
        return direct_.emplace(key, total_curvatures(ifs_, eps, opt_)).first->second;
    }

    Totals totals(double eps) {
        const long long key = key_of(eps);
        if (auto it = c_memo_.find(key); it != c_memo_.end()) return it->second;
        Totals t;
        if (eps > ifs_.r_min()) {
            const CurvatureRecord& r = direct(eps);
            t.c = {static_cast<double>(r.c0), r.c1, r.c2};
            t.near_critical = r.near_critical;
        } else {
            t = overlap(eps);
            for (auto& m : ifs_.maps) t += totals(eps / m.ratio).scaled({1.0, m.ratio, m.ratio * m.ratio});
        }
        c_memo_.emplace(key, t);
        return t;
    }

    // R_k(eps) for k = 0, 1, 2.
    Totals rescaled(double eps) {
        if (eps <= ifs_.r_min()) return overlap(eps);
        Totals t = totals(eps);
        for (auto& m : ifs_.maps)
            if (eps <= m.ratio) {
                Totals sub = totals(eps / m.ratio).scaled({-1.0, -m.ratio, -m.ratio * m.ratio});
                t += sub;
            }
        return t;
    }

    // Inclusion-exclusion defect sum_{|I|>=2} (-1)^{|I|+1} C(cap_{i in I} (S_i F)_eps).
    Totals overlap(double eps) {
        const long long key = key_of(eps);
        if (auto it = r_memo_.find(key); it != r_memo_.end()) return it->second;
        Totals t;
        for (auto& subset : overlapping_subsets(ifs_, eps)) {
            FieldSpec fs;
            fs.groups.clear();
            for (int i : subset) fs.groups.push_back({Word{i}});
            const double sign = subset.size() % 2 == 0 ? -1.0 : 1.0;
            t += cylinder_totals(ifs_, fs, eps, opt_).scaled({sign, sign, sign});
        }
        r_memo_.emplace(key, t);
        return t;
    }

    std::size_t direct_evaluations() const { return direct_.size(); }
    std::size_t overlap_evaluations() const { return r_memo_.size(); }

private:
    static long long key_of(double eps) { return std::llround(std::log(eps) * 1e9); }

    Ifs ifs_;
    CurvatureOptions opt_;
    std::map<long long, CurvatureRecord> direct_;
    std::map<long long, Totals> c_memo_, r_memo_;
};

inline double eta(const Ifs& ifs) {
    const double D = similarity_dimension(ifs);
    double e = 0;
    for (auto& m : ifs.maps) e -= std::pow(m.ratio, D) * std::log(m.ratio);
    return e;
}

// Geometric ladder from hi down to lo with at least `per_decade` nodes per decade.
// In the lattice case the step divides the lattice generator so that eps / r_i
// lands on the ladder again.
inline std::vector<double> log_ladder(const Ifs& ifs, double lo, double hi, double per_decade) {
    if (!(lo > 0 && lo < hi)) throw DomainError("ladder needs 0 < lo < hi");
    double step = std::log(10.0) / per_decade;
    const ArithmeticVerdict av = is_arithmetic(ifs);
    if (av.arithmetic) step = av.h / std::ceil(av.h / step);
    std::vector<double> out;
    const double span = std::log(hi / lo);
    const auto n = static_cast<long>(std::floor(span / step + 1e-9));
    for (long j = 0; j <= n; ++j) out.push_back(hi * std::exp(-static_cast<double>(j) * step));
    if (out.back() > lo * (1 + 1e-12)) out.push_back(lo);
    return out;
}

struct AverageEstimate {
    double value = 0;
    double delta = 0;
    std::size_t nodes = 0;
    std::size_t skipped = 0;
    bool warn_near_critical = false;
};

// (1/|ln delta|) int_delta^1 eps^{D-k} C_k(F_eps) deps/eps, trapezoid in ln eps
// over non-near-critical nodes.
inline AverageEstimate fractal_avg(CurvatureEngine& eng, int k, double delta, double per_decade = 40) {
    if (!(delta > 0 && delta < 1)) throw DomainError("delta must lie in (0, 1)");
    if (k < 0 || k > 2) throw DomainError("k must be 0, 1 or 2");
    const double D = similarity_dimension(eng.ifs());
    const std::vector<double> lad = log_ladder(eng.ifs(), delta, 1.0, per_decade);
    std::vector<double> x, y;
    AverageEstimate est;
    est.delta = delta;
    est.nodes = lad.size();
    for (double e : lad) {
        const Totals t = eng.totals(e);
        if (t.near_critical) {
            ++est.skipped;
            continue;
        }
        x.push_back(std::log(e));
        y.push_back(std::pow(e, D - k) * t.c[static_cast<std::size_t>(k)]);
    }
    if (x.size() < 2) throw DomainError("too few regular nodes for the average");
    // extend the end nodes flat to the interval ends so skipped end nodes do not shorten it
    double integral = 0;
    const double a = std::log(delta), b = 0.0;
    integral += y.front() * (b - x.front()) + y.back() * (x.back() - a);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) integral += 0.5 * (y[i] + y[i + 1]) * (x[i] - x[i + 1]);
    est.value = integral / (b - a);
    est.warn_near_critical = static_cast<double>(est.skipped) > 0.1 * static_cast<double>(est.nodes);
    return est;
}

// Removes the 1/|ln delta| bias of two averages: if int_delta^1 f = L |ln delta| + C,
// the averages at two deltas determine L.
inline double extrapolated_average(double v1, double delta1, double v2, double delta2) {
    const double l1 = -std::log(delta1), l2 = -std::log(delta2);
    return (v2 * l2 - v1 * l1) / (l2 - l1);
}

struct FractalEstimate {
    int k = 0;
    double D = 0;
    double eta = 0;
    double value_avg = 0;
    double value_integral = 0;
    double value_avg_extrapolated = 0;  // from the averages at 100 delta and delta
    double delta = 0;
    double eps_min = 0;
    double tail_bound = 0;
    bool converged = true;
    bool warn_near_critical = false;
    std::optional<std::pair<double, double>> esslim_band;
};

// (1/eta) int_0^1 r^{D-k-1} R_k(r) dr: trapezoid in ln r on [eps_min, 1], with the
// map ratios as breakpoints, plus a geometric tail bound for (0, eps_min).
inline double fractal_integral_value(CurvatureEngine& eng, int k, double eps_min, double per_decade, double& tail_bound) {
    const Ifs& f = eng.ifs();
    const double D = similarity_dimension(f);
    std::vector<double> breaks{1.0};
    for (auto& m : f.maps)
        if (m.ratio > eps_min && m.ratio < 1) breaks.push_back(m.ratio);
    breaks.push_back(eps_min);
    std::sort(breaks.begin(), breaks.end(), std::greater<>());
    breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }), breaks.end());
    auto g = [&](double r) { return std::pow(r, D - k) * eng.rescaled(r).c[static_cast<std::size_t>(k)]; };
    double integral = 0;
    std::vector<std::pair<double, double>> samples;  // (r, |g|) for the tail
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double hi = breaks[p], lo = breaks[p + 1];
        std::vector<double> lad = log_ladder(f, lo, hi, per_decade);
        // one-sided values: stay inside the open piece (lo, hi)
        lad.front() = hi * (1 - 1e-9);
        lad.back() = lo * (1 + 1e-9);
        double prev_x = 0, prev_y = 0;
        for (std::size_t i = 0; i < lad.size(); ++i) {
            const double x = std::log(lad[i]), y = g(lad[i]);
            samples.emplace_back(lad[i], std::abs(y));
            if (i > 0) integral += 0.5 * (y + prev_y) * (prev_x - x);
            prev_x = x;
            prev_y = y;
        }
    }
    // tail: fit |g| ~ a r^s over the last two decades
    double m1 = 0, m2 = 0;
    std::size_t n1 = 0, n2 = 0;
    for (auto [r, v] : samples) {
        if (r <= 10 * eps_min) {
            m1 += v;
            ++n1;
        } else if (r <= 100 * eps_min) {
            m2 += v;
            ++n2;
        }
    }
    m1 = n1 ? m1 / static_cast<double>(n1) : 0;
    m2 = n2 ? m2 / static_cast<double>(n2) : 0;
    if (m1 == 0)
        tail_bound = 0;
    else if (m2 > m1)
        tail_bound = m1 / (std::log(m2 / m1) / std::log(10.0));
    else
        tail_bound = std::numeric_limits<double>::infinity();
    return integral / eta(f);
}

inline FractalEstimate fractal_integral(CurvatureEngine& eng, int k, double eps_min = 1e-4, double delta = 1e-4, double per_decade = 40) {
    if (k < 0 || k > 2) throw DomainError("k must be 0, 1 or 2");
    FractalEstimate fe;
    fe.k = k;
    fe.D = similarity_dimension(eng.ifs());
    fe.eta = eta(eng.ifs());
    fe.eps_min = eps_min;
    fe.delta = delta;
    double tail = 0;
    fe.value_integral = fractal_integral_value(eng, k, eps_min, per_decade, tail);
    fe.tail_bound = tail / fe.eta;
    fe.converged = std::abs(fe.tail_bound) <= 0.1 * std::abs(fe.value_integral) || fe.tail_bound == 0;
    const AverageEstimate av = fractal_avg(eng, k, delta, per_decade);
    fe.value_avg = av.value;
    if (delta < 0.01) {
        const AverageEstimate coarse = fractal_avg(eng, k, 100 * delta, per_decade);
        fe.value_avg_extrapolated = extrapolated_average(coarse.value, 100 * delta, av.value, delta);
    } else {
        fe.value_avg_extrapolated = av.value;
    }
    fe.warn_near_critical = av.warn_near_critical;
    return fe;
}

// (min, max) of eps^{D-k} C_k(F_eps) over the last two decades above eps_min, or
// nothing for arithmetic systems.
inline std::optional<std::pair<double, double>> esslim_probe(CurvatureEngine& eng, int k, double eps_min = 1e-4, double per_decade = 40) {
    if (is_arithmetic(eng.ifs()).arithmetic) return std::nullopt;
    const double D = similarity_dimension(eng.ifs());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double e : log_ladder(eng.ifs(), eps_min, 100 * eps_min, per_decade)) {
        const Totals t = eng.totals(e);
        if (t.near_critical) continue;
        const double v = std::pow(e, D - k) * t.c[static_cast<std::size_t>(k)];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo > hi) return std::nullopt;
    return std::pair{lo, hi};
}

inline std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<CurvatureRecord>& rows) {
    os << "eps,c0,c1,c2,c0_var,near_critical,h,target_error\n";
    for (auto& r : rows)
        os << format_number(r.eps) << ',' << r.c0 << ',' << format_number(r.c1) << ',' << format_number(r.c2) << ','
           << format_number(r.c0_var) << ',' << (r.near_critical ? 1 : 0) << ',' << format_number(r.h) << ','
           << format_number(r.target_error) << '\n';
}

}  // namespace sscurv
