// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sscurv/diagnostics.hpp"

using namespace sscurv;

namespace {
std::vector<std::pair<double, double>> series(double lo, double hi, int n, double (*f)(double)) {
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < n; ++k) {
        const double e = hi * std::pow(lo / hi, static_cast<double>(k) / (n - 1));
        out.emplace_back(e, f(e));
    }
    return out;
}
}  // namespace

TEST(Ladder, GeometricAndOpen) {
    const auto l = scan_ladder(1e-3, 1.0, 12);
    ASSERT_EQ(l.size(), 36u);
    EXPECT_LT(l.front(), 1.0);
    EXPECT_NEAR(l.back(), 1e-3, 1e-15);
    EXPECT_NEAR(l[0] / l[1], std::pow(10.0, 1.0 / 12), 1e-12);
    EXPECT_EQ(scan_ladder(1e-3, 1.0, 12, false).size(), 37u);
    EXPECT_THROW(scan_ladder(1.0, 0.5), DomainError);
}

TEST(Classifier, ConstantIsBounded) {
    const Verdict v = growth_classifier(series(1e-3, 1, 30, [](double) { return 2.0; }));
    EXPECT_EQ(v.kind, VerdictKind::bounded);
    EXPECT_DOUBLE_EQ(v.bound_estimate, 2.0);
}

TEST(Classifier, ZerosAreBoundedByZero) {
    const Verdict v = growth_classifier(series(1e-3, 1, 30, [](double) { return 0.0; }));
    EXPECT_EQ(v.kind, VerdictKind::bounded);
    EXPECT_DOUBLE_EQ(v.bound_estimate, 0.0);
}

TEST(Classifier, PowerLawIsUnbounded) {
    const Verdict v = growth_classifier(series(1e-4, 1, 40, [](double e) { return 0.3 * std::pow(e, -0.63); }));
    EXPECT_EQ(v.kind, VerdictKind::unbounded);
    EXPECT_NEAR(v.exponent, 0.63, 1e-9);
    EXPECT_NEAR(v.r2, 1.0, 1e-12);
}

TEST(Classifier, StaircaseIsUnbounded) {
    // doubling every factor of three, like the U-set corner pairs
    const Verdict v = growth_classifier(series(1e-4, 0.05, 40, [](double e) {
        const double m = std::floor(std::log(0.5 / e) / std::log(3.0)) - 1;
        return 0.5 * (std::pow(2.0, m) - 1);
    }));
    EXPECT_EQ(v.kind, VerdictKind::unbounded);
    EXPECT_GT(v.exponent, 0.5);
}

TEST(Classifier, SlowDriftStaysBounded) {
    const Verdict v = growth_classifier(series(1e-4, 1, 40, [](double e) { return 1 + 0.01 * std::log(1 / e); }));
    EXPECT_EQ(v.kind, VerdictKind::bounded);
}

TEST(Classifier, ResidueBelowFloorIsZero) {
    // a staircase preceded by raster residue on a zero stretch
    auto pts = series(1e-3, 1, 40, [](double e) {
        if (e > 0.05) return 1e-4 * (1 + std::sin(40 * e));
        const double m = std::floor(std::log(0.5 / e) / std::log(3.0)) - 1;
        return 0.5 * (std::pow(2.0, m) - 1);
    });
    const Verdict v = growth_classifier(pts);
    EXPECT_EQ(v.kind, VerdictKind::unbounded);
    std::vector<std::pair<double, double>> steps;
    for (auto& p : pts)
        if (p.first <= 0.05) steps.push_back(p);
    Thresholds loose;
    loose.min_decades = 1;
    EXPECT_NEAR(v.exponent, growth_classifier(steps, loose).exponent, 1e-12);
    Thresholds raw;
    raw.value_floor = 0;
    EXPECT_GT(std::abs(growth_classifier(pts, raw).slope - v.slope), 0.1);
}

TEST(Classifier, InsufficientData) {
    EXPECT_EQ(growth_classifier(series(1e-3, 1, 9, [](double) { return 1.0; })).kind, VerdictKind::insufficient);
    EXPECT_EQ(growth_classifier(series(0.1, 1, 30, [](double) { return 1.0; })).kind, VerdictKind::insufficient);
}

TEST(Classifier, SkipsFlaggedPoints) {
    std::vector<ScanPoint> pts;
    for (auto [e, v] : series(1e-3, 1, 20, [](double) { return 1.0; })) {
        ScanPoint p;
        p.eps = e;
        p.value = v;
        pts.push_back(p);
    }
    pts[3].value = 1e6;
    pts[3].near_critical = true;
    pts[5].dropped = true;
    const Verdict v = growth_classifier(pts);
    EXPECT_EQ(v.used, 18u);
    EXPECT_DOUBLE_EQ(v.bound_estimate, 1.0);
}

TEST(Scan, USetPairHasOneCornerPairAtFirstBand) {
    const Ifs f = uset_preset();
    const ScanSeries s = scbc_scan(f, 1, 2, {1.0 / 45});
    ASSERT_EQ(s.points.size(), 1u);
    EXPECT_NEAR(s.points[0].value, 0.5, 0.03);
    EXPECT_NEAR(s.points[0].signed_value, -0.5, 0.03);
    EXPECT_EQ(s.points[0].clusters, 2);
    EXPECT_FALSE(s.points[0].near_critical);
}

TEST(Scan, DisjointPairIsZero) {
    const Ifs f = uset_preset();
    const ScanSeries s = scbc_scan(f, 1, 7, {0.1});
    EXPECT_DOUBLE_EQ(s.points[0].value, 0.0);
}

TEST(Scan, RejectsBadInput) {
    const Ifs f = uset_preset();
    EXPECT_THROW(scbc_scan(f, 1, 1, {0.1}), DomainError);
    EXPECT_THROW(scbc_scan(f, 1, 9, {0.1}), DomainError);
    EXPECT_THROW(scbc_scan(f, 1, 2, {3.0}), DomainError);
}

TEST(Pairwise, TypedMatchesExhaustive) {
    const Ifs f = uset_preset();
    ScanOptions opt;
    const ScanPoint typed = cbc_point(f, 18.0, 0.03, opt);
    opt.exhaustive = true;
    const ScanPoint all = cbc_point(f, 18.0, 0.03, opt);
    EXPECT_EQ(typed.pairs, all.pairs);
    EXPECT_LT(typed.types, typed.pairs);
    EXPECT_NEAR(typed.value, all.value, 0.02 * all.value + 1e-9);
    EXPECT_GT(all.value, 0.2);
}

TEST(Pairwise, TotalAboveThreshold) {
    const Ifs f = square_preset();
    const ScanPoint p = cbc_point(f, 2.0, 2.0, ScanOptions{});
    EXPECT_EQ(p.pairs, 0u);
    EXPECT_NEAR(p.value, 1.0, 1e-2);
}

TEST(Csv, Header) {
    ScanSeries s;
    s.points.push_back(ScanPoint{});
    std::ostringstream os;
    write_scan_csv(os, s);
    EXPECT_EQ(os.str().substr(0, 23), "eps,value,near_critical");
}
