// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sscurv/curvature.hpp"

using namespace sscurv;

namespace {
constexpr double kPi = std::numbers::pi;

// Two maps with the same fixed point: the attractor is the origin.
Ifs point_ifs() {
    Ifs f;
    f.name = "point";
    f.maps = {Similarity{0.5, 0, false, {0, 0}}, Similarity{0.5, 1.0, false, {0, 0}}};
    f.open_set = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    return f;
}
}  // namespace

TEST(TotalCurvatures, SinglePointIsADisk) {
    for (double eps : {0.2, 1.0}) {
        const CurvatureRecord r = total_curvatures(point_ifs(), eps);
        EXPECT_EQ(r.c0, 1);
        EXPECT_NEAR(r.c2 / (kPi * eps * eps), 1.0, 0.01);
        EXPECT_NEAR(r.c1 / (kPi * eps), 1.0, 0.01);
        EXPECT_NEAR(r.c0_var, 1.0, 1e-3);
        EXPECT_NEAR(r.h, eps / 50, 1e-15);
    }
}

TEST(TotalCurvatures, SquareSteiner) {
    for (double eps : {0.1, 0.3, 1.0}) {
        const CurvatureRecord r = total_curvatures(square_preset(), eps);
        EXPECT_NEAR(r.c2 / (1 + 4 * eps + kPi * eps * eps), 1.0, 0.01);
        EXPECT_NEAR(r.c1 / (2 + kPi * eps), 1.0, 0.01);
        EXPECT_EQ(r.c0, 1);
    }
}

TEST(TotalCurvatures, KochLargeEpsIsSimplyConnected) {
    const CurvatureRecord r = total_curvatures(koch_preset(), 1.5);
    EXPECT_EQ(r.c0, 1);
    EXPECT_FALSE(r.near_critical);
    EXPECT_GE(r.c0_var, std::abs(static_cast<double>(r.c0)) - 1e-9);
}

TEST(TotalCurvatures, CantorFourClustersAndNearCriticalFlag) {
    const Ifs c = cantor_square_preset(1.0 / 3);
    EXPECT_EQ(total_curvatures(c, 0.16).c0, 4);
    EXPECT_FALSE(total_curvatures(c, 0.16).near_critical);
    // the four clusters merge at g/2 = 1/6
    EXPECT_TRUE(total_curvatures(c, 1.0 / 6 * (1 + 5e-4)).near_critical);
}

TEST(Rescaled, AboveAllRatiosEqualsTotals) {
    CurvatureEngine eng(cantor_square_preset(1.0 / 3));
    const Totals r = eng.rescaled(0.5), t = eng.totals(0.5);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(r.c[k], t.c[k]);
}

TEST(Rescaled, DisjointCylindersHaveNoDefect) {
    const Ifs c = cantor_square_preset(0.25);
    CurvatureEngine eng(c);
    for (double eps : {0.2, 0.1, 0.01}) {
        EXPECT_TRUE(overlapping_subsets(c, eps).empty());
        const Totals r = eng.rescaled(eps);
        EXPECT_EQ(r.c[0], 0.0);
        EXPECT_EQ(r.c[2], 0.0);
    }
}

TEST(Rescaled, ScalingReuseMatchesDirectCylinder) {
    const Ifs k = koch_preset();
    const double eps = 0.05;
    for (int i = 1; i <= 2; ++i) {
        FieldSpec fs;
        fs.groups = {{Word{i}}};
        const Totals direct = cylinder_totals(k, fs, eps);
        const CurvatureRecord whole = total_curvatures(k, eps / k.map(i).ratio);
        const double r = k.map(i).ratio;
        EXPECT_EQ(direct.c[0], static_cast<double>(whole.c0));
        EXPECT_NEAR(direct.c[1] / (r * whole.c1), 1.0, 0.02);
        EXPECT_NEAR(direct.c[2] / (r * r * whole.c2), 1.0, 0.02);
    }
}

TEST(Rescaled, KochRegressionValues) {
    CurvatureEngine eng(koch_preset());
    for (double eps : {0.3, 0.1, 0.05, 0.02}) EXPECT_EQ(eng.rescaled(eps).c[0], -1.0) << eps;
    // extrapolated from h = eps/50 and eps/100
    EXPECT_NEAR(eng.rescaled(0.1).c[2], -0.0377167, 0.005 * 0.0377167);
    EXPECT_NEAR(eng.rescaled(0.3).c[2], -0.3394558, 0.005 * 0.3394558);
}

TEST(Renewal, MatchesDirectMeasurement) {
    CurvatureEngine eng(koch_preset());
    for (double eps : {0.3, 0.1}) {
        const Totals t = eng.totals(eps);
        const CurvatureRecord d = total_curvatures(koch_preset(), eps);
        EXPECT_EQ(t.c[0], static_cast<double>(d.c0));
        EXPECT_NEAR(t.c[1] / d.c1, 1.0, 0.01);
        EXPECT_NEAR(t.c[2] / d.c2, 1.0, 1e-3);
    }
}

TEST(Eta, ClosedForms) {
    EXPECT_NEAR(eta(koch_preset()), std::log(3.0) / 2, 1e-12);
    EXPECT_NEAR(eta(uset_preset()), std::log(3.0), 1e-12);
    EXPECT_NEAR(eta(cantor_square_preset(0.25)), std::log(4.0), 1e-12);
    EXPECT_GT(eta(cantor_square_preset(0.1)), 0.0);
}

TEST(Ladder, LatticeStepDividesGenerator) {
    const Ifs k = koch_preset();
    const auto lad = log_ladder(k, 1e-2, 1.0, 40);
    const double step = std::log(lad[0] / lad[1]);
    const double per = std::log(3.0) / 2 / step;
    EXPECT_NEAR(per, std::round(per), 1e-9);
    EXPECT_GE(std::log(10.0) / step, 40.0);
    EXPECT_DOUBLE_EQ(lad.back(), 1e-2);
}

TEST(FractalEstimators, CantorQuarterAverageMatchesIntegral) {
    CurvatureEngine eng(cantor_square_preset(0.25));
    const FractalEstimate fe = fractal_integral(eng, 2, 1e-3, 1e-3);
    EXPECT_NEAR(fe.D, 1.0, 1e-12);
    EXPECT_NEAR(fe.value_avg / fe.value_integral, 1.0, 0.05);
    EXPECT_TRUE(fe.converged);
    EXPECT_EQ(fe.tail_bound, 0.0);
}

TEST(FractalEstimators, SquareAverageMatchesSteiner) {
    CurvatureEngine eng(square_preset());
    const double d = 0.1;
    const AverageEstimate a = fractal_avg(eng, 2, d, 10);
    // exact average of 1 + 4 eps + pi eps^2 over [delta, 1] in ln eps
    const double exact = 1 + (4 * (1 - d) + kPi / 2 * (1 - d * d)) / -std::log(d);
    EXPECT_NEAR(a.value / exact, 1.0, 0.01);
}

TEST(FractalEstimators, ExtrapolationRemovesLogBias) {
    // v(delta) = L + c / |ln delta| exactly
    auto v = [](double d) { return 2.5 + 3.0 / -std::log(d); };
    EXPECT_NEAR(extrapolated_average(v(1e-2), 1e-2, v(1e-4), 1e-4), 2.5, 1e-12);
}

TEST(FractalEstimators, EsslimAbsentForLattice) {
    CurvatureEngine eng(koch_preset());
    EXPECT_FALSE(esslim_probe(eng, 2).has_value());
}

TEST(Csv, HeaderAndRowFormat) {
    CurvatureRecord r;
    r.eps = 0.1;
    r.c0 = 4;
    r.c1 = 1.0 / 3;
    r.c2 = 2;
    r.c0_var = 4;
    r.h = 0.002;
    r.target_error = 0.001;
    std::ostringstream os;
    write_csv(os, {r});
    EXPECT_EQ(os.str(), "eps,c0,c1,c2,c0_var,near_critical,h,target_error\n0.1,4,0.333333333333,2,4,0,0.002,0.001\n");
}
