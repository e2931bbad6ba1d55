// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sscurv/oracles.hpp"

using namespace sscurv;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(CantorN, ThirdAtPointSeventeen) {
    const auto c = cantor_params(1.0 / 3);
    EXPECT_NEAR(4 * 0.17 * 0.17 - c.g() * c.g(), 0.004489, 1e-6);
    EXPECT_EQ(cantor_N(c, 0.17), 2u);
}

TEST(CantorN, OneWhenNoIntervalQualifies) {
    const auto c = cantor_params(0.25);
    const double sg = c.s * c.g();
    const double eps = std::sqrt(sg * sg + c.g() * c.g()) / 2;
    EXPECT_EQ(cantor_N(c, eps * (1 + 1e-12)), 1u);
    EXPECT_EQ(cantor_N(c, 0.4), 1u);
}

TEST(CantorN, MonotoneAndDivergent) {
    for (double p : {0.2, 0.25, 1.0 / 3, 0.4}) {
        const auto c = cantor_params(p);
        std::uint64_t prev = ~std::uint64_t{0};
        for (double t = 1e-9; t < 1; t *= 1.3) {
            const std::uint64_t n = cantor_N(c, c.critical() + t);
            EXPECT_LE(n, prev);
            prev = n;
        }
        EXPECT_GT(cantor_N(c, c.critical() + 1e-12), 100u);
    }
}

TEST(CantorN, ScaleIsSelectable) {
    const auto a = cantor_params(0.25), b = cantor_params(0.25, true);
    EXPECT_DOUBLE_EQ(a.s, 0.25);
    EXPECT_DOUBLE_EQ(b.s, 1.0 / 3);
    // the largest interval s g decides where N leaves 1
    const double eps = std::sqrt(std::pow(0.3 * 0.5, 2) + 0.25) / 2;
    EXPECT_EQ(cantor_N(a, eps), 1u);
    EXPECT_EQ(cantor_N(b, eps), 2u);
}

TEST(CantorN, DomainError) {
    const auto c = cantor_params(1.0 / 3);
    EXPECT_THROW(cantor_N(c, c.critical()), DomainError);
    EXPECT_THROW(cantor_N(c, 0.1), DomainError);
    EXPECT_THROW(cantor_params(0.5), DomainError);
}

TEST(CantorAlpha, SpecialAngles) {
    const auto c = cantor_params(0.3);
    const double g = c.g();
    EXPECT_NEAR(cantor_alpha(c, g / 2), kPi, 1e-12);
    EXPECT_NEAR(cantor_alpha(c, g), kPi / 3, 1e-12);
    EXPECT_NEAR(cantor_alpha(c, g / std::sqrt(2.0)), kPi / 2, 1e-12);
    EXPECT_THROW(cantor_alpha(c, g / 2 * (1 - 1e-9)), DomainError);
}

TEST(CantorAlpha, DecreasingAndAboveChord) {
    const auto c = cantor_params(0.25);
    double prev = 4;
    for (double eps = c.critical() * 1.001; eps < 3; eps *= 1.05) {
        const double a = cantor_alpha(c, eps);
        EXPECT_LT(a, prev);
        EXPECT_GT(a, c.g() / eps);
        prev = a;
    }
}

TEST(CantorC0var, ComposedValue) {
    const auto c = cantor_params(1.0 / 3);
    EXPECT_NEAR(cantor_alpha(c, 0.17), 2.7448836093, 1e-9);
    EXPECT_NEAR(cantor_c0var(c, 0.17), 1.7474471785, 1e-9);
}

TEST(CantorC0var, LowerBoundAtRandomEps) {
    std::mt19937_64 rng(7);
    for (double p : {0.25, 1.0 / 3}) {
        const auto c = cantor_params(p);
        std::uniform_real_distribution<double> u(c.critical(), c.g() / (2 * p));
        for (int i = 0; i < 1000; ++i) {
            double eps = u(rng);
            if (eps <= c.critical()) continue;
            EXPECT_GT(cantor_c0var(c, eps), 2 * p / kPi * static_cast<double>(cantor_N(c, eps)));
        }
    }
}

TEST(CantorC0var, UnboundedNearCritical) {
    const auto c = cantor_params(1.0 / 3);
    double best = 0;
    for (double t = 1e-4; t > 1e-12; t /= 2) best = std::max(best, cantor_c0var(c, c.critical() + t));
    EXPECT_GT(best, 10.0);
    EXPECT_GT(cantor_c0var(c, c.critical() + 1e-14), 50.0);
}

TEST(USet, Bands) {
    EXPECT_EQ(uset_band(1.0 / 100), 2);
    EXPECT_DOUBLE_EQ(uset_c0var(1.0 / 100), 1.5);
    EXPECT_EQ(uset_band(1.0 / 45), 1);
    EXPECT_DOUBLE_EQ(uset_c0var(1.0 / 45), 0.5);
    EXPECT_DOUBLE_EQ(uset_c0var(0.5 * std::pow(3.0, -4)), 1.5);
    EXPECT_DOUBLE_EQ(uset_c0var(1.0 / 162), 1.5);
    EXPECT_DOUBLE_EQ(uset_c0var(1.0 / 162 * (1 - 1e-9)), 3.5);
    EXPECT_EQ(uset_pairs(1.0 / 100), 3);
    EXPECT_EQ(uset_pairs(1.0 / 45), 1);
}

TEST(USet, EveryBandEndpoint) {
    for (int m = 1; m <= 12; ++m) {
        double lo = 0.5;
        for (int i = 0; i < m + 2; ++i) lo /= 3;
        EXPECT_EQ(uset_band(lo), m);
        EXPECT_EQ(uset_band(lo * 1.5), m);
        EXPECT_EQ(uset_band(lo * 3 * (1 - 1e-9)), m);
        EXPECT_EQ(uset_band(std::nextafter(lo, 0.0)), m);
    }
}

TEST(USet, DomainError) {
    EXPECT_THROW(uset_c0var(0.0), DomainError);
    EXPECT_THROW(uset_c0var(1.0 / 18), DomainError);
    EXPECT_THROW(uset_c0var(-0.01), DomainError);
}

TEST(Koch, Constants) {
    const KochConstants k = koch_constants();
    EXPECT_DOUBLE_EQ(k.arc_measure, 1.0 / 6);
    EXPECT_DOUBLE_EQ(k.d0, 7.0 / 6);
    EXPECT_NEAR(k.critical_value(0), 1.0 / 9, 1e-15);
    EXPECT_NEAR(k.critical_value(2), 1.0 / 27, 1e-15);
    EXPECT_NEAR(k.critical_point.y, std::sqrt(3.0) / 18, 1e-15);
    EXPECT_LE(k.junction_lower, k.junction_upper);
    EXPECT_DOUBLE_EQ(k.arc_measure - k.junction_lower, k.d0);
}
