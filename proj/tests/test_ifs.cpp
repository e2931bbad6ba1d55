// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sscurv/ifs.hpp"

using namespace sscurv;

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

TEST(Similarity, KochFirstMapSendsOneToPeak) {
    const Ifs k = koch_preset();
    const Vec2 p = k.map(1).apply({1, 0});
    EXPECT_NEAR(p.x, 0.5, 1e-15);
    EXPECT_NEAR(p.y, kSqrt3 / 6, 1e-15);
}

TEST(Similarity, KochSecondMapFixesOne) {
    const Vec2 p = koch_preset().map(2).apply({1, 0});
    EXPECT_NEAR(p.x, 1.0, 1e-15);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
}

TEST(Similarity, CantorCornerMap) {
    const double p = 0.3;
    const Vec2 q = cantor_square_preset(p).map(1).apply({1, 1});
    EXPECT_DOUBLE_EQ(q.x, p);
    EXPECT_DOUBLE_EQ(q.y, p);
}

TEST(Similarity, ScalesDistancesExactly) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const Ifs& f : {koch_preset(), uset_preset(), cantor_square_preset(0.25)})
        for (auto& m : f.maps)
            for (int k = 0; k < 1000; ++k) {
                const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
                const double d = distance(a, b);
                EXPECT_NEAR(distance(m.apply(a), m.apply(b)) / d, m.ratio, 1e-12);
            }
}

TEST(Similarity, InverseUndoesMap) {
    const Similarity s{0.4, 1.1, true, {0.3, -0.2}};
    const Vec2 x{0.7, 0.9};
    const Vec2 y = s.inverse().apply(s.apply(x));
    EXPECT_NEAR(y.x, x.x, 1e-14);
    EXPECT_NEAR(y.y, x.y, 1e-14);
}

TEST(Compose, EmptyWordIsIdentity) {
    const Similarity s = compose(koch_preset(), Word{});
    EXPECT_EQ(s.ratio, 1.0);
    const Vec2 p = s.apply({0.25, -3});
    EXPECT_EQ(p.x, 0.25);
    EXPECT_EQ(p.y, -3);
}

TEST(Compose, RatiosMultiply) {
    EXPECT_NEAR(compose(koch_preset(), Word{1, 2}).ratio, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(compose(uset_preset(), Word{4, 7, 2}).ratio, 1.0 / 27.0, 1e-16);
}

TEST(Compose, IsAHomomorphism) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 2);
    for (const Ifs& f : {koch_preset(), uset_preset()}) {
        std::uniform_int_distribution<int> letter(1, static_cast<int>(f.size()));
        for (int trial = 0; trial < 50; ++trial) {
            Word a, b;
            for (int k = 0; k < 3; ++k) a.push_back(letter(rng));
            for (int k = 0; k < 4; ++k) b.push_back(letter(rng));
            const Similarity ab = compose(f, concat(a, b));
            const Similarity c = compose(compose(f, a), compose(f, b));
            const Vec2 x{u(rng), u(rng)};
            EXPECT_NEAR(distance(ab.apply(x), c.apply(x)), 0.0, 1e-12);
        }
    }
}

TEST(FixedPoint, KochEndpoints) {
    const Ifs k = koch_preset();
    const Vec2 a = fixed_point(k.map(1)), b = fixed_point(k.map(2));
    EXPECT_NEAR(a.norm(), 0.0, 1e-15);
    EXPECT_NEAR(b.x, 1.0, 1e-14);
    EXPECT_NEAR(b.y, 0.0, 1e-14);
}

TEST(Dimension, ClosedForms) {
    EXPECT_NEAR(similarity_dimension(koch_preset()), std::log(4.0) / std::log(3.0), 1e-12);
    EXPECT_NEAR(similarity_dimension(uset_preset()), std::log(7.0) / std::log(3.0), 1e-12);
    EXPECT_NEAR(similarity_dimension(cantor_square_preset(0.25)), 1.0, 1e-12);
    EXPECT_NEAR(similarity_dimension(square_preset()), 2.0, 1e-12);
}

TEST(Dimension, ResidualVanishes) {
    Ifs f = cantor_square_preset(0.2);
    f.maps[1].ratio = 0.35;
    f.maps[2].ratio = 0.1;
    const double D = similarity_dimension(f);
    double s = 0;
    for (auto& m : f.maps) s += std::pow(m.ratio, D);
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Arithmetic, KochLattice) {
    const ArithmeticVerdict v = is_arithmetic(koch_preset());
    ASSERT_TRUE(v.arithmetic);
    EXPECT_NEAR(v.h, std::log(3.0) / 2, 1e-12);
}

TEST(Arithmetic, HalfAndQuarter) {
    Ifs f = cantor_square_preset(0.25);
    f.maps[0].ratio = 0.5;
    const ArithmeticVerdict v = is_arithmetic(f);
    ASSERT_TRUE(v.arithmetic);
    EXPECT_NEAR(v.h, std::log(2.0), 1e-12);
}

TEST(Arithmetic, HalfAndThirdIsNot) {
    Ifs f = cantor_square_preset(0.25);
    f.maps[0].ratio = 0.5;
    f.maps[1].ratio = 1.0 / 3.0;
    EXPECT_FALSE(is_arithmetic(f).arithmetic);
}

TEST(Cloud, CantorLineEndpointsAlwaysPresent) {
    const double p = 0.3;
    Ifs line;
    line.maps = {Similarity{p, 0, false, {0, 0}}, Similarity{p, 0, false, {1 - p, 0}}};
    line.open_set = {{0, -0.1}, {1, -0.1}, {1, 0.1}, {0, 0.1}};
    for (double err : {0.3, 0.05, 0.001}) {
        const PointCloud c = attractor_cloud(line, err);
        bool has0 = false, has1 = false;
        for (auto q : c.points) {
            has0 |= q.norm() < 1e-15;
            has1 |= distance(q, {1, 0}) < 1e-15;
        }
        EXPECT_TRUE(has0 && has1) << err;
        EXPECT_LE(c.hausdorff_error, err);
    }
}

TEST(Cloud, TreeCountFromSingleSeed) {
    const Ifs u = uset_preset();
    CloudOptions opt;
    opt.include_fixed_points = false;
    const PointCloud c = attractor_cloud(u, 0.01, {}, opt);
    EXPECT_EQ(c.points.size(), static_cast<std::size_t>(std::pow(7.0, c.depth) + 0.5));
}

TEST(Cloud, KochEndpointsPresent) {
    const PointCloud c = attractor_cloud(koch_preset(), 0.05);
    bool a = false, b = false;
    for (auto q : c.points) {
        a |= q.norm() < 1e-14;
        b |= distance(q, {1, 0}) < 1e-14;
    }
    EXPECT_TRUE(a);
    EXPECT_TRUE(b);
}

TEST(Cloud, BudgetIsEnforced) {
    CloudOptions opt;
    opt.point_budget = 1000;
    EXPECT_THROW(attractor_cloud(uset_preset(), 1e-4, {}, opt), ResourceError);
    EXPECT_THROW(attractor_cloud(uset_preset(), 0.0), DomainError);
}

TEST(Cloud, InvariantUnderTheMaps) {
    const Ifs k = koch_preset();
    const PointCloud c = attractor_cloud(k, 0.01);
    std::vector<Vec2> image;
    for (auto& m : k.maps)
        for (auto q : c.points) image.push_back(m.apply(q));
    for (std::size_t i = 0; i < c.points.size(); i += 37) {
        double best = 1e9;
        for (auto q : image) best = std::min(best, distance(q, c.points[i]));
        EXPECT_LE(best, c.hausdorff_error + 1e-12);
    }
}

TEST(Bounds, BallContainsCloudAndBoundsBracket) {
    for (const Ifs& f : {koch_preset(), uset_preset(), cantor_square_preset(1.0 / 3)}) {
        const Frame fr(f);
        const PointCloud c = attractor_cloud(f, 0.002);
        for (auto q : c.points) ASSERT_LE(distance(q, fr.ball.center), fr.ball.radius + 1e-12);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-0.5, 1.5);
        for (int k = 0; k < 40; ++k) {
            const Vec2 x{u(rng), u(rng)};
            double brute = 1e9;
            for (auto q : c.points) brute = std::min(brute, distance(q, x));
            const DistanceBounds b = distance_bounds(fr, x, 1e-4);
            EXPECT_LE(b.lower, brute + 1e-12);
            EXPECT_GE(b.upper + c.hausdorff_error, brute - 1e-12);
            EXPECT_LE(b.upper - b.lower, 1e-4 + 1e-12);
        }
    }
}

TEST(Presets, Validate) {
    for (const Ifs& f : {koch_preset(), uset_preset(), cantor_square_preset(0.25), square_preset()}) EXPECT_NO_THROW(validate(f));
    Ifs bad = koch_preset();
    bad.big_R = 1.2;
    EXPECT_THROW(validate(bad), ConfigError);
    bad = koch_preset();
    bad.open_set = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Presets, USetCellsTileTheU) {
    const Ifs u = uset_preset();
    const Vec2 expect[7] = {{0, 2}, {0, 1}, {0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}};
    for (int i = 0; i < 7; ++i) {
        Box b;
        for (Vec2 c : {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}}) b.expand(u.maps[static_cast<std::size_t>(i)].apply(c));
        EXPECT_NEAR(b.lo.x, expect[i].x / 3, 1e-15);
        EXPECT_NEAR(b.lo.y, expect[i].y / 3, 1e-15);
        EXPECT_NEAR(b.width(), 1.0 / 3, 1e-15);
    }
}

TEST(Transform, ConjugationMovesTheAttractor) {
    const Ifs k = koch_preset();
    const Similarity g{2.0, 0.7, false, {0.3, -1}};
    const Ifs kg = transformed(k, g);
    const Vec2 a = fixed_point(kg.map(2)), b = g.apply(fixed_point(k.map(2)));
    EXPECT_NEAR(distance(a, b), 0.0, 1e-12);
    EXPECT_NEAR(kg.maps[0].ratio, k.maps[0].ratio, 1e-15);
}
