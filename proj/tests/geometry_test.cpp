#include "versekit/geometry.hpp"

#include <gtest/gtest.h>

#include <random>

namespace versekit {
namespace {

HyperRect box(std::initializer_list<std::pair<double, double>> dims) {
    std::vector<Interval> v;
    for (const auto& [lo, hi] : dims) v.emplace_back(lo, hi);
    return HyperRect(std::move(v));
}

TEST(Interval, InvariantLoLeHi) {
    EXPECT_NO_THROW(Interval(1.0, 1.0));
    EXPECT_THROW(Interval(2.0, 1.0), Error);
}

TEST(Interval, ArithmeticFourProductRule) {
    const Interval a(1, 2), b(-1, 3);
    const Interval p = a * b;
    EXPECT_DOUBLE_EQ(p.lo, -2.0);
    EXPECT_DOUBLE_EQ(p.hi, 6.0);
    EXPECT_THROW(a / Interval(-1, 1), Error);
    const Interval q = Interval(1, 4) / Interval(2, 2);
    EXPECT_DOUBLE_EQ(q.lo, 0.5);
    EXPECT_DOUBLE_EQ(q.hi, 2.0);
}

TEST(Contains, Examples) {
    EXPECT_TRUE(contains(box({{0, 2}}), box({{0, 2}})));   // reflexive
    EXPECT_FALSE(contains(box({{0, 2}}), box({{1, 3}})));  // hi exceeds
    EXPECT_TRUE(contains(box({{0, 2}, {0, 2}}), box({{0.5, 1}, {0, 2}})));
    EXPECT_THROW(contains(box({{0, 1}}), box({{0, 1}, {0, 1}})), Error);
}

TEST(Intersect, Examples) {
    const auto r = intersect(box({{0, 2}}), box({{1, 3}}));
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(*r, box({{1, 2}}));
    EXPECT_FALSE(intersect(box({{0, 1}}), box({{2, 3}})).has_value());
    const auto r2 = intersect(box({{0, 2}, {0, 2}}), box({{1, 3}, {-1, 1}}));
    ASSERT_TRUE(r2.has_value());
    EXPECT_EQ(*r2, box({{1, 2}, {0, 1}}));
}

// Closed-box semantics: touching at a single boundary value is a nonempty
// degenerate intersection. Guard thresholds rely on this.
TEST(Intersect, TouchingBoundaryIsNonempty) {
    const auto r = intersect(box({{0, 1}}), box({{1, 2}}));
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(*r, box({{1, 1}}));
}

TEST(Hull, Examples) {
    EXPECT_EQ(hull(box({{0, 1}}), box({{0, 1}})), box({{0, 1}}));
    EXPECT_EQ(hull(box({{0, 1}}), box({{2, 3}})), box({{0, 3}}));
    EXPECT_EQ(hull(box({{0, 1}, {5, 6}}), box({{2, 3}, {4, 5}})), box({{0, 3}, {4, 6}}));
}

TEST(Bloat, Examples) {
    EXPECT_EQ(bloat(box({{1, 2}}), 0.0), box({{1, 2}}));
    EXPECT_EQ(bloat(box({{1, 2}}), 0.5), box({{0.5, 2.5}}));
    const std::vector<double> eps = {1.0, 2.0};
    EXPECT_EQ(bloat(box({{0, 0}, {3, 3}}), eps), box({{-1, 1}, {1, 5}}));
    const std::vector<double> bad = {-0.1, 0.0};
    EXPECT_THROW(bloat(box({{0, 0}, {3, 3}}), bad), Error);
}

HyperRect random_box(std::mt19937_64& rng, int dims) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<Interval> v;
    for (int d = 0; d < dims; ++d) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        v.emplace_back(a, b);
    }
    return HyperRect(std::move(v));
}

TEST(Properties, IntersectAndHullBracketInputs) {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 500; ++iter) {
        const auto a = random_box(rng, 3);
        const auto b = random_box(rng, 3);
        const auto h = hull(a, b);
        EXPECT_TRUE(contains(h, a));
        EXPECT_TRUE(contains(h, b));
        if (const auto i = intersect(a, b)) {
            EXPECT_TRUE(contains(a, *i));
            EXPECT_TRUE(contains(b, *i));
        }
    }
}

TEST(Properties, ContainsIsPartialOrder) {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 300; ++iter) {
        const auto a = random_box(rng, 2);
        const auto b = random_box(rng, 2);
        const auto c = hull(a, b);
        EXPECT_TRUE(contains(a, a));
        if (contains(a, b) && contains(b, a)) EXPECT_EQ(a, b);
        if (contains(c, a) && contains(a, b)) EXPECT_TRUE(contains(c, b));
    }
}

TEST(TimedRect, TimeInvariant) {
    EXPECT_NO_THROW(TimedRect(0.0, 1.0, box({{0, 1}})));
    EXPECT_THROW(TimedRect(2.0, 1.0, box({{0, 1}})), Error);
    EXPECT_THROW(TimedRect(-1.0, 1.0, box({{0, 1}})), Error);
}

}  // namespace
}  // namespace versekit
