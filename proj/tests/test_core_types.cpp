#include "regvar/core_types.hpp"
#include "regvar/region.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace regvar;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<State> probe_points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-200.0, 200.0);
    std::vector<State> out(n);
    for (auto& s : out) s = State{u(rng), u(rng), 0.0, 0.0};
    return out;
}

} // namespace

TEST(WrapAngle, PrincipalInterval) {
    EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
    EXPECT_DOUBLE_EQ(wrap_angle(pi), pi);
    EXPECT_DOUBLE_EQ(wrap_angle(-pi), pi);
    EXPECT_NEAR(wrap_angle(3.0 * pi), pi, 1e-12);
    EXPECT_NEAR(wrap_angle(0.1 + 2.0 * pi), 0.1, 1e-12);
    EXPECT_NEAR(wrap_angle(-0.1 - 4.0 * pi), -0.1, 1e-12);
    for (double a = -20.0; a < 20.0; a += 0.37) {
        const double w = wrap_angle(a);
        EXPECT_GT(w, -pi);
        EXPECT_LE(w, pi);
        EXPECT_NEAR(std::remainder(a - w, 2.0 * pi), 0.0, 1e-9);
    }
}

TEST(Measurement, RejectsBadRange) {
    EXPECT_THROW((void)make_measurement(-1.0, 0.0), InvalidInput);
    EXPECT_THROW((void)make_measurement(NAN, 0.0), InvalidInput);
    EXPECT_THROW((void)make_measurement(1.0, INFINITY), InvalidInput);
    const Measurement z = make_measurement(10.0, 2.0 * pi + 0.5);
    EXPECT_DOUBLE_EQ(z.range, 10.0);
    EXPECT_NEAR(z.bearing, 0.5, 1e-12);
}

TEST(State, Finiteness) {
    EXPECT_TRUE((State{1, 2, 3, 4}.is_finite()));
    EXPECT_FALSE((State{1, NAN, 3, 4}.is_finite()));
    EXPECT_FALSE((State{1, 2, INFINITY, 4}.is_finite()));
}

TEST(WeightedParticleSet, MassAndValidation) {
    EXPECT_THROW(WeightedParticleSet({Particle{-0.1, {}}}), InvalidInput);
    EXPECT_THROW(WeightedParticleSet({Particle{NAN, {}}}), InvalidInput);
    const WeightedParticleSet empty;
    EXPECT_TRUE(empty.empty());
    EXPECT_EQ(empty.total_mass(), 0.0);

    std::vector<Particle> ps;
    for (int i = 0; i < 10; ++i) ps.push_back(Particle{0.1 * (i + 1), State{double(i), 0, 0, 0}});
    const WeightedParticleSet a(ps);
    EXPECT_NEAR(a.total_mass(), 5.5, 1e-12);
    std::reverse(ps.begin(), ps.end());
    std::swap(ps[2], ps[7]);
    const WeightedParticleSet b(ps);
    EXPECT_NEAR(a.total_mass(), b.total_mass(), 1e-12);
}

TEST(CardinalityDistribution, Construction) {
    const CardinalityDistribution d0;
    EXPECT_EQ(d0.n_max(), 0u);
    EXPECT_EQ(d0(0), 1.0);
    EXPECT_EQ(d0(5), 0.0);

    const CardinalityDistribution w({1.0, 2.0, 1.0});
    EXPECT_DOUBLE_EQ(w(1), 0.5);
    EXPECT_DOUBLE_EQ(w.mean(), 1.0);
    EXPECT_DOUBLE_EQ(w.variance(), 0.5);

    EXPECT_THROW(CardinalityDistribution(std::vector<double>{}), InvalidInput);
    EXPECT_THROW(CardinalityDistribution({0.0, 0.0}), InvalidInput);
    EXPECT_THROW(CardinalityDistribution({1.0, -1.0}), InvalidInput);
    EXPECT_THROW((void)CardinalityDistribution::point_mass(4, 3), InvalidInput);
    EXPECT_THROW((void)CardinalityDistribution::poisson(-1.0, 3), InvalidInput);
}

TEST(CardinalityDistribution, NormalizedOnEveryPath) {
    auto sum = [](const CardinalityDistribution& d) {
        double s = 0.0;
        for (double p : d.probabilities()) s += p;
        return s;
    };
    EXPECT_NEAR(sum(CardinalityDistribution({3.0, 1.0, 7.0})), 1.0, 1e-15);
    EXPECT_NEAR(sum(CardinalityDistribution::poisson(4.0, 10)), 1.0, 1e-15);
    EXPECT_NEAR(sum(CardinalityDistribution::poisson(0.0, 10)), 1.0, 1e-15);
    EXPECT_NEAR(sum(CardinalityDistribution::point_mass(2, 5)), 1.0, 1e-15);
    EXPECT_NEAR(sum(CardinalityDistribution::truncated({1, 1, 1, 1, 1}, 2)), 1.0, 1e-15);
}

TEST(CardinalityDistribution, PoissonMomentsAndTail) {
    const auto p = CardinalityDistribution::poisson(5.0, 80);
    EXPECT_NEAR(p.mean(), 5.0, 1e-12);
    EXPECT_NEAR(p.variance(), 5.0, 1e-12);
    EXPECT_FALSE(p.truncation_warning());

    const auto cut = CardinalityDistribution::poisson(5.0, 3);
    EXPECT_GT(cut.dropped_tail(), 0.7);
    EXPECT_TRUE(cut.truncation_warning());
}

TEST(CardinalityDistribution, TruncationRecordsDroppedMass) {
    const auto t = CardinalityDistribution::truncated({1.0, 1.0, 1.0, 1.0}, 1);
    EXPECT_EQ(t.n_max(), 1u);
    EXPECT_DOUBLE_EQ(t(0), 0.5);
    EXPECT_DOUBLE_EQ(t.dropped_tail(), 0.5);
    EXPECT_TRUE(t.truncation_warning());

    const auto kept = CardinalityDistribution::truncated({1.0, 1.0}, 5);
    EXPECT_EQ(kept.dropped_tail(), 0.0);
    EXPECT_FALSE(kept.truncation_warning());
}

TEST(CountInRegion, TrivialCases) {
    EXPECT_EQ(count_in_region(MultiTargetConfig{}, region_all()), 0u);
    EXPECT_EQ(count_in_region(MultiTargetConfig{}, region_disc(0, 0, 10)), 0u);
    const MultiTargetConfig three{{State{1, 1, 0, 0}, State{-2, 0, 0, 0}, State{0, 3, 0, 0}}};
    EXPECT_EQ(count_in_region(three, region_disc(0, 0, 5)), 3u);
    EXPECT_EQ(count_in_region(three, region_empty()), 0u);
}

TEST(CountInRegion, MatchesPerPointMembership) {
    const auto pts = probe_points(100, 7);
    const MultiTargetConfig config{pts};
    const double cx = 20.0, cy = -15.0, r = 90.0;
    std::size_t expected = 0;
    for (const State& s : pts)
        if ((s.x - cx) * (s.x - cx) + (s.y - cy) * (s.y - cy) <= r * r) ++expected;
    EXPECT_EQ(count_in_region(config, region_disc(cx, cy, r)), expected);
}

TEST(CountInRegion, AdditiveOverDisjointRegions) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const MultiTargetConfig config{probe_points(60, seed)};
        const Region inner = region_disc(0, 0, 80);
        const Region ring = region_annulus(0, 0, 80, 150);
        EXPECT_EQ(count_in_region(config, inner) + count_in_region(config, ring),
                  count_in_region(config, region_union(inner, ring)));
        EXPECT_EQ(count_in_region(config, region_intersection(inner, ring)), 0u);
    }
}

TEST(Region, IntersectionLaws) {
    const Region a = region_disc(10, 10, 70);
    const Region none = region_empty();
    const Region small = region_disc(0, 0, 50);
    const Region big = region_disc(0, 0, 100);
    for (const State& s : probe_points(1000, 3)) {
        EXPECT_EQ(region_intersection(a, a).contains(s), a.contains(s));
        EXPECT_FALSE(region_intersection(a, none).contains(s));
        EXPECT_EQ(region_intersection(small, big).contains(s), small.contains(s));
        EXPECT_EQ(region_union(small, big).contains(s), big.contains(s));
    }
}

TEST(Region, ShapesAndLabels) {
    EXPECT_TRUE(region_disc(0, 0, 5).contains(State{5, 0, 0, 0}));  // closed disc
    EXPECT_FALSE(region_disc(0, 0, 5).contains(State{5.001, 0, 0, 0}));
    const Region ring = region_annulus(0, 0, 2, 4);
    EXPECT_FALSE(ring.contains(State{2, 0, 0, 0}));
    EXPECT_TRUE(ring.contains(State{4, 0, 0, 0}));
    EXPECT_TRUE(region_half_plane_x(1.0).contains(State{0.5, 100, 0, 0}));
    EXPECT_FALSE(region_half_plane_x(1.0).contains(State{1.0, 0, 0, 0}));
    EXPECT_TRUE(region_fov(3500).contains(State{0, -3500, 0, 0}));
    EXPECT_EQ(region_fov(3500).label(), "fov");
    EXPECT_EQ(region_all().label(), "all");
    EXPECT_FALSE(region_disc(0, 0, 1).label().empty());
    // velocity never matters
    EXPECT_TRUE(region_disc(0, 0, 1).contains(State{0, 0, 1e6, -1e6}));
}
