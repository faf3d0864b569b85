#include "regvar/simulation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace regvar;

namespace {

Scenario noiseless(Scenario s) {
    s.truth_accel_sigma = 0.0;
    return s;
}

} // namespace

TEST(FiveTrackScenario, TrackParameters) {
    const Scenario s = scenario_five_track();
    ASSERT_EQ(s.tracks.size(), 5u);
    const Track& t1 = s.tracks[0];
    EXPECT_EQ(t1.initial.x, 2000.0);
    EXPECT_EQ(t1.initial.y, 2000.0);
    EXPECT_EQ(t1.initial.vx, -9.1);
    EXPECT_EQ(t1.birth, 0.0);
    EXPECT_EQ(t1.death, 110.0);
    const Track& t5 = s.tracks[4];
    EXPECT_EQ(t5.initial.x, 1250.0);
    EXPECT_EQ(t5.initial.y, 2350.0);
    EXPECT_EQ(t5.initial.vx, 12.0);
    EXPECT_EQ(t5.initial.vy, -12.0);
    EXPECT_EQ(t5.birth, 90.0);
    EXPECT_EQ(t5.death, 190.0);
    EXPECT_EQ(s.horizon, 190.0);
    EXPECT_EQ(s.num_steps(), 190u);
    EXPECT_NO_THROW(s.validate());
}

TEST(FiveTrackScenario, TracksOneAndTwoCross) {
    const GroundTruth g = generate_truth(noiseless(scenario_five_track()), 1);
    const auto a = g.track_state(0, 55);
    const auto b = g.track_state(1, 55);
    ASSERT_TRUE(a && b);
    const double sep = std::hypot(a->x - b->x, a->y - b->y);
    EXPECT_NEAR(sep, 5.4, 1.0);

    // the alternative start never brings them together
    const GroundTruth p = generate_truth(noiseless(scenario_five_track_alt()), 1);
    double closest = 1e9;
    for (std::size_t k = 0; k < p.num_steps(); ++k) {
        const auto x = p.track_state(0, k), y = p.track_state(1, k);
        if (x && y) closest = std::min(closest, std::hypot(x->x - y->x, x->y - y->y));
    }
    EXPECT_GT(closest, 1500.0);
}

TEST(GroundTruth, TargetCountIsAStairFunction) {
    const GroundTruth g = generate_truth(scenario_five_track(), 3);
    const auto expected = [](double t) {
        std::size_t n = 0;
        for (const Track& tr : scenario_five_track().tracks)
            if (tr.birth <= t && t < tr.death) ++n;
        return n;
    };
    for (std::size_t k = 0; k < g.num_steps(); ++k) EXPECT_EQ(g.configs[k].states.size(), expected(g.times[k])) << k;
    EXPECT_EQ(g.configs[0].states.size(), 1u);
    EXPECT_EQ(g.configs[100].states.size(), 5u);
    EXPECT_EQ(g.configs[180].states.size(), 1u);
}

TEST(GroundTruth, NoiselessTracksFollowTheLine) {
    const GroundTruth g = generate_truth(noiseless(scenario_five_track()), 9);
    for (std::size_t k = 90; k < 190; k += 7) {
        const auto s = g.track_state(4, k);
        ASSERT_TRUE(s);
        const double lag = g.times[k] - 90.0;
        EXPECT_NEAR(s->x, 1250.0 + 12.0 * lag, 1e-9);
        EXPECT_NEAR(s->y, 2350.0 - 12.0 * lag, 1e-9);
    }
}

TEST(GroundTruth, DeterministicPerSeed) {
    const auto a = generate_truth(scenario_five_track(), 5);
    const auto b = generate_truth(scenario_five_track(), 5);
    const auto c = generate_truth(scenario_five_track(), 6);
    EXPECT_EQ(a.configs[60].states[0].x, b.configs[60].states[0].x);
    EXPECT_NE(a.configs[60].states[0].x, c.configs[60].states[0].x);
}

TEST(Measurements, NoiselessPerfectSensorReturnsTruth) {
    Scenario s = scenario_five_track();
    s.p_d = 1.0;
    s.clutter_rate = 0.0;
    s.sensor.sigma_range = 1e-300;
    s.sensor.sigma_bearing = 1e-300;
    const MultiTargetConfig truth{{State{300.0, 400.0, 0, 0}}};
    Rng rng(1);
    const auto zs = generate_measurements(truth, s, rng);
    ASSERT_EQ(zs.size(), 1u);
    EXPECT_NEAR(zs[0].range, 500.0, 1e-9);
    EXPECT_NEAR(zs[0].bearing, std::atan2(400.0, 300.0), 1e-12);
}

TEST(Measurements, ClutterCountAndSpread) {
    Scenario s = scenario_five_track();
    s.clutter_rate = 20.0;
    const MultiTargetConfig empty;
    Rng rng(2);
    const double R = s.sensor.fov_radius;
    double count = 0.0, r2 = 0.0;
    const int scans = 2000;
    for (int i = 0; i < scans; ++i) {
        const auto zs = generate_measurements(empty, s, rng);
        count += double(zs.size());
        for (const auto& z : zs) {
            EXPECT_GE(z.range, 0.0);
            EXPECT_LE(z.range, R);
            r2 += z.range * z.range;
        }
    }
    EXPECT_NEAR(count / scans, 20.0, 0.3);
    // area-uniform clutter has E[r^2] = R^2 / 2
    EXPECT_NEAR(r2 / count / (R * R), 0.5, 0.01);
}

TEST(Measurements, DeterministicPerSeed) {
    const Scenario s = scenario_five_track();
    const GroundTruth g = generate_truth(s, 1);
    const auto a = generate_measurements(g, s, 11);
    const auto b = generate_measurements(g, s, 11);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        ASSERT_EQ(a[k].size(), b[k].size());
        for (std::size_t j = 0; j < a[k].size(); ++j) EXPECT_EQ(a[k][j].range, b[k][j].range);
    }
}

TEST(Scenario, ValidationNamesTheField) {
    Scenario s = scenario_five_track();
    s.p_d = 1.5;
    try {
        s.validate();
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("p_d"), std::string::npos);
    }
    s = scenario_five_track();
    s.tracks[0].death = -1.0;
    EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(Csv, HeadersAndRowCounts) {
    const Scenario s = scenario_five_track();
    const GroundTruth g = generate_truth(s, 1);
    std::ostringstream os;
    write_truth_csv(os, g);
    const std::string text = os.str();
    EXPECT_EQ(text.rfind("t,track,x,y,vx,vy\n", 0), 0u);
    std::size_t states = 0;
    for (const auto& c : g.configs) states += c.states.size();
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), states + 1);
}
