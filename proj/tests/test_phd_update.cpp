#include "regvar/oracle.hpp"
#include "regvar/phd_update.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace regvar;
using regvar::testing::box_model;
using regvar::testing::random_particles;

namespace {

// One particle, p_d = 0.9, L = 1 and lambda_c c(z) = 0.1.
ObservationModel unit_model() {
    ObservationModel model;
    model.detection_probability = [](const State&) { return 0.9; };
    model.likelihood = [](const Measurement&, const State&) { return 1.0; };
    model.clutter_density = [](const Measurement&) { return 1.0; };
    model.clutter_rate = 0.1;
    model.clutter_cardinality = CardinalityDistribution::poisson(0.1, 20);
    return model;
}

std::vector<Measurement> random_scan(std::mt19937_64& rng, std::size_t m) {
    std::uniform_real_distribution<double> x(0.0, 40.0);
    std::uniform_real_distribution<double> y(-20.0, 20.0);
    std::vector<Measurement> zs(m);
    for (auto& z : zs) z = Measurement{x(rng), y(rng)};
    return zs;
}

} // namespace

TEST(PhdConditionalWeights, NoMeasurements) {
    std::mt19937_64 rng(1);
    const WeightedParticleSet mu(random_particles(50, 2.0, rng));
    const auto model = box_model(0.8, 5.0, 3.0);
    const auto cw = phd_conditional_weights(mu, {}, model);
    EXPECT_EQ(cw.per_measurement.cols(), 0u);
    for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_DOUBLE_EQ(cw.missed[i], 0.2 * mu[i].weight);
    const auto post = phd_update_intensity(cw, mu);
    EXPECT_NEAR(post.total_mass(), 0.2 * mu.total_mass(), 1e-12);
}

TEST(PhdConditionalWeights, UndetectableTargets) {
    std::mt19937_64 rng(2);
    const WeightedParticleSet mu(random_particles(30, 1.5, rng));
    const auto model = box_model(0.0, 5.0, 3.0);
    const auto zs = random_scan(rng, 4);
    const auto cw = phd_conditional_weights(mu, zs, model);
    for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_DOUBLE_EQ(cw.missed[i], mu[i].weight);
    for (std::size_t k = 0; k < zs.size(); ++k)
        for (double v : cw.per_measurement.col(k)) EXPECT_EQ(v, 0.0);
}

TEST(PhdConditionalWeights, HandSubstitution) {
    const WeightedParticleSet mu({Particle{1.0, State{}}});
    const std::vector<Measurement> zs{Measurement{1.0, 0.0}};
    const auto cw = phd_conditional_weights(mu, zs, unit_model());
    EXPECT_NEAR(cw.per_measurement(0, 0), 0.9, 1e-15);
    EXPECT_NEAR(cw.missed[0], 0.1, 1e-15);
    EXPECT_NEAR(cw.normalizers[0], 1.0, 1e-15);
    const auto post = phd_update_intensity(cw, mu);
    EXPECT_NEAR(post.total_mass(), 1.0, 1e-15);
}

TEST(PhdConditionalWeights, Errors) {
    const auto model = box_model(0.9, 5.0, 3.0);
    EXPECT_THROW((void)phd_conditional_weights(WeightedParticleSet{}, {}, model), DegenerateModel);
    // no target support and no clutter support
    ObservationModel dead = model;
    dead.clutter_density = [](const Measurement&) { return 0.0; };
    const WeightedParticleSet far({Particle{1.0, State{1e4, 1e4, 0, 0}}});
    const std::vector<Measurement> zs{Measurement{1.0, 0.0}};
    EXPECT_THROW((void)phd_conditional_weights(far, zs, dead), DegenerateModel);
}

TEST(PhdRegionalStats, EmptyRegionAndNoMeasurements) {
    std::mt19937_64 rng(3);
    const WeightedParticleSet mu(random_particles(80, 3.0, rng));
    const auto model = box_model(0.7, 5.0, 4.0);
    const auto zs = random_scan(rng, 5);
    const auto cw = phd_conditional_weights(mu, zs, model);
    const auto post = phd_update_intensity(cw, mu);
    const auto empty = phd_regional_stats(cw, post, region_empty());
    EXPECT_EQ(empty.mean, 0.0);
    EXPECT_EQ(empty.variance, 0.0);

    const auto cw0 = phd_conditional_weights(mu, {}, model);
    const auto post0 = phd_update_intensity(cw0, mu);
    const Region disc = region_disc(15, 0, 10);
    double missed = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (disc.contains(mu[i].state)) missed += cw0.missed[i];
    const auto st = phd_regional_stats(cw0, post0, disc);
    EXPECT_NEAR(st.mean, missed, 1e-14);
    EXPECT_NEAR(st.variance, missed, 1e-14);
}

TEST(PhdRegionalStats, StructuralProperties) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const WeightedParticleSet mu(random_particles(200, 0.5 + 5.0 * u(rng), rng));
        const auto model = box_model(0.2 + 0.79 * u(rng), 2.0 + 6.0 * u(rng), 0.1 + 10.0 * u(rng));
        const auto zs = random_scan(rng, static_cast<std::size_t>(trial % 9));
        const auto cw = phd_conditional_weights(mu, zs, model);
        const auto post = phd_update_intensity(cw, mu);

        const Region all = region_all();
        EXPECT_NEAR(phd_regional_stats(cw, post, all).mean, post.total_mass(), 1e-12 * post.total_mass());

        const double cut = 40.0 * u(rng);
        const Region west = region_half_plane_x(cut);
        const Region east("east", [cut](const State& s) { return !(s.x < cut); });
        const auto sw = phd_regional_stats(cw, post, west);
        const auto se = phd_regional_stats(cw, post, east);
        EXPECT_NEAR(sw.mean + se.mean, phd_regional_stats(cw, post, all).mean, 1e-12);

        for (const Region& r : {all, west, east, region_disc(20, 0, 8)}) {
            const auto st = phd_regional_stats(cw, post, r);
            EXPECT_LE(st.variance, st.mean + 1e-15);
            EXPECT_GE(st.variance, 0.0);
        }
        for (std::size_t k = 0; k < zs.size(); ++k) {
            double p = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i)
                if (west.contains(mu[i].state)) p += cw.per_measurement(i, k);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
    }
}

TEST(PhdRegionalStats, ScalingLikelihoodAndClutterTogetherIsInvisible) {
    std::mt19937_64 rng(5);
    const WeightedParticleSet mu(random_particles(100, 2.0, rng));
    const auto model = box_model(0.85, 4.0, 5.0);
    ObservationModel scaled = model;
    scaled.likelihood = [model](const Measurement& z, const State& s) { return 7.5 * model.likelihood(z, s); };
    scaled.clutter_density = [model](const Measurement& z) { return 7.5 * model.clutter_density(z); };
    const auto zs = random_scan(rng, 6);
    const auto a = phd_conditional_weights(mu, zs, model);
    const auto b = phd_conditional_weights(mu, zs, scaled);
    const auto pa = phd_update_intensity(a, mu);
    const auto pb = phd_update_intensity(b, mu);
    for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(pa[i].weight, pb[i].weight, 1e-14);
    const Region r = region_disc(10, 0, 12);
    EXPECT_NEAR(phd_regional_stats(a, pa, r).variance, phd_regional_stats(b, pb, r).variance, 1e-13);
}

TEST(PhdRegionalStats, MatchesOracleForPoissonPrior) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = regvar::testing::discrete_instance(rng, 2, CardinalityDistribution::poisson(1.7, 80),
                                                       CardinalityDistribution::poisson(1.3, 80), 2);
        inst.model.clutter_rate = 1.3;
        const ExactPosterior post = posterior_exact(inst.prior, inst.measurements, inst.model);
        const WeightedParticleSet mu = inst.prior.intensity();
        const auto cw = phd_conditional_weights(mu, inst.measurements, inst.model);
        const auto upd = phd_update_intensity(cw, mu);
        for (const Region& r : inst.regions) {
            const ExactMoments ex = moments_exact(post, r);
            const RegionalStats st = phd_regional_stats(cw, upd, r);
            EXPECT_NEAR(st.mean, ex.mean, 1e-9 * std::max(1.0, ex.mean)) << r.label();
            EXPECT_NEAR(st.raw_variance, ex.variance, 1e-9 * std::max(1.0, ex.variance)) << r.label();
        }
    }
}
