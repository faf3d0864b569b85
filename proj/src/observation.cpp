#include "regvar/observation.hpp"

#include <cmath>
#include <numbers>

namespace regvar {

namespace {

// Residuals beyond this many standard deviations contribute exactly zero.
constexpr double kGateSigmas = 12.0;

struct GaussianRangeBearing {
    double sigma_r;
    double sigma_b;
    double norm;

    GaussianRangeBearing(double sr, double sb)
        : sigma_r(sr), sigma_b(sb), norm(1.0 / (2.0 * std::numbers::pi * sr * sb)) {}

    [[nodiscard]] double operator()(double dr, double db) const {
        const double ur = dr / sigma_r;
        const double ub = db / sigma_b;
        if (std::abs(ur) > kGateSigmas || std::abs(ub) > kGateSigmas) return 0.0;
        return norm * std::exp(-0.5 * (ur * ur + ub * ub));
    }
};

} // namespace

Measurement observe(const State& s) {
    return Measurement{std::hypot(s.x, s.y), std::atan2(s.y, s.x)};
}

double clutter_density(ClutterGeometry geometry, double fov_radius, const Measurement& z) {
    if (z.range > fov_radius || z.range < 0.0) return 0.0;
    switch (geometry) {
    case ClutterGeometry::AreaUniform:
        // polar Jacobian: r dr dtheta over pi R^2
        return z.range / (std::numbers::pi * fov_radius * fov_radius);
    case ClutterGeometry::PolarUniform:
        return 1.0 / (2.0 * std::numbers::pi * fov_radius);
    }
    return 0.0;
}

std::size_t clutter_support(double rate) {
    return static_cast<std::size_t>(std::ceil(rate + 15.0 * std::sqrt(rate) + 30.0));
}

ObservationModel range_bearing_model(const SensorParams& sensor, double p_d, double clutter_rate,
                                     ClutterGeometry geometry) {
    if (sensor.sigma_range <= 0.0 || sensor.sigma_bearing <= 0.0 || sensor.fov_radius <= 0.0)
        throw InvalidInput("sensor standard deviations and field of view must be positive");
    if (!(p_d >= 0.0 && p_d <= 1.0)) throw InvalidInput("p_d must lie in [0, 1]");
    if (!(clutter_rate >= 0.0)) throw InvalidInput("clutter rate must be non-negative");

    const double r_max = sensor.fov_radius;
    const double r2_max = r_max * r_max;
    const GaussianRangeBearing kernel(sensor.sigma_range, sensor.sigma_bearing);

    ObservationModel model;
    model.detection_probability = [p_d, r2_max](const State& s) {
        return s.x * s.x + s.y * s.y <= r2_max ? p_d : 0.0;
    };
    model.likelihood = [kernel](const Measurement& z, const State& s) {
        const Measurement h = observe(s);
        return kernel(z.range - h.range, wrap_angle(z.bearing - h.bearing));
    };
    model.clutter_density = [geometry, r_max](const Measurement& z) {
        return clutter_density(geometry, r_max, z);
    };
    model.clutter_cardinality = CardinalityDistribution::poisson(clutter_rate, clutter_support(clutter_rate));
    model.clutter_rate = clutter_rate;
    model.likelihood_batch = [kernel](std::span<const Measurement> zs, std::span<const Particle> ps,
                                      ColumnMatrix& out) {
        const double range_gate = kGateSigmas * kernel.sigma_r;
        std::vector<Measurement> h(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i) h[i] = observe(ps[i].state);
        for (std::size_t k = 0; k < zs.size(); ++k) {
            auto col = out.col(k);
            for (std::size_t i = 0; i < ps.size(); ++i) {
                const double dr = zs[k].range - h[i].range;
                if (std::abs(dr) > range_gate) {
                    col[i] = 0.0;
                    continue;
                }
                col[i] = kernel(dr, wrap_angle(zs[k].bearing - h[i].bearing));
            }
        }
    };
    return model;
}

ConditionalWeights conditional_weights(const WeightedParticleSet& particles,
                                       std::span<const Measurement> measurements,
                                       const ObservationModel& model) {
    if (!(particles.total_mass() > 0.0))
        throw DegenerateModel("predicted intensity has zero mass");
    const std::size_t J = particles.size();
    const std::size_t m = measurements.size();

    ConditionalWeights cw;
    cw.missed.resize(J);
    cw.detected = ColumnMatrix(J, m);
    cw.detected_mass.assign(m, 0.0);
    cw.clutter_density.resize(m);
    cw.total_mass = particles.total_mass();

    if (model.likelihood_batch) {
        model.likelihood_batch(measurements, particles.particles(), cw.detected);
    } else {
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < J; ++i)
                cw.detected(i, k) = model.likelihood(measurements[k], particles[i].state);
    }

    std::vector<double> pd_w(J);
    for (std::size_t i = 0; i < J; ++i) {
        const double pd = model.detection_probability(particles[i].state);
        const double w = particles[i].weight;
        cw.missed[i] = (1.0 - pd) * w;
        cw.missed_mass += cw.missed[i];
        pd_w[i] = pd * w;
    }
    for (std::size_t k = 0; k < m; ++k) {
        auto col = cw.detected.col(k);
        double mass = 0.0;
        for (std::size_t i = 0; i < J; ++i) {
            col[i] *= pd_w[i];
            mass += col[i];
        }
        cw.detected_mass[k] = mass;
        cw.clutter_density[k] = model.clutter_density(measurements[k]);
    }
    return cw;
}

} // namespace regvar
