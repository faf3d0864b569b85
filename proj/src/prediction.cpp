#include "regvar/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace regvar {

State constant_velocity(const State& s, double dt, double accel_sigma, Rng& rng) {
    double ax = 0.0;
    double ay = 0.0;
    if (accel_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, accel_sigma);
        ax = noise(rng);
        ay = noise(rng);
    }
    const double half = 0.5 * dt * dt;
    return State{s.x + s.vx * dt + half * ax, s.y + s.vy * dt + half * ay, s.vx + ax * dt, s.vy + ay * dt};
}

MotionModel default_motion_model(const MotionParams& p) {
    if (!(p.survival >= 0.0 && p.survival <= 1.0)) throw InvalidInput("survival probability must lie in [0, 1]");
    if (!(p.birth_mean >= 0.0)) throw InvalidInput("birth mean must be non-negative");
    if (!(p.accel_sigma >= 0.0)) throw InvalidInput("process noise must be non-negative");
    if (p.birth_mean > 0.0 && p.birth_particles == 0) throw InvalidInput("birth needs at least one particle");

    MotionModel m;
    const double sigma = p.accel_sigma;
    m.transition = [sigma](const State& s, double dt, Rng& rng) { return constant_velocity(s, dt, sigma, rng); };
    const double r2 = p.fov_radius * p.fov_radius;
    const double ps = p.survival;
    m.survival = [ps, r2](const State& s) { return s.x * s.x + s.y * s.y <= r2 ? ps : 0.0; };
    const double radius = p.fov_radius;
    const double vsig = p.birth_velocity_sigma;
    m.birth_sampler = [radius, vsig](Rng& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> vel(0.0, vsig);
        const double r = radius * std::sqrt(unit(rng));
        const double th = 2.0 * std::numbers::pi * unit(rng);
        State s{r * std::cos(th), r * std::sin(th), 0.0, 0.0};
        s.vx = vel(rng);
        s.vy = vel(rng);
        return s;
    };
    m.birth_mean = p.birth_mean;
    m.birth_particles = p.birth_particles;
    return m;
}

WeightedParticleSet predict_particles(const WeightedParticleSet& particles, const MotionModel& model, double dt,
                                      Rng& rng) {
    std::vector<Particle> out;
    out.reserve(particles.size() + model.birth_particles);
    for (const Particle& p : particles) {
        const double ps = model.survival ? model.survival(p.state) : 1.0;
        const State next = model.transition ? model.transition(p.state, dt, rng) : p.state;
        out.push_back(Particle{p.weight * ps, next});
    }
    if (model.birth_mean > 0.0 && model.birth_particles > 0) {
        if (!model.birth_sampler) throw InvalidInput("birth mass without a birth sampler");
        const double w = model.birth_mean / static_cast<double>(model.birth_particles);
        for (std::size_t j = 0; j < model.birth_particles; ++j) out.push_back(Particle{w, model.birth_sampler(rng)});
    }
    return WeightedParticleSet(std::move(out));
}

WeightedParticleSet predict_particles(const WeightedParticleSet& particles, const MotionModel& model, double dt,
                                      std::uint64_t seed) {
    Rng rng(seed);
    return predict_particles(particles, model, dt, rng);
}

CardinalityDistribution predict_cardinality(const CardinalityDistribution& rho, double p_s,
                                            const CardinalityDistribution& birth, std::size_t n_max) {
    if (!(p_s >= 0.0 && p_s <= 1.0)) throw InvalidInput("survival probability must lie in [0, 1]");
    const std::size_t n_in = rho.n_max();
    std::vector<double> survived(n_in + 1, 0.0);
    const double log_p = p_s > 0.0 ? std::log(p_s) : -INFINITY;
    const double log_q = p_s < 1.0 ? std::log1p(-p_s) : -INFINITY;
    for (std::size_t n = 0; n <= n_in; ++n) {
        const double r = rho(n);
        if (r == 0.0) continue;
        for (std::size_t j = 0; j <= n; ++j) {
            // C(n, j) p^j q^(n-j), with 0^0 = 1
            double log_term = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
            if (j > 0) log_term += static_cast<double>(j) * log_p;
            if (n > j) log_term += static_cast<double>(n - j) * log_q;
            survived[j] += r * std::exp(log_term);
        }
    }
    const std::size_t n_b = birth.n_max();
    std::vector<double> out(n_in + n_b + 1, 0.0);
    for (std::size_t j = 0; j <= n_in; ++j) {
        if (survived[j] == 0.0) continue;
        for (std::size_t b = 0; b <= n_b; ++b) out[j + b] += survived[j] * birth(b);
    }
    return CardinalityDistribution::truncated(std::move(out), n_max);
}

WeightedParticleSet resample_multinomial(const WeightedParticleSet& particles, std::size_t count, Rng& rng) {
    const double mass = particles.total_mass();
    if (count == 0 || !(mass > 0.0)) return WeightedParticleSet{};
    // Sorted uniforms from normalized exponential spacings, then one sweep of the CDF.
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> u(count);
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        acc += expo(rng);
        u[j] = acc;
    }
    const double total = acc + expo(rng);
    std::vector<Particle> out;
    out.reserve(count);
    const double w = mass / static_cast<double>(count);
    std::size_t i = 0;
    double cdf = particles[0].weight / mass;
    for (std::size_t j = 0; j < count; ++j) {
        const double target = u[j] / total;
        while (cdf < target && i + 1 < particles.size()) cdf += particles[++i].weight / mass;
        out.push_back(Particle{w, particles[i].state});
    }
    return WeightedParticleSet(std::move(out));
}

} // namespace regvar
