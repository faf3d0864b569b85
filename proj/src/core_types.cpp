#include "regvar/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace regvar {

bool State::is_finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(vx) && std::isfinite(vy);
}

double wrap_angle(double radians) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double a = std::fmod(radians, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

Measurement make_measurement(double range, double bearing) {
    if (!std::isfinite(range) || range < 0.0)
        throw InvalidInput("measurement range must be finite and non-negative");
    if (!std::isfinite(bearing))
        throw InvalidInput("measurement bearing must be finite");
    return Measurement{range, wrap_angle(bearing)};
}

WeightedParticleSet::WeightedParticleSet(std::vector<Particle> particles)
    : particles_(std::move(particles)) {
    for (const auto& p : particles_) {
        if (!std::isfinite(p.weight) || p.weight < 0.0)
            throw InvalidInput("particle weights must be finite and non-negative");
        total_mass_ += p.weight;
    }
}

CardinalityDistribution::CardinalityDistribution() : probs_{1.0} {}

CardinalityDistribution::CardinalityDistribution(std::vector<double> weights)
    : probs_(std::move(weights)) {
    if (probs_.empty())
        throw InvalidInput("cardinality distribution needs at least one entry");
    double total = 0.0;
    for (double w : probs_) {
        if (!std::isfinite(w) || w < 0.0)
            throw InvalidInput("cardinality weights must be finite and non-negative");
        total += w;
    }
    if (total <= 0.0)
        throw InvalidInput("cardinality weights sum to zero");
    for (double& w : probs_) w /= total;
}

CardinalityDistribution CardinalityDistribution::truncated(std::vector<double> weights,
                                                           std::size_t n_max) {
    double total = 0.0;
    for (double w : weights) total += w;
    double kept = 0.0;
    for (std::size_t n = 0; n < weights.size() && n <= n_max; ++n) kept += weights[n];
    if (weights.size() > n_max + 1) weights.resize(n_max + 1);
    CardinalityDistribution out(std::move(weights));
    out.dropped_tail_ = total > 0.0 ? (total - kept) / total : 0.0;
    return out;
}

CardinalityDistribution CardinalityDistribution::poisson(double rate, std::size_t n_max) {
    if (!std::isfinite(rate) || rate < 0.0)
        throw InvalidInput("Poisson rate must be finite and non-negative");
    std::vector<double> w(n_max + 1);
    double kept = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        // log pmf keeps large n_max and rates from overflowing
        const double log_p = rate > 0.0
            ? -rate + static_cast<double>(n) * std::log(rate) - std::lgamma(static_cast<double>(n) + 1.0)
            : (n == 0 ? 0.0 : -INFINITY);
        w[n] = std::exp(log_p);
        kept += w[n];
    }
    CardinalityDistribution out(std::move(w));
    out.dropped_tail_ = std::max(0.0, 1.0 - kept);
    return out;
}

CardinalityDistribution CardinalityDistribution::point_mass(std::size_t n, std::size_t n_max) {
    if (n > n_max) throw InvalidInput("point mass beyond n_max");
    std::vector<double> w(n_max + 1, 0.0);
    w[n] = 1.0;
    return CardinalityDistribution(std::move(w));
}

double CardinalityDistribution::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n) m += static_cast<double>(n) * probs_[n];
    return m;
}

double CardinalityDistribution::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n) {
        const double d = static_cast<double>(n) - m;
        v += d * d * probs_[n];
    }
    return v;
}

} // namespace regvar
