#include "regvar/phd_update.hpp"

#include <algorithm>

namespace regvar {

PhdConditionalWeights phd_conditional_weights(const ConditionalWeights& cw, double clutter_rate) {
    const std::size_t J = cw.num_particles();
    const std::size_t m = cw.num_measurements();
    PhdConditionalWeights out;
    out.missed = cw.missed;
    out.per_measurement = ColumnMatrix(J, m);
    out.normalizers.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double norm = cw.detected_mass[k] + clutter_rate * cw.clutter_density[k];
        if (!(norm > 0.0))
            throw DegenerateModel("measurement has neither target support nor clutter support");
        out.normalizers[k] = norm;
        const auto src = cw.detected.col(k);
        auto dst = out.per_measurement.col(k);
        for (std::size_t i = 0; i < J; ++i) dst[i] = src[i] / norm;
    }
    return out;
}

PhdConditionalWeights phd_conditional_weights(const WeightedParticleSet& particles,
                                              std::span<const Measurement> measurements,
                                              const ObservationModel& model) {
    return phd_conditional_weights(conditional_weights(particles, measurements, model), model.clutter_rate);
}

WeightedParticleSet phd_update_intensity(const PhdConditionalWeights& cw, const WeightedParticleSet& predicted) {
    const std::size_t J = cw.missed.size();
    if (predicted.size() != J) throw InvalidInput("particle count differs from conditional weights");
    std::vector<double> w = cw.missed;
    for (std::size_t k = 0; k < cw.per_measurement.cols(); ++k) {
        const auto col = cw.per_measurement.col(k);
        for (std::size_t i = 0; i < J; ++i) w[i] += col[i];
    }
    std::vector<Particle> out(J);
    for (std::size_t i = 0; i < J; ++i) out[i] = Particle{w[i], predicted[i].state};
    return WeightedParticleSet(std::move(out));
}

RegionalStats phd_regional_stats(const PhdConditionalWeights& cw, const WeightedParticleSet& updated,
                                 const Region& region) {
    const std::size_t J = cw.missed.size();
    if (updated.size() != J) throw InvalidInput("particle count differs from conditional weights");
    const std::size_t m = cw.per_measurement.cols();

    std::vector<std::size_t> inside;
    inside.reserve(J);
    for (std::size_t i = 0; i < J; ++i)
        if (region.contains(updated[i].state)) inside.push_back(i);

    double missed = 0.0;
    for (std::size_t i : inside) missed += cw.missed[i];

    RegionalStats out;
    out.label = region.label();
    out.mean = missed;
    out.raw_variance = missed;
    for (std::size_t k = 0; k < m; ++k) {
        const auto col = cw.per_measurement.col(k);
        double p = 0.0;
        for (std::size_t i : inside) p += col[i];
        out.mean += p;
        out.raw_variance += p * (1.0 - p);
    }
    out.variance = std::max(0.0, out.raw_variance);
    return out;
}

} // namespace regvar
