#include "regvar/smc_filter.hpp"

#include <algorithm>
#include <cmath>

namespace regvar {

std::string_view to_string(FilterKind kind) { return kind == FilterKind::Phd ? "phd" : "cphd"; }

FilterKind parse_filter_kind(std::string_view name) {
    if (name == "phd") return FilterKind::Phd;
    if (name == "cphd") return FilterKind::Cphd;
    throw InvalidInput("filter must be 'phd' or 'cphd'");
}

UpdateSnapshot::UpdateSnapshot(ConditionalWeights cw, CphdUpdateResult cphd)
    : kind_(FilterKind::Cphd),
      cw_(std::move(cw)),
      correctors_(std::move(cphd.correctors)),
      intensity_(std::move(cphd.intensity)),
      cardinality_(std::move(cphd.cardinality)) {}

UpdateSnapshot::UpdateSnapshot(ConditionalWeights cw, PhdConditionalWeights phd, WeightedParticleSet intensity)
    : kind_(FilterKind::Phd), cw_(std::move(cw)), phd_(std::move(phd)), intensity_(std::move(intensity)) {}

RegionalStats UpdateSnapshot::stats(const Region& region) const {
    if (kind_ == FilterKind::Cphd) return cphd_regional_stats(cw_, correctors_, intensity_, region);
    return phd_regional_stats(phd_, intensity_, region);
}

SmcFilter::SmcFilter(FilterConfig config, ObservationModel model, std::uint64_t seed)
    : config_(std::move(config)),
      model_(std::move(model)),
      motion_(default_motion_model(config_.motion)),
      rng_(seed) {
    if (config_.n_max == 0) throw InvalidInput("n_max must be positive");
    if (config_.particles_per_target == 0) throw InvalidInput("particles_per_target must be positive");
    birth_cardinality_ = CardinalityDistribution::poisson(motion_.birth_mean, config_.n_max);
    rho_ = CardinalityDistribution::point_mass(0, config_.n_max);
}

UpdateSnapshot SmcFilter::step(std::span<const Measurement> measurements, double dt) {
    const double prior_mass = particles_.total_mass();
    WeightedParticleSet predicted = predict_particles(particles_, motion_, dt, rng_);

    UpdateSnapshot snap;
    if (config_.kind == FilterKind::Cphd) {
        // Survival varies with position, so thin the cardinality with the mass-averaged p_s.
        double survived = 0.0;
        for (std::size_t i = 0; i < particles_.size(); ++i) survived += predicted[i].weight;
        const double p_s = prior_mass > 0.0 ? std::clamp(survived / prior_mass, 0.0, 1.0) : 1.0;
        const CardinalityDistribution rho_pred =
            predict_cardinality(rho_, p_s, birth_cardinality_, config_.n_max);
        CphdUpdateResult r = cphd_update(predicted, rho_pred, measurements, model_);
        rho_ = r.cardinality;
        ConditionalWeights cw = std::move(r.weights);
        snap = UpdateSnapshot(std::move(cw), std::move(r));
    } else {
        ConditionalWeights cw = conditional_weights(predicted, measurements, model_);
        PhdConditionalWeights phd = phd_conditional_weights(cw, model_.clutter_rate);
        WeightedParticleSet updated = phd_update_intensity(phd, predicted);
        snap = UpdateSnapshot(std::move(cw), std::move(phd), std::move(updated));
    }

    const double mass = snap.intensity().total_mass();
    const auto wanted = static_cast<std::size_t>(std::ceil(static_cast<double>(config_.particles_per_target) * mass));
    const std::size_t count = std::clamp(wanted, config_.min_particles, config_.max_particles);
    particles_ = resample_multinomial(snap.intensity(), count, rng_);
    return snap;
}

} // namespace regvar
