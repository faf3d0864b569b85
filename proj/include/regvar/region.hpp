#pragma once

#include "regvar/core_types.hpp"

#include <functional>
#include <memory>
#include <string>

namespace regvar {

/// Membership predicate over the target space. Regions never carry geometry
/// beyond what is needed to answer "is this state inside".
class Region {
public:
    using Predicate = std::function<bool(const State&)>;

    Region(std::string label, Predicate contains);

    [[nodiscard]] bool contains(const State& s) const { return (*contains_)(s); }
    [[nodiscard]] const std::string& label() const { return label_; }

private:
    std::string label_;
    std::shared_ptr<const Predicate> contains_;
};

/// Whole target space.
[[nodiscard]] Region region_all(std::string label = "all");
[[nodiscard]] Region region_empty(std::string label = "empty");
/// Position inside the closed disc of given radius around (cx, cy).
[[nodiscard]] Region region_disc(double cx, double cy, double radius, std::string label = {});
/// inner < |p - c| <= outer.
[[nodiscard]] Region region_annulus(double cx, double cy, double inner, double outer,
                                    std::string label = {});
/// Sensor field of view: disc of `radius` centred on the origin.
[[nodiscard]] Region region_fov(double radius, std::string label = "fov");
/// Position with x < threshold.
[[nodiscard]] Region region_half_plane_x(double threshold, std::string label = {});

[[nodiscard]] Region region_intersection(const Region& a, const Region& b);
[[nodiscard]] Region region_union(const Region& a, const Region& b);

/// N(B): number of states of the realisation inside the region.
[[nodiscard]] std::size_t count_in_region(const MultiTargetConfig& config, const Region& region);

} // namespace regvar
