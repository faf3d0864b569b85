#include "regvar/region.hpp"

#include <cmath>
#include <sstream>

namespace regvar {

Region::Region(std::string label, Predicate contains)
    : label_(std::move(label)), contains_(std::make_shared<const Predicate>(std::move(contains))) {
    if (!*contains_) throw InvalidInput("region predicate must be callable");
}

Region region_all(std::string label) {
    return Region(std::move(label), [](const State&) { return true; });
}

Region region_empty(std::string label) {
    return Region(std::move(label), [](const State&) { return false; });
}

Region region_disc(double cx, double cy, double radius, std::string label) {
    if (label.empty()) {
        std::ostringstream os;
        os << "disc(" << cx << "," << cy << "," << radius << ")";
        label = os.str();
    }
    const double r2 = radius * radius;
    return Region(std::move(label), [cx, cy, r2](const State& s) {
        const double dx = s.x - cx;
        const double dy = s.y - cy;
        return dx * dx + dy * dy <= r2;
    });
}

Region region_annulus(double cx, double cy, double inner, double outer, std::string label) {
    if (label.empty()) {
        std::ostringstream os;
        os << "annulus(" << cx << "," << cy << "," << inner << "," << outer << ")";
        label = os.str();
    }
    const double i2 = inner * inner;
    const double o2 = outer * outer;
    return Region(std::move(label), [cx, cy, i2, o2](const State& s) {
        const double dx = s.x - cx;
        const double dy = s.y - cy;
        const double d2 = dx * dx + dy * dy;
        return d2 > i2 && d2 <= o2;
    });
}

Region region_fov(double radius, std::string label) {
    return region_disc(0.0, 0.0, radius, std::move(label));
}

Region region_half_plane_x(double threshold, std::string label) {
    if (label.empty()) {
        std::ostringstream os;
        os << "x<" << threshold;
        label = os.str();
    }
    return Region(std::move(label), [threshold](const State& s) { return s.x < threshold; });
}

Region region_intersection(const Region& a, const Region& b) {
    return Region("(" + a.label() + ")&(" + b.label() + ")",
                  [a, b](const State& s) { return a.contains(s) && b.contains(s); });
}

Region region_union(const Region& a, const Region& b) {
    return Region("(" + a.label() + ")|(" + b.label() + ")",
                  [a, b](const State& s) { return a.contains(s) || b.contains(s); });
}

std::size_t count_in_region(const MultiTargetConfig& config, const Region& region) {
    std::size_t n = 0;
    for (const auto& s : config.states)
        if (region.contains(s)) ++n;
    return n;
}

} // namespace regvar
