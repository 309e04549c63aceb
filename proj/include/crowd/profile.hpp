#pragma once

namespace crowd {

// Zone-C stiffness multiplier over the zone-B slope.
inline constexpr double kDefaultAmplification = 10.0;

// Distance thresholds, knot forces and per-zone viscosities of the piecewise
// interaction law. Zone C is [0, d1), zone B is [d1, d2), zone A is [d2, d3).
struct InteractionProfile {
    double d1{1.0};  // impenetrable threshold
    double d2{3.0};  // avoidance threshold
    double d3{5.0};  // anticipation threshold
    double f1{60.0}; // elastic magnitude at d1
    double f2{6.0};  // elastic magnitude at d2
    double z_a{1.0};
    double z_b{2.0};
    double z_c{4.0};

    bool operator==(const InteractionProfile&) const = default;
};

// Calibration for a large open place: 1 m / 3 m / 5 m thresholds.
inline constexpr InteractionProfile default_profile() { return {}; }

// Jitter bounds of +-20% on each threshold gap around the default profile.
inline constexpr InteractionProfile default_profile_min() {
    InteractionProfile p;
    p.d1 = 0.8;
    p.d2 = 2.4;
    p.d3 = 4.0;
    return p;
}

inline constexpr InteractionProfile default_profile_max() {
    InteractionProfile p;
    p.d1 = 1.2;
    p.d2 = 3.6;
    p.d3 = 6.0;
    return p;
}

bool is_valid(const InteractionProfile& p);

// Slope of the elastic curve inside zone C.
inline double inner_slope(const InteractionProfile& p, double amplification = kDefaultAmplification) {
    return (p.f1 - p.f2) / (p.d2 - p.d1) * amplification;
}

// Largest zone-C slope any profile sampled from [lo, hi] can have.
double max_inner_slope(const InteractionProfile& lo, const InteractionProfile& hi,
                       double amplification = kDefaultAmplification);

// Largest d3 any profile sampled from [lo, hi] can have.
double max_reach(const InteractionProfile& lo, const InteractionProfile& hi);

} // namespace crowd
