#include "crowd/profile.hpp"

#include <algorithm>
#include <cmath>

namespace crowd {

bool is_valid(const InteractionProfile& p) {
    const double fields[] = {p.d1, p.d2, p.d3, p.f1, p.f2, p.z_a, p.z_b, p.z_c};
    for (double v : fields) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return 0.0 < p.d1 && p.d1 < p.d2 && p.d2 < p.d3 && p.f1 > p.f2 && p.f2 > 0.0 && p.z_a >= 0.0 &&
           p.z_b >= 0.0 && p.z_c >= 0.0;
}

double max_inner_slope(const InteractionProfile& lo, const InteractionProfile& hi, double amplification) {
    const double min_gap = std::min(lo.d2 - lo.d1, hi.d2 - hi.d1);
    const double max_drop = std::max(lo.f1 - lo.f2, hi.f1 - hi.f2);
    return max_drop / min_gap * amplification;
}

double max_reach(const InteractionProfile& lo, const InteractionProfile& hi) {
    const double g2 = std::max(lo.d2 - lo.d1, hi.d2 - hi.d1);
    const double g3 = std::max(lo.d3 - lo.d2, hi.d3 - hi.d2);
    return std::max({lo.d3, hi.d3, std::max(lo.d1, hi.d1) + g2 + g3});
}

} // namespace crowd
