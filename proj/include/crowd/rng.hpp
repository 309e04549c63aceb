#pragma once

#include <cstdint>
#include <random>

namespace crowd {

// Seeded generator with platform-independent draws. std::uniform_real_distribution
// is implementation-defined, so the mapping to [0,1) is done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi]; returns lo exactly when lo == hi.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t next_u64() { return engine_(); }

    bool operator==(const Rng&) const = default;

private:
    std::mt19937_64 engine_;
};

} // namespace crowd
