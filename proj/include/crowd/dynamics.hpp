#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowd/profile.hpp"
#include "crowd/rng.hpp"
#include "crowd/scene.hpp"
#include "crowd/trajectory.hpp"
#include "crowd/vec2.hpp"

namespace crowd {

// Separation used in place of zero for coincident particles.
inline constexpr double kCoincidentDistance = 1e-6;

struct ForceParams {
    double amplification{kDefaultAmplification};
    // Damp with the norm of the relative velocity (approach and recession
    // alike) instead of the clamped closing speed.
    bool literal_damping{false};
};

// Piecewise-linear elastic repulsion through (d1, f1), (d2, f2), (d3, 0),
// continued below d1 with the amplified zone-B slope. Zero for dist >= d3.
double elastic_magnitude(const InteractionProfile& law, double dist,
                         double amplification = kDefaultAmplification);

// Viscosity of the zone containing dist; zero beyond d3.
double zone_viscosity(const InteractionProfile& law, double dist);

// Effective law for a pair: mean of two persons, the fixed particle's own
// profile when one side is fixed.
InteractionProfile combine_profiles(const ParticleState& a, const ParticleState& b);

// Force exerted on `self` by `other`. Exactly antisymmetric in its arguments.
Vec2 pair_force(const ParticleState& self, const ParticleState& other, const InteractionProfile& law,
                const ForceParams& params = {});

// Saturated visco-elastic pull toward the target.
Vec2 target_force(const ParticleState& p, const TargetSpec& t);

// Largest stable step for semi-implicit Euler on stiffness k: half the
// critical step 2*sqrt(m/k).
inline double stable_timestep_limit(double stiffness, double mass = 1.0) {
    return 0.5 * 2.0 * std::sqrt(mass / stiffness);
}

struct InjectorState {
    int remaining{0};
    int spawned{0};

    bool operator==(const InjectorState&) const = default;
};

struct World {
    double time{0.0};
    std::int64_t step_index{0};
    std::vector<ParticleState> particles; // ascending id, id == index
    std::vector<InjectorState> pending;   // one per scene injector
    Rng rng;
};

struct StepOptions {
    ForceParams forces;
    unsigned threads{1};
    bool use_grid{true};
};

class NumericalError : public std::runtime_error {
public:
    NumericalError(ParticleId id, std::int64_t step);

    ParticleId particle() const { return id_; }
    std::int64_t step() const { return step_; }

private:
    ParticleId id_;
    std::int64_t step_;
};

// Fixed obstacle particles first (ids 0..), then the t = 0 spawns.
World make_world(const Scene& scene);

// Spawns every person whose scheduled time k / rate has been reached.
void inject(World& world, const Scene& scene);

// Forces on every person at the current state, ascending-id accumulation.
std::vector<Vec2> compute_forces(const World& world, const Scene& scene, const StepOptions& options = {});

// One semi-implicit Euler step, then injection, then arrival.
// Throws NumericalError when a state component becomes non-finite.
void step(World& world, const Scene& scene, const StepOptions& options = {});

TrajectoryFrame snapshot(const World& world);

double kinetic_energy(const World& world);

std::int64_t total_steps(const Scene& scene);

struct RunSummary {
    std::int64_t steps{0};
    std::int64_t frames{0};
    std::size_t spawned{0};
    double wall_seconds{0.0};
};

// Runs the whole scene, emitting a frame at step 0 and every output_stride
// steps after it.
RunSummary simulate(const Scene& scene, const StepOptions& options,
                    const std::function<void(const TrajectoryFrame&)>& sink);

} // namespace crowd
