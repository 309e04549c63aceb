#include "crowd/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include "crowd/neighborhood.hpp"

namespace crowd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Direction assigned to the lower id of a coincident pair.
Vec2 coincident_direction(ParticleId a, ParticleId b) {
    const std::uint64_t lo = std::min(a, b);
    const std::uint64_t hi = std::max(a, b);
    const double turn = static_cast<double>(splitmix64((lo << 32) | hi) >> 11) * 0x1.0p-53;
    const double angle = 2.0 * std::numbers::pi * turn;
    return {std::cos(angle), std::sin(angle)};
}

// Adds the pair force to acc when the pair interacts; leaves acc untouched
// otherwise so that skipped pairs never alter the sum.
void accumulate_pair(const ParticleState& self, const ParticleState& other, const ForceParams& params, Vec2& acc) {
    const InteractionProfile law = combine_profiles(self, other);
    const Vec2 delta = self.pos - other.pos;
    if (norm2(delta) >= law.d3 * law.d3) {
        return;
    }
    acc += pair_force(self, other, law, params);
}

void check_finite(const ParticleState& p, std::int64_t step) {
    if (!is_finite(p.pos) || !is_finite(p.vel)) {
        throw NumericalError(p.id, step);
    }
}

} // namespace

double elastic_magnitude(const InteractionProfile& law, double dist, double amplification) {
    if (dist >= law.d3) {
        return 0.0;
    }
    if (dist >= law.d2) {
        return law.f2 * (law.d3 - dist) / (law.d3 - law.d2);
    }
    const double slope_b = (law.f1 - law.f2) / (law.d2 - law.d1);
    if (dist >= law.d1) {
        return law.f2 + slope_b * (law.d2 - dist);
    }
    return law.f1 + slope_b * amplification * (law.d1 - dist);
}

double zone_viscosity(const InteractionProfile& law, double dist) {
    if (dist >= law.d3) {
        return 0.0;
    }
    if (dist >= law.d2) {
        return law.z_a;
    }
    if (dist >= law.d1) {
        return law.z_b;
    }
    return law.z_c;
}

InteractionProfile combine_profiles(const ParticleState& a, const ParticleState& b) {
    if (a.kind == ParticleKind::fixed) {
        return a.profile;
    }
    if (b.kind == ParticleKind::fixed) {
        return b.profile;
    }
    const auto& p = a.profile;
    const auto& q = b.profile;
    return {0.5 * (p.d1 + q.d1),   0.5 * (p.d2 + q.d2),   0.5 * (p.d3 + q.d3),   0.5 * (p.f1 + q.f1),
            0.5 * (p.f2 + q.f2),   0.5 * (p.z_a + q.z_a), 0.5 * (p.z_b + q.z_b), 0.5 * (p.z_c + q.z_c)};
}

Vec2 pair_force(const ParticleState& self, const ParticleState& other, const InteractionProfile& law,
                const ForceParams& params) {
    const Vec2 delta = self.pos - other.pos;
    double dist = norm(delta);
    if (dist >= law.d3) {
        return {};
    }
    Vec2 u;
    if (dist > 0.0) {
        u = delta / dist;
    } else {
        dist = kCoincidentDistance;
        u = coincident_direction(self.id, other.id);
        if (self.id > other.id) {
            u = -u;
        }
    }
    const Vec2 rel = self.vel - other.vel;
    const double speed = params.literal_damping ? norm(rel) : std::max(0.0, dot(rel, -u));
    const double magnitude = elastic_magnitude(law, dist, params.amplification) + zone_viscosity(law, dist) * speed;
    return u * magnitude;
}

Vec2 target_force(const ParticleState& p, const TargetSpec& t) {
    const Vec2 to_target = t.pos - p.pos;
    const double d = norm(to_target);
    Vec2 force = p.vel * -t.z_t;
    if (d > 0.0) {
        force += to_target * (std::min(t.k_t * d, t.f_sat) / d);
    }
    return force;
}

NumericalError::NumericalError(ParticleId id, std::int64_t step)
    : std::runtime_error("non-finite state for particle " + std::to_string(id) + " at step " + std::to_string(step) +
                         " (time step too large for the interaction stiffness?)"),
      id_(id), step_(step) {}

World make_world(const Scene& scene) {
    World world;
    world.rng = Rng(scene.seed);
    for (const auto& obstacle : scene.obstacles) {
        for (auto& p : build_obstacle_particles(obstacle)) {
            p.id = static_cast<ParticleId>(world.particles.size());
            world.particles.push_back(p);
        }
    }
    world.pending.reserve(scene.injectors.size());
    for (const auto& inj : scene.injectors) {
        world.pending.push_back({std::max(inj.count, 0), 0});
    }
    inject(world, scene);
    return world;
}

void inject(World& world, const Scene& scene) {
    for (std::size_t i = 0; i < scene.injectors.size(); ++i) {
        const auto& inj = scene.injectors[i];
        auto& state = world.pending[i];
        const auto target = find_target(scene, inj.target_id);
        // Spawn k is due at k / rate; the slack absorbs step_index * dt rounding.
        while (state.remaining > 0 && static_cast<double>(state.spawned) <= inj.rate * world.time + 1e-9) {
            const double r = inj.radius * std::sqrt(world.rng.uniform01());
            const double angle = 2.0 * std::numbers::pi * world.rng.uniform01();
            ParticleState p;
            p.id = static_cast<ParticleId>(world.particles.size());
            p.kind = ParticleKind::person;
            p.pos = inj.center + Vec2{r * std::cos(angle), r * std::sin(angle)};
            p.profile = sample_profile(inj.profile_min, inj.profile_max, world.rng);
            p.target = target;
            world.particles.push_back(p);
            --state.remaining;
            ++state.spawned;
        }
    }
}

std::vector<Vec2> compute_forces(const World& world, const Scene& scene, const StepOptions& options) {
    const auto& particles = world.particles;
    const std::size_t n = particles.size();
    std::vector<Vec2> forces(n);

    SpatialGrid grid;
    double reach = 0.0;
    if (options.use_grid) {
        std::vector<GridEntry> entries;
        entries.reserve(n);
        for (const auto& p : particles) {
            entries.push_back({p.id, p.pos});
        }
        reach = max_interaction_range(scene);
        grid = SpatialGrid::rebuild(entries, reach > 0.0 ? reach : 1.0);
    }

    const auto gather = [&](std::size_t begin, std::size_t end) {
        std::vector<ParticleId> neighbors;
        for (std::size_t i = begin; i < end; ++i) {
            const ParticleState& self = particles[i];
            if (self.kind == ParticleKind::fixed) {
                continue;
            }
            Vec2 acc;
            if (options.use_grid) {
                grid.neighbors_within(self.pos, grid.cell_size(), self.id, neighbors);
                for (ParticleId j : neighbors) {
                    accumulate_pair(self, particles[j], options.forces, acc);
                }
            } else {
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != i) {
                        accumulate_pair(self, particles[j], options.forces, acc);
                    }
                }
            }
            if (self.target) {
                acc += target_force(self, scene.targets[*self.target]);
            }
            forces[i] = acc;
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        gather(0, n);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        const std::size_t chunk = (n + threads - 1) / threads;
        for (std::size_t begin = 0; begin < n; begin += chunk) {
            pool.emplace_back(gather, begin, std::min(n, begin + chunk));
        }
    }
    return forces;
}

void step(World& world, const Scene& scene, const StepOptions& options) {
    const std::vector<Vec2> forces = compute_forces(world, scene, options);
    const double dt = scene.dt;
    const std::int64_t next = world.step_index + 1;

    for (std::size_t i = 0; i < world.particles.size(); ++i) {
        ParticleState& p = world.particles[i];
        if (p.kind == ParticleKind::fixed) {
            continue;
        }
        p.vel += forces[i] * dt;
        p.pos += p.vel * dt;
        check_finite(p, next);
    }

    world.step_index = next;
    world.time = static_cast<double>(next) * dt;
    inject(world, scene);

    for (auto& p : world.particles) {
        if (p.kind != ParticleKind::person || p.phase != Phase::active || !p.target) {
            continue;
        }
        const TargetSpec& t = scene.targets[*p.target];
        if (norm(p.pos - t.pos) < t.r_capture && norm(p.vel) < t.v_capture) {
            p.phase = Phase::arrived;
        }
    }
}

TrajectoryFrame snapshot(const World& world) {
    TrajectoryFrame frame;
    frame.step = world.step_index;
    frame.time = world.time;
    frame.records.reserve(world.particles.size());
    for (const auto& p : world.particles) {
        frame.records.push_back({p.id, p.kind, p.pos, p.vel, p.phase});
    }
    return frame;
}

double kinetic_energy(const World& world) {
    double e = 0.0;
    for (const auto& p : world.particles) {
        if (p.kind == ParticleKind::person) {
            e += 0.5 * norm2(p.vel);
        }
    }
    return e;
}

std::int64_t total_steps(const Scene& scene) {
    return static_cast<std::int64_t>(std::ceil(scene.duration / scene.dt - 1e-9));
}

RunSummary simulate(const Scene& scene, const StepOptions& options,
                    const std::function<void(const TrajectoryFrame&)>& sink) {
    const auto start = std::chrono::steady_clock::now();
    RunSummary summary;
    World world = make_world(scene);
    const std::int64_t steps = total_steps(scene);
    const std::int64_t stride = std::max(scene.output_stride, 1);

    sink(snapshot(world));
    ++summary.frames;
    for (std::int64_t s = 1; s <= steps; ++s) {
        step(world, scene, options);
        if (s % stride == 0) {
            sink(snapshot(world));
            ++summary.frames;
        }
    }
    summary.steps = steps;
    for (const auto& st : world.pending) {
        summary.spawned += static_cast<std::size_t>(st.spawned);
    }
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

const FrameRecord* TrajectoryFrame::find(ParticleId id) const {
    const auto it = std::lower_bound(records.begin(), records.end(), id,
                                     [](const FrameRecord& r, ParticleId v) { return r.id < v; });
    return (it != records.end() && it->id == id) ? &*it : nullptr;
}

} // namespace crowd
