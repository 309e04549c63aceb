#pragma once

#include <string>

#include "crowd/dynamics.hpp"
#include "crowd/scene.hpp"

namespace crowd::testing {

inline ParticleState person(ParticleId id, Vec2 pos, Vec2 vel = {}, InteractionProfile profile = default_profile()) {
    ParticleState p;
    p.id = id;
    p.kind = ParticleKind::person;
    p.pos = pos;
    p.vel = vel;
    p.profile = profile;
    return p;
}

inline ParticleState fixed(ParticleId id, Vec2 pos, InteractionProfile profile = default_profile()) {
    ParticleState p = person(id, pos, {}, profile);
    p.kind = ParticleKind::fixed;
    return p;
}

// Valid scene with one target and no injectors.
inline Scene base_scene() {
    Scene s;
    s.bounds = {{0.0, 0.0}, 100.0, 100.0};
    s.duration = 10.0;
    s.dt = 0.05;
    TargetSpec t;
    t.id = "T";
    t.pos = {40.0, 0.0};
    s.targets.push_back(t);
    return s;
}

inline InjectorSpec injector(std::string id, Vec2 center, int count, double rate, std::string target,
                             InteractionProfile lo = default_profile_min(),
                             InteractionProfile hi = default_profile_max()) {
    InjectorSpec inj;
    inj.id = std::move(id);
    inj.center = center;
    inj.count = count;
    inj.rate = rate;
    inj.target_id = std::move(target);
    inj.profile_min = lo;
    inj.profile_max = hi;
    return inj;
}

} // namespace crowd::testing
