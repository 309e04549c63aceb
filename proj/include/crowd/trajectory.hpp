#pragma once

#include <cstdint>
#include <vector>

#include "crowd/scene.hpp"
#include "crowd/vec2.hpp"

namespace crowd {

struct FrameRecord {
    ParticleId id{0};
    ParticleKind kind{ParticleKind::person};
    Vec2 pos;
    Vec2 vel;
    Phase phase{Phase::active};

    bool operator==(const FrameRecord&) const = default;
};

// Snapshot of every particle at one emitted step, records in ascending id.
struct TrajectoryFrame {
    std::int64_t step{0};
    double time{0.0};
    std::vector<FrameRecord> records;

    const FrameRecord* find(ParticleId id) const;

    bool operator==(const TrajectoryFrame&) const = default;
};

} // namespace crowd
