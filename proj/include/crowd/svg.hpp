#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>

#include "crowd/scene.hpp"
#include "crowd/trajectory.hpp"

namespace crowd {

struct SvgOptions {
    // viewBox in world metres; derived from the data when absent.
    std::optional<Bounds> bounds;
    double person_radius{0.5};
    // Outline radius for fixed particles, keyed by id; fallback otherwise.
    std::unordered_map<ParticleId, double> fixed_radius;
    double default_fixed_radius{1.0};
};

// One filled circle per person (colour by phase) and one outlined circle per
// fixed particle.
std::string render_discs(const TrajectoryFrame& frame, const SvgOptions& options = {});

// One polyline per person joining its positions over `frames` (the caller
// picks the window), plus fixed particles of the last frame as outlines.
std::string render_trails(std::span<const TrajectoryFrame> frames, const SvgOptions& options = {});

} // namespace crowd
