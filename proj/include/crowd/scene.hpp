#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crowd/profile.hpp"
#include "crowd/rng.hpp"
#include "crowd/vec2.hpp"

namespace crowd {

using ParticleId = std::uint32_t;

enum class ParticleKind { person, fixed };
enum class Phase { active, arrived };

struct ParticleState {
    ParticleId id{0};
    ParticleKind kind{ParticleKind::person};
    Vec2 pos;
    Vec2 vel;
    InteractionProfile profile;
    std::optional<std::size_t> target; // index into Scene::targets, persons only
    Phase phase{Phase::active};

    bool operator==(const ParticleState&) const = default;
};

struct TargetSpec {
    std::string id;
    Vec2 pos;
    double k_t{1.0};
    double z_t{2.0};
    double f_sat{3.0};
    double r_capture{1.0};
    double v_capture{0.3};

    bool operator==(const TargetSpec&) const = default;
};

struct InjectorSpec {
    std::string id;
    Vec2 center;
    double radius{0.0};
    int count{0};
    double rate{1.0}; // persons per second
    std::string target_id;
    InteractionProfile profile_min{default_profile_min()};
    InteractionProfile profile_max{default_profile_max()};

    bool operator==(const InjectorSpec&) const = default;
};

struct ObstacleSpec {
    std::string id;
    Vec2 center;
    double w{1.0};
    double h{1.0};
    double angle_deg{0.0};
    double spacing{2.0};
    InteractionProfile profile{default_profile()};

    bool operator==(const ObstacleSpec&) const = default;
};

struct Bounds {
    Vec2 center;
    double w{0.0};
    double h{0.0};

    Vec2 lower() const { return {center.x - 0.5 * w, center.y - 0.5 * h}; }
    Vec2 upper() const { return {center.x + 0.5 * w, center.y + 0.5 * h}; }

    bool operator==(const Bounds&) const = default;
};

struct Scene {
    Bounds bounds;
    std::vector<ObstacleSpec> obstacles;
    std::vector<InjectorSpec> injectors;
    std::vector<TargetSpec> targets;
    double dt{0.05};
    double duration{0.0};
    std::uint64_t seed{0};
    int output_stride{1};

    bool operator==(const Scene&) const = default;
};

// Resolves a target id; nullopt when absent.
std::optional<std::size_t> find_target(const Scene& scene, std::string_view id);

// Upper bound on any interaction range in the scene (grid cell size).
double max_interaction_range(const Scene& scene);

struct Violation {
    std::string code;
    std::string message;
};

std::vector<Violation> validate_scene(const Scene& scene, double amplification = kDefaultAmplification);

class SceneError : public std::runtime_error {
public:
    enum class Kind { syntax, schema, reference, invalid };

    SceneError(Kind kind, std::string path, const std::string& message,
               std::vector<Violation> violations = {});

    Kind kind() const { return kind_; }
    const std::string& path() const { return path_; }
    const std::vector<Violation>& violations() const { return violations_; }

private:
    Kind kind_;
    std::string path_;
    std::vector<Violation> violations_;
};

// Structural parse: syntax, strict schema and cross-references. Does not run
// validate_scene, so callers can apply overrides first.
Scene parse_scene_document(std::string_view text);

// parse_scene_document followed by validate_scene; throws SceneError(invalid)
// carrying every violation.
Scene parse_scene(std::string_view text);

// Fixed particles on the rectangle's medial segment. Ids are left at 0 for the
// caller to assign.
std::vector<ParticleState> build_obstacle_particles(const ObstacleSpec& spec);

// Uniform per-field draw between two bounding profiles. Threshold ordering is
// kept by drawing d1 and the two gaps rather than the thresholds themselves.
InteractionProfile sample_profile(const InteractionProfile& lo, const InteractionProfile& hi, Rng& rng);

std::string_view to_string(ParticleKind kind);
std::string_view to_string(Phase phase);

} // namespace crowd
