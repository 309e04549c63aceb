#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "crowd/neighborhood.hpp"
#include "crowd/trajectory.hpp"

namespace crowd {

// Person counts per square cell; vacant cells are implicitly zero.
struct DensityGrid {
    double cell{1.0};
    std::map<CellCoord, std::size_t> counts;

    double density(const CellCoord& c) const;
    std::size_t total() const;
    // Mean density over cells holding at least one person; 0 when empty.
    double mean_occupied() const;
};

DensityGrid density_grid(const TrajectoryFrame& frame, double cell);

struct JamCluster {
    std::vector<ParticleId> members; // ascending
    Vec2 centroid;
    std::size_t size{0};
    // sqrt of the ratio of principal variances of member positions.
    double aspect_ratio{1.0};
};

inline constexpr double kDefaultJamSpeed = 0.2;
inline constexpr double kDefaultJamLink = 1.5;
inline constexpr std::size_t kMinJamSize = 3;
inline constexpr double kDefaultQueueAspect = 3.0;

// Connected components of slow active persons linked by distance < r_link.
// Components smaller than min_size are dropped. Sorted by first member id.
std::vector<JamCluster> detect_jams(const TrajectoryFrame& frame, double v_jam = kDefaultJamSpeed,
                                    double r_link = kDefaultJamLink, std::size_t min_size = kMinJamSize);

// A jam elongated enough to read as a queue.
inline bool is_queue(const JamCluster& c, double min_aspect = kDefaultQueueAspect) {
    return c.aspect_ratio >= min_aspect;
}

// Jam followed across frames by member overlap.
struct JamTrack {
    std::size_t id{0};
    double onset{0.0};
    double end{0.0};
    std::size_t peak_size{0};

    double duration() const { return end - onset; }
};

std::vector<JamTrack> track_jams(std::span<const TrajectoryFrame> frames, double v_jam = kDefaultJamSpeed,
                                 double r_link = kDefaultJamLink, std::size_t min_size = kMinJamSize);

struct Gate {
    Vec2 a;
    Vec2 b;
};

struct FlowWindow {
    double window_start{0.0};
    long long signed_count{0}; // crossings toward the gate's left normal count +1
    long long gross{0};
};

std::vector<FlowWindow> flow_rate(std::span<const TrajectoryFrame> frames, const Gate& gate, double window);

struct CurlField {
    double cell{1.0};
    std::map<CellCoord, double> curl; // defined cells only
    double mean_abs{0.0};             // 0 when no cell is defined

    bool defined() const { return !curl.empty(); }
};

struct Region {
    Vec2 lower;
    Vec2 upper;

    bool contains(const Vec2& p) const {
        return p.x >= lower.x && p.x <= upper.x && p.y >= lower.y && p.y <= upper.y;
    }
};

// Central-difference curl of per-cell mean person velocity. A cell is defined
// when its four axis neighbours are all occupied. With a region, only persons
// inside it are binned.
CurlField curl_field(const TrajectoryFrame& frame, double cell, std::optional<Region> region = std::nullopt);

struct AvoidanceSignature {
    double min_separation{0.0};
    double speed_dip{0.0};
    double lateral_deviation{0.0};
};

inline constexpr double kDefaultEncounterRadius = 5.0;

// Throws std::invalid_argument when either id is absent from any frame.
AvoidanceSignature avoidance_signature(std::span<const TrajectoryFrame> frames, ParticleId a, ParticleId b,
                                       double encounter_radius = kDefaultEncounterRadius);

} // namespace crowd
