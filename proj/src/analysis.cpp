#include "crowd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace crowd {

namespace {

int side_of(const Gate& gate, const Vec2& p) {
    const double c = cross(gate.b - gate.a, p - gate.a);
    return (c > 0.0) - (c < 0.0);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool within_gate_extent(const Gate& gate, const Vec2& p) {
    const Vec2 d = gate.b - gate.a;
    const double t = dot(p - gate.a, d);
    return t >= 0.0 && t <= norm2(d);
}

// Segment p0->p1 (straddling the gate line) meets the gate segment.
bool crosses_gate_segment(const Gate& gate, const Vec2& p0, const Vec2& p1) {
    const Vec2 d = p1 - p0;
    const int o3 = sign(cross(d, gate.a - p0));
    const int o4 = sign(cross(d, gate.b - p0));
    return o3 != o4 || o3 == 0;
}

double aspect_ratio(std::span<const Vec2> pts, const Vec2& centroid) {
    double cxx = 0.0, cyy = 0.0, cxy = 0.0;
    for (const auto& p : pts) {
        const Vec2 d = p - centroid;
        cxx += d.x * d.x;
        cyy += d.y * d.y;
        cxy += d.x * d.y;
    }
    const double half_trace = 0.5 * (cxx + cyy);
    const double disc = std::sqrt(0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy);
    const double major = half_trace + disc;
    const double minor = std::max(0.0, half_trace - disc);
    if (major <= 0.0) {
        return 1.0;
    }
    if (minor <= 1e-12 * major) {
        return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(major / minor);
}

struct DisjointSet {
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }

    std::vector<std::size_t> parent;
};

} // namespace

double DensityGrid::density(const CellCoord& c) const {
    const auto it = counts.find(c);
    return it == counts.end() ? 0.0 : static_cast<double>(it->second) / (cell * cell);
}

std::size_t DensityGrid::total() const {
    std::size_t n = 0;
    for (const auto& [c, k] : counts) {
        n += k;
    }
    return n;
}

double DensityGrid::mean_occupied() const {
    if (counts.empty()) {
        return 0.0;
    }
    return static_cast<double>(total()) / (cell * cell) / static_cast<double>(counts.size());
}

DensityGrid density_grid(const TrajectoryFrame& frame, double cell) {
    if (!(cell > 0.0)) {
        throw std::invalid_argument("density_grid: cell must be > 0");
    }
    DensityGrid grid;
    grid.cell = cell;
    for (const auto& r : frame.records) {
        if (r.kind == ParticleKind::person) {
            ++grid.counts[cell_of(r.pos, cell)];
        }
    }
    return grid;
}

std::vector<JamCluster> detect_jams(const TrajectoryFrame& frame, double v_jam, double r_link, std::size_t min_size) {
    if (!(v_jam > 0.0) || !(r_link > 0.0)) {
        throw std::invalid_argument("detect_jams: v_jam and r_link must be > 0");
    }
    std::vector<GridEntry> slow;
    for (const auto& r : frame.records) {
        if (r.kind == ParticleKind::person && r.phase == Phase::active && norm(r.vel) < v_jam) {
            slow.push_back({r.id, r.pos});
        }
    }
    std::sort(slow.begin(), slow.end(), [](const GridEntry& a, const GridEntry& b) { return a.id < b.id; });

    std::unordered_map<ParticleId, std::size_t> index;
    for (std::size_t i = 0; i < slow.size(); ++i) {
        index.emplace(slow[i].id, i);
    }
    const SpatialGrid grid = SpatialGrid::rebuild(slow, r_link);
    DisjointSet sets(slow.size());
    std::vector<ParticleId> near;
    for (std::size_t i = 0; i < slow.size(); ++i) {
        grid.neighbors_within(slow[i].pos, r_link, slow[i].id, near);
        for (ParticleId id : near) {
            sets.unite(i, index.at(id));
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < slow.size(); ++i) {
        groups[sets.find(i)].push_back(i);
    }

    std::vector<JamCluster> clusters;
    for (const auto& [root, members] : groups) {
        if (members.size() < min_size) {
            continue;
        }
        JamCluster c;
        std::vector<Vec2> pts;
        pts.reserve(members.size());
        for (std::size_t i : members) {
            c.members.push_back(slow[i].id);
            pts.push_back(slow[i].pos);
            c.centroid += slow[i].pos;
        }
        c.size = members.size();
        c.centroid = c.centroid / static_cast<double>(c.size);
        c.aspect_ratio = aspect_ratio(pts, c.centroid);
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::vector<JamTrack> track_jams(std::span<const TrajectoryFrame> frames, double v_jam, double r_link,
                                 std::size_t min_size) {
    struct Open {
        std::size_t track;
        std::vector<ParticleId> members;
    };
    std::vector<JamTrack> tracks;
    std::vector<Open> open;

    for (const auto& frame : frames) {
        const auto clusters = detect_jams(frame, v_jam, r_link, min_size);
        std::vector<Open> next;
        std::vector<bool> taken(open.size(), false);
        for (const auto& c : clusters) {
            std::size_t best = open.size();
            std::size_t best_overlap = 0;
            for (std::size_t k = 0; k < open.size(); ++k) {
                if (taken[k]) {
                    continue;
                }
                std::vector<ParticleId> common;
                std::set_intersection(c.members.begin(), c.members.end(), open[k].members.begin(),
                                      open[k].members.end(), std::back_inserter(common));
                if (common.size() > best_overlap) {
                    best_overlap = common.size();
                    best = k;
                }
            }
            std::size_t track_id;
            if (best < open.size()) {
                taken[best] = true;
                track_id = open[best].track;
            } else {
                track_id = tracks.size();
                tracks.push_back({track_id, frame.time, frame.time, 0});
            }
            tracks[track_id].end = frame.time;
            tracks[track_id].peak_size = std::max(tracks[track_id].peak_size, c.size);
            next.push_back({track_id, c.members});
        }
        open = std::move(next);
    }
    return tracks;
}

std::vector<FlowWindow> flow_rate(std::span<const TrajectoryFrame> frames, const Gate& gate, double window) {
    if (!(window > 0.0)) {
        throw std::invalid_argument("flow_rate: window must be > 0");
    }
    if (gate.a == gate.b) {
        throw std::invalid_argument("flow_rate: gate endpoints must differ");
    }
    if (frames.empty()) {
        return {};
    }
    const double t0 = frames.front().time;
    const auto windows = static_cast<std::size_t>(std::floor((frames.back().time - t0) / window)) + 1;
    std::vector<FlowWindow> out(windows);
    for (std::size_t k = 0; k < windows; ++k) {
        out[k].window_start = t0 + static_cast<double>(k) * window;
    }

    struct Track {
        Vec2 pos;
        int last_side{0}; // most recent non-zero side
    };
    std::unordered_map<ParticleId, Track> state;

    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto slot = std::min(windows - 1, static_cast<std::size_t>(std::max(
                                                    0.0, std::floor((frames[f].time - t0) / window))));
        for (const auto& r : frames[f].records) {
            if (r.kind != ParticleKind::person) {
                continue;
            }
            const int s1 = side_of(gate, r.pos);
            auto it = state.find(r.id);
            if (it == state.end()) {
                state.emplace(r.id, Track{r.pos, s1});
                continue;
            }
            Track& tr = it->second;
            const int s0 = side_of(gate, tr.pos);
            bool crossed = false;
            if (s1 != 0) {
                if (s0 != 0) {
                    crossed = s0 != s1 && crosses_gate_segment(gate, tr.pos, r.pos);
                } else {
                    // Left the gate line this step: counts if it came from the other side.
                    crossed = tr.last_side != 0 && tr.last_side != s1 && within_gate_extent(gate, tr.pos);
                }
                tr.last_side = s1;
            }
            if (crossed) {
                out[slot].signed_count += s1;
                out[slot].gross += 1;
            }
            tr.pos = r.pos;
        }
    }
    return out;
}

CurlField curl_field(const TrajectoryFrame& frame, double cell, std::optional<Region> region) {
    if (!(cell > 0.0)) {
        throw std::invalid_argument("curl_field: cell must be > 0");
    }
    struct Bin {
        Vec2 sum;
        std::size_t n{0};
    };
    std::map<CellCoord, Bin> bins;
    for (const auto& r : frame.records) {
        if (r.kind != ParticleKind::person || (region && !region->contains(r.pos))) {
            continue;
        }
        Bin& b = bins[cell_of(r.pos, cell)];
        b.sum += r.vel;
        ++b.n;
    }
    const auto mean_vel = [&](const CellCoord& c) -> std::optional<Vec2> {
        const auto it = bins.find(c);
        if (it == bins.end()) {
            return std::nullopt;
        }
        return it->second.sum / static_cast<double>(it->second.n);
    };

    std::map<CellCoord, bool> candidates;
    for (const auto& [c, b] : bins) {
        candidates[{c.x - 1, c.y}] = true;
        candidates[{c.x + 1, c.y}] = true;
        candidates[{c.x, c.y - 1}] = true;
        candidates[{c.x, c.y + 1}] = true;
    }

    CurlField field;
    field.cell = cell;
    double sum_abs = 0.0;
    for (const auto& [c, unused] : candidates) {
        const auto east = mean_vel({c.x + 1, c.y});
        const auto west = mean_vel({c.x - 1, c.y});
        const auto north = mean_vel({c.x, c.y + 1});
        const auto south = mean_vel({c.x, c.y - 1});
        if (!east || !west || !north || !south) {
            continue;
        }
        const double value = (east->y - west->y) / (2.0 * cell) - (north->x - south->x) / (2.0 * cell);
        field.curl.emplace(c, value);
        sum_abs += std::abs(value);
    }
    if (!field.curl.empty()) {
        field.mean_abs = sum_abs / static_cast<double>(field.curl.size());
    }
    return field;
}

AvoidanceSignature avoidance_signature(std::span<const TrajectoryFrame> frames, ParticleId a, ParticleId b,
                                       double encounter_radius) {
    if (frames.empty()) {
        throw std::invalid_argument("avoidance_signature: no frames");
    }
    std::vector<const FrameRecord*> ra, rb;
    ra.reserve(frames.size());
    rb.reserve(frames.size());
    for (const auto& f : frames) {
        const FrameRecord* x = f.find(a);
        const FrameRecord* y = f.find(b);
        if (x == nullptr || y == nullptr) {
            throw std::invalid_argument("avoidance_signature: id " + std::to_string(x == nullptr ? a : b) +
                                        " missing from frame at step " + std::to_string(f.step));
        }
        ra.push_back(x);
        rb.push_back(y);
    }

    const std::size_t n = frames.size();
    std::vector<double> sep(n);
    for (std::size_t i = 0; i < n; ++i) {
        sep[i] = norm(ra[i]->pos - rb[i]->pos);
    }
    const std::size_t closest = static_cast<std::size_t>(std::min_element(sep.begin(), sep.end()) - sep.begin());

    AvoidanceSignature sig;
    sig.min_separation = sep[closest];

    const auto dip = [&](const std::vector<const FrameRecord*>& rec) {
        double peak = 0.0;
        for (const auto* r : rec) {
            peak = std::max(peak, norm(r->vel));
        }
        if (peak <= 0.0) {
            return 0.0;
        }
        double slowest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (sep[i] < encounter_radius || i == closest) {
                slowest = std::min(slowest, norm(rec[i]->vel));
            }
        }
        return 1.0 - slowest / peak;
    };

    const auto deviation = [&](const std::vector<const FrameRecord*>& rec) {
        const Vec2 start = rec.front()->pos;
        const Vec2 chord = rec.back()->pos - start;
        const double len = norm(chord);
        double worst = 0.0;
        for (const auto* r : rec) {
            const Vec2 d = r->pos - start;
            worst = std::max(worst, len > 0.0 ? std::abs(cross(chord, d)) / len : norm(d));
        }
        return worst;
    };

    sig.speed_dip = std::max(dip(ra), dip(rb));
    sig.lateral_deviation = std::max(deviation(ra), deviation(rb));
    return sig;
}

} // namespace crowd
