#include "crowd/svg.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "crowd/trajectory_io.hpp"

namespace crowd {

namespace {

constexpr const char* kActiveFill = "#1f77b4";
constexpr const char* kArrivedFill = "#2ca02c";
constexpr const char* kFixedStroke = "#555555";
constexpr const char* kBackground = "#ffffff";

Bounds data_bounds(std::span<const TrajectoryFrame> frames, const SvgOptions& options) {
    if (options.bounds) {
        return *options.bounds;
    }
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    for (const auto& f : frames) {
        for (const auto& r : f.records) {
            lo = {std::min(lo.x, r.pos.x), std::min(lo.y, r.pos.y)};
            hi = {std::max(hi.x, r.pos.x), std::max(hi.y, r.pos.y)};
        }
    }
    if (lo.x > hi.x) {
        return {{0.0, 0.0}, 10.0, 10.0};
    }
    const double pad = 2.0;
    return {(lo + hi) * 0.5, hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad};
}

// World y points up, SVG y points down: every y is emitted negated.
class SvgWriter {
public:
    explicit SvgWriter(const Bounds& b) {
        const Vec2 lo = b.lower();
        const Vec2 hi = b.upper();
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(lo.x) << ' ' << num(-hi.y) << ' '
             << num(b.w) << ' ' << num(b.h) << "\">\n"
             << "<rect x=\"" << num(lo.x) << "\" y=\"" << num(-hi.y) << "\" width=\"" << num(b.w)
             << "\" height=\"" << num(b.h) << "\" fill=\"" << kBackground << "\"/>\n";
    }

    void disc(const Vec2& p, double r, const char* fill) {
        out_ << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(-p.y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
             << "\"/>\n";
    }

    void outline(const Vec2& p, double r) {
        out_ << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(-p.y) << "\" r=\"" << num(r)
             << "\" fill=\"none\" stroke=\"" << kFixedStroke << "\" stroke-width=\"0.1\"/>\n";
    }

    void polyline(const std::vector<Vec2>& pts, const char* stroke) {
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"0.1\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out_ << (i == 0 ? "" : " ") << num(pts[i].x) << ',' << num(-pts[i].y);
        }
        out_ << "\"/>\n";
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    static std::string num(double v) { return format_double(v == 0.0 ? 0.0 : v); }

    std::ostringstream out_;
};

double fixed_radius(const SvgOptions& options, ParticleId id) {
    const auto it = options.fixed_radius.find(id);
    return it == options.fixed_radius.end() ? options.default_fixed_radius : it->second;
}

} // namespace

std::string render_discs(const TrajectoryFrame& frame, const SvgOptions& options) {
    SvgWriter svg(data_bounds(std::span(&frame, 1), options));
    for (const auto& r : frame.records) {
        if (r.kind == ParticleKind::fixed) {
            svg.outline(r.pos, fixed_radius(options, r.id));
        } else {
            svg.disc(r.pos, options.person_radius, r.phase == Phase::arrived ? kArrivedFill : kActiveFill);
        }
    }
    return svg.finish();
}

std::string render_trails(std::span<const TrajectoryFrame> frames, const SvgOptions& options) {
    SvgWriter svg(data_bounds(frames, options));
    if (!frames.empty()) {
        for (const auto& r : frames.back().records) {
            if (r.kind == ParticleKind::fixed) {
                svg.outline(r.pos, fixed_radius(options, r.id));
            }
        }
    }
    std::map<ParticleId, std::vector<Vec2>> paths;
    std::map<ParticleId, Phase> last_phase;
    for (const auto& f : frames) {
        for (const auto& r : f.records) {
            if (r.kind == ParticleKind::person) {
                paths[r.id].push_back(r.pos);
                last_phase[r.id] = r.phase;
            }
        }
    }
    for (const auto& [id, pts] : paths) {
        svg.polyline(pts, last_phase[id] == Phase::arrived ? kArrivedFill : kActiveFill);
    }
    return svg.finish();
}

} // namespace crowd
