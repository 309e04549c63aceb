#include "crowd/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crowd/dynamics.hpp"

namespace crowd {

namespace {

using nlohmann::json;

std::string_view kind_name(SceneError::Kind kind) {
    switch (kind) {
    case SceneError::Kind::syntax: return "syntax";
    case SceneError::Kind::schema: return "schema";
    case SceneError::Kind::reference: return "reference";
    case SceneError::Kind::invalid: return "invalid";
    }
    return "unknown";
}

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
    throw SceneError(SceneError::Kind::schema, path, message);
}

// Strict view over one JSON object: every key must be consumed or it is
// reported as unknown by finish().
class ObjectReader {
public:
    ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            schema_error(path_, "expected an object");
        }
    }

    std::string child(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    const json* find(std::string_view key) {
        const auto it = node_.find(std::string(key));
        if (it == node_.end()) {
            return nullptr;
        }
        seen_.insert(std::string(key));
        return &*it;
    }

    const json& require(std::string_view key) {
        const json* v = find(key);
        if (v == nullptr) {
            schema_error(child(key), "missing required key");
        }
        return *v;
    }

    double number(std::string_view key) { return as_number(require(key), child(key)); }

    double number_or(std::string_view key, double fallback) {
        const json* v = find(key);
        return v == nullptr ? fallback : as_number(*v, child(key));
    }

    std::string string(std::string_view key) {
        const json& v = require(key);
        if (!v.is_string()) {
            schema_error(child(key), "expected a string");
        }
        return v.get<std::string>();
    }

    std::int64_t integer_or(std::string_view key, std::int64_t fallback) {
        const json* v = find(key);
        if (v == nullptr) {
            return fallback;
        }
        if (!v->is_number_integer()) {
            schema_error(child(key), "expected an integer");
        }
        return v->get<std::int64_t>();
    }

    std::int64_t integer(std::string_view key) {
        if (find(key) == nullptr) {
            schema_error(child(key), "missing required key");
        }
        return integer_or(key, 0);
    }

    void finish() const {
        for (const auto& item : node_.items()) {
            if (!seen_.contains(item.key())) {
                schema_error(child(item.key()), "unknown key");
            }
        }
    }

private:
    static double as_number(const json& v, const std::string& path) {
        if (!v.is_number()) {
            schema_error(path, "expected a number");
        }
        return v.get<double>();
    }

    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

InteractionProfile read_profile(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    InteractionProfile p;
    p.d1 = r.number("d1");
    p.d2 = r.number("d2");
    p.d3 = r.number("d3");
    p.f1 = r.number("f1");
    p.f2 = r.number("f2");
    p.z_a = r.number("z_a");
    p.z_b = r.number("z_b");
    p.z_c = r.number("z_c");
    r.finish();
    return p;
}

InteractionProfile profile_or(ObjectReader& r, std::string_view key, const InteractionProfile& fallback) {
    const json* v = r.find(key);
    return v == nullptr ? fallback : read_profile(*v, r.child(key));
}

const json* array_or_null(ObjectReader& r, std::string_view key) {
    const json* v = r.find(key);
    if (v != nullptr && !v->is_array()) {
        schema_error(r.child(key), "expected an array");
    }
    return v;
}

std::string indexed(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

void check_profile(std::vector<Violation>& out, const InteractionProfile& p, const std::string& where) {
    const double fields[] = {p.d1, p.d2, p.d3, p.f1, p.f2, p.z_a, p.z_b, p.z_c};
    if (!std::all_of(std::begin(fields), std::end(fields), [](double v) { return std::isfinite(v); })) {
        out.push_back({"profile.non-finite", where + ": profile contains a non-finite value"});
        return;
    }
    if (!(0.0 < p.d1 && p.d1 < p.d2 && p.d2 < p.d3)) {
        std::ostringstream msg;
        msg << where << ": thresholds must satisfy 0 < d1 < d2 < d3 (got " << p.d1 << ", " << p.d2 << ", " << p.d3
            << ")";
        out.push_back({"profile.threshold-order", msg.str()});
    }
    if (!(p.f1 > p.f2 && p.f2 > 0.0)) {
        out.push_back({"profile.force-order", where + ": knot forces must satisfy f1 > f2 > 0"});
    }
    if (!(p.z_a >= 0.0 && p.z_b >= 0.0 && p.z_c >= 0.0)) {
        out.push_back({"profile.viscosity-negative", where + ": zone viscosities must be >= 0"});
    }
}

bool fieldwise_le(const InteractionProfile& a, const InteractionProfile& b) {
    return a.d1 <= b.d1 && a.d2 <= b.d2 && a.d3 <= b.d3 && a.f1 <= b.f1 && a.f2 <= b.f2 && a.z_a <= b.z_a &&
           a.z_b <= b.z_b && a.z_c <= b.z_c;
}

bool finite_all(std::initializer_list<double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// Uniform draw on the interval spanned by two gap endpoints.
double draw_between(Rng& rng, double a, double b) {
    return rng.uniform(std::min(a, b), std::max(a, b));
}

} // namespace

SceneError::SceneError(Kind kind, std::string path, const std::string& message, std::vector<Violation> violations)
    : std::runtime_error(std::string(kind_name(kind)) + " error" + (path.empty() ? "" : " at " + path) + ": " +
                         message),
      kind_(kind), path_(std::move(path)), violations_(std::move(violations)) {}

std::optional<std::size_t> find_target(const Scene& scene, std::string_view id) {
    for (std::size_t i = 0; i < scene.targets.size(); ++i) {
        if (scene.targets[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

double max_interaction_range(const Scene& scene) {
    double range = 0.0;
    for (const auto& o : scene.obstacles) {
        range = std::max(range, o.profile.d3);
    }
    for (const auto& inj : scene.injectors) {
        range = std::max(range, max_reach(inj.profile_min, inj.profile_max));
    }
    return range;
}

std::vector<Violation> validate_scene(const Scene& scene, double amplification) {
    std::vector<Violation> out;

    if (!finite_all({scene.bounds.center.x, scene.bounds.center.y, scene.bounds.w, scene.bounds.h}) ||
        !(scene.bounds.w > 0.0 && scene.bounds.h > 0.0)) {
        out.push_back({"bounds.size", "bounds: width and height must be finite and > 0"});
    }
    if (!std::isfinite(scene.dt) || !(scene.dt > 0.0)) {
        out.push_back({"simulation.dt-nonpositive", "simulation.dt must be > 0"});
    }
    if (!std::isfinite(scene.duration) || !(scene.duration > 0.0)) {
        out.push_back({"simulation.duration-nonpositive", "simulation.duration must be > 0"});
    }
    if (scene.output_stride < 1) {
        out.push_back({"simulation.output-stride", "simulation.output_stride must be >= 1"});
    }

    std::set<std::string> ids;
    const auto check_id = [&](const std::string& id, const std::string& where) {
        if (!ids.insert(id).second) {
            out.push_back({"id.duplicate", where + ": duplicate id '" + id + "'"});
        }
    };

    double stiffest = 0.0;
    for (std::size_t i = 0; i < scene.targets.size(); ++i) {
        const auto& t = scene.targets[i];
        const std::string where = indexed("targets", i);
        check_id(t.id, where);
        if (!finite_all({t.pos.x, t.pos.y, t.k_t, t.z_t, t.f_sat, t.r_capture, t.v_capture})) {
            out.push_back({"target.non-finite", where + ": non-finite value"});
            continue;
        }
        if (!(t.k_t > 0.0 && t.z_t > 0.0 && t.f_sat > 0.0 && t.r_capture > 0.0)) {
            out.push_back({"target.parameters", where + ": k_t, z_t, f_sat and r_capture must be > 0"});
        }
        if (t.v_capture < 0.0) {
            out.push_back({"target.parameters", where + ": v_capture must be >= 0"});
        }
        stiffest = std::max(stiffest, t.k_t);
    }

    for (std::size_t i = 0; i < scene.injectors.size(); ++i) {
        const auto& inj = scene.injectors[i];
        const std::string where = indexed("injectors", i);
        check_id(inj.id, where);
        if (!finite_all({inj.center.x, inj.center.y, inj.radius, inj.rate})) {
            out.push_back({"injector.non-finite", where + ": non-finite value"});
        }
        if (inj.count < 0) {
            out.push_back({"injector.count", where + ": count must be >= 0"});
        }
        if (!(inj.rate > 0.0)) {
            out.push_back({"injector.rate", where + ": rate must be > 0"});
        }
        if (!(inj.radius >= 0.0)) {
            out.push_back({"injector.radius", where + ": radius must be >= 0"});
        }
        if (!find_target(scene, inj.target_id)) {
            out.push_back({"reference.target", where + ": unknown target_id '" + inj.target_id + "'"});
        }
        const std::size_t before = out.size();
        check_profile(out, inj.profile_min, where + ".profile_min");
        check_profile(out, inj.profile_max, where + ".profile_max");
        if (out.size() != before) {
            continue;
        }
        if (!fieldwise_le(inj.profile_min, inj.profile_max)) {
            out.push_back({"profile.bounds-order", where + ": profile_min must be <= profile_max fieldwise"});
        }
        stiffest = std::max(stiffest, max_inner_slope(inj.profile_min, inj.profile_max, amplification));
    }

    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        const auto& o = scene.obstacles[i];
        const std::string where = indexed("obstacles", i);
        check_id(o.id, where);
        if (!finite_all({o.center.x, o.center.y, o.w, o.h, o.angle_deg, o.spacing})) {
            out.push_back({"obstacle.non-finite", where + ": non-finite value"});
        } else if (!(o.w > 0.0 && o.h > 0.0 && o.spacing > 0.0)) {
            out.push_back({"obstacle.geometry", where + ": w, h and spacing must be > 0"});
        }
        const std::size_t before = out.size();
        check_profile(out, o.profile, where + ".profile");
        if (out.size() == before) {
            stiffest = std::max(stiffest, inner_slope(o.profile, amplification));
        }
    }

    if (std::isfinite(scene.dt) && scene.dt > 0.0 && stiffest > 0.0) {
        const double limit = stable_timestep_limit(stiffest);
        if (!(scene.dt < limit)) {
            std::ostringstream msg;
            msg << "simulation.dt = " << scene.dt << " s is not below the stability limit " << limit
                << " s for stiffness " << stiffest;
            out.push_back({"simulation.dt-unstable", msg.str()});
        }
    }
    return out;
}

Scene parse_scene_document(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SceneError(SceneError::Kind::syntax, "", e.what());
    }

    Scene scene;
    ObjectReader root(doc, "");

    {
        ObjectReader b(root.require("bounds"), "bounds");
        scene.bounds.center = {b.number("cx"), b.number("cy")};
        scene.bounds.w = b.number("w");
        scene.bounds.h = b.number("h");
        b.finish();
    }
    {
        ObjectReader s(root.require("simulation"), "simulation");
        scene.dt = s.number_or("dt", 0.05);
        scene.duration = s.number("duration");
        if (const json* seed = s.find("seed")) {
            if (!seed->is_number_unsigned()) {
                schema_error("simulation.seed", "expected a non-negative integer");
            }
            scene.seed = seed->get<std::uint64_t>();
        }
        const std::int64_t stride = s.integer_or("output_stride", 1);
        if (stride < 1 || stride > std::numeric_limits<int>::max()) {
            schema_error("simulation.output_stride", "expected a positive integer");
        }
        scene.output_stride = static_cast<int>(stride);
        s.finish();
    }

    if (const json* targets = array_or_null(root, "targets")) {
        for (std::size_t i = 0; i < targets->size(); ++i) {
            ObjectReader t((*targets)[i], indexed("targets", i));
            TargetSpec spec;
            spec.id = t.string("id");
            spec.pos = {t.number("x"), t.number("y")};
            spec.k_t = t.number_or("k_t", spec.k_t);
            spec.z_t = t.number_or("z_t", spec.z_t);
            spec.f_sat = t.number_or("f_sat", spec.f_sat);
            spec.r_capture = t.number_or("r_capture", spec.r_capture);
            spec.v_capture = t.number_or("v_capture", spec.v_capture);
            t.finish();
            scene.targets.push_back(std::move(spec));
        }
    }

    if (const json* injectors = array_or_null(root, "injectors")) {
        for (std::size_t i = 0; i < injectors->size(); ++i) {
            const std::string path = indexed("injectors", i);
            ObjectReader r((*injectors)[i], path);
            InjectorSpec spec;
            spec.id = r.string("id");
            spec.center = {r.number("x"), r.number("y")};
            spec.radius = r.number_or("radius", spec.radius);
            const std::int64_t count = r.integer("count");
            if (count < 0 || count > std::numeric_limits<int>::max()) {
                schema_error(path + ".count", "expected a non-negative integer");
            }
            spec.count = static_cast<int>(count);
            spec.rate = r.number("rate");
            spec.target_id = r.string("target_id");
            spec.profile_min = profile_or(r, "profile_min", spec.profile_min);
            spec.profile_max = profile_or(r, "profile_max", spec.profile_max);
            r.finish();
            scene.injectors.push_back(std::move(spec));
        }
    }

    if (const json* obstacles = array_or_null(root, "obstacles")) {
        for (std::size_t i = 0; i < obstacles->size(); ++i) {
            ObjectReader r((*obstacles)[i], indexed("obstacles", i));
            ObstacleSpec spec;
            spec.id = r.string("id");
            spec.center = {r.number("cx"), r.number("cy")};
            spec.w = r.number("w");
            spec.h = r.number("h");
            spec.angle_deg = r.number_or("angle_deg", spec.angle_deg);
            spec.spacing = r.number_or("spacing", spec.spacing);
            spec.profile = profile_or(r, "profile", spec.profile);
            r.finish();
            scene.obstacles.push_back(std::move(spec));
        }
    }
    root.finish();

    for (std::size_t i = 0; i < scene.injectors.size(); ++i) {
        if (!find_target(scene, scene.injectors[i].target_id)) {
            throw SceneError(SceneError::Kind::reference, indexed("injectors", i) + ".target_id",
                             "no target with id '" + scene.injectors[i].target_id + "'");
        }
    }
    return scene;
}

Scene parse_scene(std::string_view text) {
    Scene scene = parse_scene_document(text);
    auto violations = validate_scene(scene);
    if (!violations.empty()) {
        const std::string message = violations.front().code + ": " + violations.front().message;
        throw SceneError(SceneError::Kind::invalid, "", message, std::move(violations));
    }
    return scene;
}

std::vector<ParticleState> build_obstacle_particles(const ObstacleSpec& spec) {
    const double length = std::abs(spec.w - spec.h);
    const double angle = spec.angle_deg * std::numbers::pi / 180.0;
    // Local axis of the longer side before rotation.
    const Vec2 axis = spec.w >= spec.h ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};

    std::size_t n = 1;
    if (length > 0.0) {
        n = static_cast<std::size_t>(std::ceil(length / spec.spacing - 1e-9)) + 1;
    }

    std::vector<ParticleState> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double offset = n == 1 ? 0.0 : -0.5 * length + length * static_cast<double>(i) / static_cast<double>(n - 1);
        ParticleState p;
        p.kind = ParticleKind::fixed;
        p.pos = spec.center + rotate(axis * offset, angle);
        p.profile = spec.profile;
        out.push_back(p);
    }
    return out;
}

InteractionProfile sample_profile(const InteractionProfile& lo, const InteractionProfile& hi, Rng& rng) {
    InteractionProfile p;
    p.d1 = rng.uniform(lo.d1, hi.d1);

    const double gap2 = draw_between(rng, lo.d2 - lo.d1, hi.d2 - hi.d1);
    p.d2 = (lo.d2 == hi.d2 && lo.d2 > p.d1) ? lo.d2 : p.d1 + gap2;

    const double gap3 = draw_between(rng, lo.d3 - lo.d2, hi.d3 - hi.d2);
    p.d3 = (lo.d3 == hi.d3 && lo.d3 > p.d2) ? lo.d3 : p.d2 + gap3;

    p.f2 = rng.uniform(lo.f2, hi.f2);
    const double drop = draw_between(rng, lo.f1 - lo.f2, hi.f1 - hi.f2);
    p.f1 = (lo.f1 == hi.f1 && lo.f1 > p.f2) ? lo.f1 : p.f2 + drop;

    p.z_a = rng.uniform(lo.z_a, hi.z_a);
    p.z_b = rng.uniform(lo.z_b, hi.z_b);
    p.z_c = rng.uniform(lo.z_c, hi.z_c);
    return p;
}

std::string_view to_string(ParticleKind kind) {
    return kind == ParticleKind::person ? "person" : "fixed";
}

std::string_view to_string(Phase phase) {
    return phase == Phase::active ? "active" : "arrived";
}

} // namespace crowd
