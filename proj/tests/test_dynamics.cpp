#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "crowd/dynamics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace crowd;
using crowd::testing::base_scene;
using crowd::testing::fixed;
using crowd::testing::injector;
using crowd::testing::person;

namespace {

InteractionProfile law_135() { return default_profile(); }

bool exactly_equal(const Vec2& a, const Vec2& b) {
    return a.x == b.x && a.y == b.y;
}

} // namespace

TEST_CASE("elastic_magnitude follows the piecewise knots") {
    const auto law = law_135();
    CHECK(elastic_magnitude(law, 6.0) == 0.0);
    CHECK(elastic_magnitude(law, 5.0) == 0.0);
    CHECK(elastic_magnitude(law, 4.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(elastic_magnitude(law, 2.0) == doctest::Approx(33.0).epsilon(1e-14));
    CHECK(elastic_magnitude(law, 0.9, 10.0) == doctest::Approx(87.0).epsilon(1e-14));
    CHECK(elastic_magnitude(law, 1e9) == 0.0);

    for (const auto& table : oracle::force_tables()) {
        InteractionProfile p = default_profile();
        p.d1 = table.d1;
        p.d2 = table.d2;
        p.d3 = table.d3;
        p.f1 = table.f1;
        p.f2 = table.f2;
        for (const auto& probe : table.probes) {
            CHECK(std::abs(elastic_magnitude(p, probe.dist) - probe.expected) <= 1e-12 * std::max(1.0, probe.expected));
        }
    }
}

TEST_CASE("elastic_magnitude is continuous at every knot") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        InteractionProfile p = sample_profile(InteractionProfile{0.2, 0.5, 0.9, 5, 1, 0, 0, 0},
                                              InteractionProfile{2.0, 4.0, 7.0, 100, 20, 1, 1, 1}, rng);
        const double slope_max = inner_slope(p);
        const double eps = 1e-9;
        for (double knot : {p.d1, p.d2, p.d3}) {
            const double jump = std::abs(elastic_magnitude(p, knot - eps) - elastic_magnitude(p, knot + eps));
            // Allow rounding of the O(100) magnitudes on top of the slope bound.
            CHECK(jump <= slope_max * 2.0 * eps + 1e-12 * p.f1 * 10.0);
        }
    }
}

TEST_CASE("zone_viscosity picks the zone") {
    const auto law = law_135();
    CHECK(zone_viscosity(law, 0.5) == law.z_c);
    CHECK(zone_viscosity(law, 1.0) == law.z_b);
    CHECK(zone_viscosity(law, 2.9) == law.z_b);
    CHECK(zone_viscosity(law, 3.0) == law.z_a);
    CHECK(zone_viscosity(law, 5.0) == 0.0);
}

TEST_CASE("combine_profiles") {
    const auto p = default_profile();
    CHECK(combine_profiles(person(0, {}), person(1, {})) == p);

    InteractionProfile a = p, b = p;
    b.d1 = 2.0;
    b.d2 = 3.5;
    CHECK(combine_profiles(person(0, {}, {}, a), person(1, {}, {}, b)).d1 == 1.5);
    CHECK(combine_profiles(person(0, {}, {}, a), person(1, {}, {}, b)).d2 == 3.25);

    InteractionProfile q{0.4, 0.9, 1.3, 9, 2, 0, 1, 2};
    CHECK(combine_profiles(person(0, {}, {}, a), fixed(1, {}, q)) == q);
    CHECK(combine_profiles(fixed(1, {}, q), person(0, {}, {}, b)) == q);
}

TEST_CASE("pair_force beyond d3 is zero") {
    const auto law = law_135();
    const auto a = person(0, {0, 0}, {1.5, 0});
    const auto b = person(1, {6.0, 0}, {-1.5, 0});
    CHECK(pair_force(a, b, law) == Vec2{});
    CHECK(pair_force(a, person(1, {5.0, 0}), law) == Vec2{});
}

TEST_CASE("pair_force in zone B with closing speed") {
    const auto law = law_135();
    // dist 2, closing speed 1.5: 33 + z_b * 1.5 = 36, pushing a toward -x.
    const auto a = person(0, {0, 0}, {1.5, 0});
    const auto b = person(1, {2, 0});
    const Vec2 f = pair_force(a, b, law);
    CHECK(f.x == doctest::Approx(-36.0).epsilon(1e-14));
    CHECK(f.y == 0.0);

    // Receding: no damping under the clamped law, extra repulsion under the literal one.
    const auto away = person(0, {0, 0}, {-1.5, 0});
    CHECK(pair_force(away, b, law).x == doctest::Approx(-33.0).epsilon(1e-14));
    ForceParams literal;
    literal.literal_damping = true;
    CHECK(pair_force(away, b, law, literal).x == doctest::Approx(-36.0).epsilon(1e-14));
}

TEST_CASE("pair_force is exactly antisymmetric") {
    Rng rng(17);
    for (int i = 0; i < 20000; ++i) {
        const auto pa = sample_profile(default_profile_min(), default_profile_max(), rng);
        const auto pb = sample_profile(default_profile_min(), default_profile_max(), rng);
        const auto a = person(0, {rng.uniform(-4, 4), rng.uniform(-4, 4)}, {rng.uniform(-2, 2), rng.uniform(-2, 2)}, pa);
        const auto b = person(1, {rng.uniform(-4, 4), rng.uniform(-4, 4)}, {rng.uniform(-2, 2), rng.uniform(-2, 2)}, pb);
        for (bool literal : {false, true}) {
            ForceParams params;
            params.literal_damping = literal;
            const Vec2 fab = pair_force(a, b, combine_profiles(a, b), params);
            const Vec2 fba = pair_force(b, a, combine_profiles(b, a), params);
            REQUIRE(exactly_equal(fab, -fba));
        }
    }
}

TEST_CASE("pair_force handles coincident particles deterministically") {
    const auto law = law_135();
    const auto a = person(4, {1, 1});
    const auto b = person(9, {1, 1});
    const Vec2 fab = pair_force(a, b, law);
    const Vec2 fba = pair_force(b, a, law);
    CHECK(is_finite(fab));
    CHECK(exactly_equal(fab, -fba));
    CHECK(norm(fab) == doctest::Approx(elastic_magnitude(law, kCoincidentDistance)));
    CHECK(exactly_equal(fab, pair_force(a, b, law)));
    // A different pair picks a different direction.
    CHECK_FALSE(exactly_equal(fab, pair_force(person(4, {1, 1}), person(10, {1, 1}), law)));
}

TEST_CASE("target_force") {
    TargetSpec t;
    t.pos = {0, 0};
    t.k_t = 1.0;
    t.z_t = 2.0;
    t.f_sat = 3.0;
    CHECK(target_force(person(0, {0, 0}), t) == Vec2{});

    const Vec2 f = target_force(person(0, {-0.5, 0}), t);
    CHECK(f.x == doctest::Approx(0.5));
    CHECK(f.y == 0.0);

    // At the target only damping remains.
    const Vec2 g = target_force(person(0, {0, 0}, {1.0, -0.5}), t);
    CHECK(g == Vec2{-2.0, 1.0});

    // Far away the pull saturates at f_sat.
    const Vec2 h = target_force(person(0, {-100, 0}), t);
    CHECK(h.x == doctest::Approx(3.0));
    // Steady state speed is f_sat / z_t.
    CHECK(target_force(person(0, {-100, 0}, {1.5, 0}), t).x == doctest::Approx(0.0));
}

TEST_CASE("inject follows the k / rate schedule") {
    Scene s = base_scene();
    s.injectors.push_back(injector("I", {-10, 3}, 5, 2.0, "T"));
    s.injectors.back().radius = 0.0;
    World w = make_world(s);
    std::vector<double> spawn_times;
    std::size_t seen = 0;
    const auto record = [&] {
        while (seen < w.particles.size()) {
            spawn_times.push_back(w.time);
            CHECK(w.particles[seen].pos == Vec2{-10, 3});
            CHECK(w.particles[seen].vel == Vec2{});
            CHECK(w.particles[seen].target == std::optional<std::size_t>{0});
            CHECK(w.particles[seen].id == seen);
            ++seen;
        }
    };
    record();
    for (int i = 0; i < 60; ++i) {
        step(w, s);
        record();
    }
    REQUIRE(spawn_times.size() == 5);
    const double expected[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    for (int i = 0; i < 5; ++i) {
        CHECK(spawn_times[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
    CHECK(w.pending[0].remaining == 0);
}

TEST_CASE("inject with count 0 leaves the world unchanged") {
    Scene s = base_scene();
    s.injectors.push_back(injector("I", {0, 0}, 0, 5.0, "T"));
    World w = make_world(s);
    CHECK(w.particles.empty());
    const Rng before = w.rng;
    w.time = 10.0;
    inject(w, s);
    CHECK(w.particles.empty());
    CHECK(w.rng == before);
}

TEST_CASE("spawn positions stay in the injector disc") {
    Scene s = base_scene();
    s.injectors.push_back(injector("I", {5, -5}, 200, 1000.0, "T"));
    s.injectors.back().radius = 3.0;
    World w = make_world(s);
    w.time = 1.0;
    inject(w, s);
    REQUIRE(w.particles.size() == 200);
    for (const auto& p : w.particles) {
        CHECK(norm(p.pos - Vec2{5, -5}) <= 3.0 + 1e-12);
        CHECK(is_valid(p.profile));
    }
}

TEST_CASE("obstacle particles come first and never move") {
    Scene s = base_scene();
    ObstacleSpec o;
    o.id = "O";
    o.center = {-3, 0};
    o.w = 2;
    o.h = 10;
    o.spacing = 2;
    s.obstacles.push_back(o);
    s.injectors.push_back(injector("I", {-8, 0}, 10, 2.0, "T"));
    World w = make_world(s);
    const std::size_t n_fixed = build_obstacle_particles(o).size();
    std::vector<Vec2> start;
    for (std::size_t i = 0; i < n_fixed; ++i) {
        CHECK(w.particles[i].kind == ParticleKind::fixed);
        start.push_back(w.particles[i].pos);
    }
    for (int i = 0; i < 200; ++i) {
        step(w, s);
    }
    for (std::size_t i = 0; i < n_fixed; ++i) {
        CHECK(w.particles[i].pos == start[i]);
        CHECK(w.particles[i].vel == Vec2{});
    }
    for (std::size_t i = 0; i < w.particles.size(); ++i) {
        CHECK(w.particles[i].id == i);
    }
}

TEST_CASE("free particle advances by vel * dt") {
    Scene s = base_scene();
    s.targets[0].f_sat = 0.0;
    s.targets[0].z_t = 0.0;
    World w;
    auto p = person(0, {1.0, 2.0}, {0.25, -0.5});
    p.target = 0;
    w.particles.push_back(p);
    for (int i = 0; i < 100; ++i) {
        const Vec2 before = w.particles[0].pos;
        step(w, s);
        CHECK(w.particles[0].pos == before + Vec2{0.25, -0.5} * s.dt);
        CHECK(w.particles[0].vel == Vec2{0.25, -0.5});
    }
    CHECK(w.step_index == 100);
    CHECK(w.time == 100 * s.dt);
}

TEST_CASE("target spring matches the damped oscillator") {
    Scene s = base_scene();
    s.dt = 1e-3;
    s.targets[0] = TargetSpec{"T", {0.0, 0.0}, 1.0, 0.5, 1e9, 1e-9, 0.0};
    World w;
    auto p = person(0, {1.0, 0.0});
    p.target = 0;
    w.particles.push_back(p);
    double worst = 0.0;
    for (int i = 1; i <= 10000; ++i) {
        step(w, s);
        worst = std::max(worst, std::abs(w.particles[0].pos.x - oracle::damped_oscillator(1.0, 0.5, 1.0, 0.0, w.time)));
    }
    CHECK(worst <= 1e-3);
    CHECK(w.particles[0].pos.y == 0.0);
}

TEST_CASE("persons arrive and stay in the world") {
    Scene s = base_scene();
    s.targets[0].pos = {2.0, 0.0};
    s.targets[0].r_capture = 0.5;
    s.targets[0].v_capture = 0.05;
    s.injectors.push_back(injector("I", {0, 0}, 1, 1.0, "T"));
    World w = make_world(s);
    for (int i = 0; i < 400; ++i) {
        step(w, s);
    }
    REQUIRE(w.particles.size() == 1);
    CHECK(w.particles[0].phase == Phase::arrived);
    CHECK(norm(w.particles[0].pos - Vec2{2.0, 0.0}) < 0.5);
}

TEST_CASE("non-finite state aborts with the particle and step") {
    Scene s = base_scene();
    World w;
    auto p = person(0, {0, 0}, {std::numeric_limits<double>::infinity(), 0.0});
    p.target = 0;
    w.particles.push_back(person(0, {50, 50}));
    w.particles[0].target = 0;
    p.id = 1;
    w.particles.push_back(p);
    try {
        step(w, s);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.particle() == 1);
        CHECK(e.step() == 1);
    }
}

TEST_CASE("kinetic energy never grows while a pair keeps closing") {
    Scene s = base_scene();
    s.dt = 0.01;
    s.targets[0].f_sat = 0.0;
    s.targets[0].k_t = 0.0;
    s.targets[0].z_t = 0.0;
    World w;
    w.particles.push_back(person(0, {-3.0, 0.0}, {1.5, 0.0}));
    w.particles.push_back(person(1, {3.0, 0.0}, {-1.5, 0.0}));
    for (auto& p : w.particles) {
        p.target = 0;
    }
    const auto closing = [](const World& x) {
        const Vec2 u = x.particles[0].pos - x.particles[1].pos;
        return dot(x.particles[0].vel - x.particles[1].vel, -u) >= 0.0;
    };
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const bool before = closing(w);
        const double e0 = kinetic_energy(w);
        step(w, s);
        if (before && closing(w)) {
            CHECK(kinetic_energy(w) <= e0);
            ++checked;
        }
    }
    CHECK(checked > 10);
    // They bounced apart without getting inside d1.
    CHECK(w.particles[1].pos.x - w.particles[0].pos.x > 1.0);
}

TEST_CASE("step is identical across thread counts and with brute force") {
    Scene s = base_scene();
    s.seed = 5;
    s.injectors.push_back(injector("A", {-20, 0}, 40, 4.0, "T"));
    s.injectors.back().radius = 4.0;
    s.targets.push_back(TargetSpec{"U", {-30, 0}});
    s.injectors.push_back(injector("B", {20, 1}, 40, 4.0, "U"));
    s.injectors.back().radius = 4.0;

    World one = make_world(s);
    World many = make_world(s);
    World brute = make_world(s);
    StepOptions threaded;
    threaded.threads = 4;
    StepOptions no_grid;
    no_grid.use_grid = false;
    for (int i = 0; i < 300; ++i) {
        step(one, s);
        step(many, s, threaded);
        step(brute, s, no_grid);
    }
    REQUIRE(one.particles.size() == 80);
    CHECK(snapshot(one) == snapshot(many));
    CHECK(snapshot(one) == snapshot(brute));
}

TEST_CASE("a particle out of everyone's reach changes nothing") {
    Scene s = base_scene();
    s.seed = 8;
    s.injectors.push_back(injector("A", {0, 0}, 30, 100.0, "T"));
    s.injectors.back().radius = 6.0;
    World w = make_world(s);
    w.time = 1.0;
    inject(w, s);
    for (int i = 0; i < 20; ++i) {
        step(w, s);
    }
    World with_far = w;
    auto far = person(static_cast<ParticleId>(w.particles.size()), {0.0, 500.0});
    far.target = 0;
    with_far.particles.push_back(far);
    step(w, s);
    step(with_far, s);
    for (std::size_t i = 0; i < w.particles.size(); ++i) {
        CHECK(w.particles[i] == with_far.particles[i]);
    }
}
