#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "plumeswarm/plume_field.hpp"

using namespace plume;

namespace {

PlumeFieldParams single_puff_params() {
    PlumeFieldParams p;
    Emitter e;
    e.source = {0, 0, 0};
    e.rate = 1.0;
    e.on_seconds = 0.5;   // exactly one puff, emitted at t = 0
    e.off_seconds = 1e9;
    e.initial_radius = 1.0;
    e.growth_rate = 0.0;
    e.amplitude = 2.0;
    p.emitters = {e};
    return p;
}

}  // namespace

TEST_CASE("parameter invariants are enforced") {
    auto bad = single_puff_params();
    bad.emitters[0].initial_radius = 0.0;
    CHECK_THROWS_AS(PlumeField{bad}, std::invalid_argument);
    bad = single_puff_params();
    bad.emitters[0].growth_rate = -0.1;
    CHECK_THROWS_AS(PlumeField{bad}, std::invalid_argument);
    bad = single_puff_params();
    bad.emitters[0].on_seconds = 0.0;
    CHECK_THROWS_AS(PlumeField{bad}, std::invalid_argument);
    bad = single_puff_params();
    bad.emitters[0].amplitude = -1.0;
    CHECK_THROWS_AS(PlumeField{bad}, std::invalid_argument);
    bad = single_puff_params();
    bad.smoke_color = {1.2, 0, 0};
    CHECK_THROWS_AS(PlumeField{bad}, std::invalid_argument);
}

TEST_CASE("sigma is exactly zero beyond six radii") {
    PlumeField f(single_puff_params());
    CHECK(f.sample({6.0 + 1e-9, 0, 0}, 0.0).sigma == 0.0);
    CHECK(f.sample({100, 100, 100}, 0.0).sigma == 0.0);
    CHECK(f.sample({5.99, 0, 0}, 0.0).sigma > 0.0);
}

TEST_CASE("peak density at the center at age zero equals the amplitude") {
    PlumeField f(single_puff_params());
    CHECK(f.sample({0, 0, 0}, 0.0).sigma == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("wind advection moves the density maximum") {
    auto p = single_puff_params();
    p.wind = {{0.0, {1.0, 0.0}}};
    p.buoyancy = 0.2;
    PlumeField f(p);
    // Grid-scan argmax over a 0.1 m lattice around the expected region.
    Vec3 best{};
    double best_sigma = -1.0;
    for (double x = 2.0; x <= 8.0; x += 0.1)
        for (double y = -1.0; y <= 1.0; y += 0.1)
            for (double z = 0.0; z <= 2.0; z += 0.1) {
                double s = f.sample({x, y, z}, 5.0).sigma;
                if (s > best_sigma) {
                    best_sigma = s;
                    best = {x, y, z};
                }
            }
    CHECK(best.x == doctest::Approx(5.0).epsilon(0.05));
    CHECK(best.y == doctest::Approx(0.0).epsilon(0.05));
    CHECK(best.z == doctest::Approx(1.0).epsilon(0.11));
}

TEST_CASE("extent is empty before emission and covers six radii after") {
    PlumeField f(single_puff_params());
    CHECK(f.extent(-0.1).empty());
    AABB box = f.extent(0.0);
    CHECK(box.lo.x == doctest::Approx(-6.0).epsilon(1e-12));
    CHECK(box.hi.x == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(box.hi.z == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("two separated emitters produce the union of per-puff boxes") {
    auto p = single_puff_params();
    Emitter e2 = p.emitters[0];
    e2.source = {50, 0, 0};
    e2.initial_radius = 0.5;
    p.emitters.push_back(e2);
    PlumeField f(p);

    // Per-puff boxes from single-emitter fields, computed independently.
    auto p1 = p;
    p1.emitters = {p.emitters[0]};
    auto p2 = p;
    p2.emitters = {p.emitters[1]};
    AABB expected = PlumeField(p1).extent(1.0);
    expected.expand(PlumeField(p2).extent(1.0));
    AABB got = f.extent(1.0);
    CHECK(got.lo.x == doctest::Approx(expected.lo.x).epsilon(1e-12));
    CHECK(got.hi.x == doctest::Approx(expected.hi.x).epsilon(1e-12));
    CHECK(got.lo.z == doctest::Approx(expected.lo.z).epsilon(1e-12));
}

TEST_CASE("advection consistency for a single non-growing puff") {
    auto p = single_puff_params();
    p.wind = {{0.0, {1.5, -0.5}}};
    PlumeField f(p);
    double t = 8.0;
    for (double dt : {0.5, 2.0, 5.0}) {
        for (const Vec3& q : {Vec3{9, -3, 0.3}, Vec3{12, -4, 0}, Vec3{11.5, -3.5, 0.5}}) {
            Vec3 shifted{q.x - 1.5 * dt, q.y + 0.5 * dt, q.z};
            CHECK(f.sample(q, t).sigma ==
                  doctest::Approx(f.sample(shifted, t - dt).sigma).epsilon(1e-9));
        }
    }
}

TEST_CASE("sampling is deterministic across field instances") {
    auto p = single_puff_params();
    p.wind = {{0.0, {0.7, 0.2}}, {4.0, {-0.3, 0.1}}};
    p.buoyancy = 0.15;
    PlumeField a(p), b(p);
    for (double t : {0.0, 3.3, 7.7}) {
        CHECK(a.sample({1.2, 0.4, 0.8}, t).sigma == b.sample({1.2, 0.4, 0.8}, t).sigma);
    }
    // Query order must not matter either.
    double late = a.sample({2, 0, 1}, 9.0).sigma;
    double early = a.sample({2, 0, 1}, 1.0).sigma;
    PlumeField c(p);
    CHECK(c.sample({2, 0, 1}, 1.0).sigma == early);
    CHECK(c.sample({2, 0, 1}, 9.0).sigma == late);
}

TEST_CASE("duty cycle gates emission times") {
    PlumeFieldParams p;
    Emitter e;
    e.rate = 2.0;
    e.on_seconds = 1.0;
    e.off_seconds = 9.0;
    e.initial_radius = 1.0;
    e.amplitude = 1.0;
    p.emitters = {e};
    PlumeField f(p);
    CHECK(f.active_puffs(9.0).size() == 2);    // emitted at 0 and 0.5 only
    CHECK(f.active_puffs(10.6).size() == 4);   // next on-phase adds 10 and 10.5
    CHECK(f.sample({0, 0, 0}, -1.0).sigma == 0.0);
}

TEST_CASE("grown puffs dilute mass-conservingly and eventually dissipate") {
    auto p = single_puff_params();
    p.emitters[0].growth_rate = 0.5;
    PlumeField f(p);
    // peak * r^3 is conserved: at age 2, r = 2, peak = 2 / 8.
    CHECK(f.sample({0, 0, 0}, 2.0).sigma == doctest::Approx(0.25).epsilon(1e-12));
    // Below the liveness floor the puff disappears entirely.
    // peak(age) = 2 * (1 / (1 + 0.5 age))^3 < 1e-3  <=>  age > 2 * (2000^(1/3) - 1).
    CHECK(f.active_puffs(30.0).empty());
    CHECK(f.extent(30.0).empty());
}
