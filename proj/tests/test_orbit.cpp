#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "firesat/orbit.hpp"
#include "firesat/rng.hpp"

using namespace firesat;
using namespace firesat::orbit;

namespace {

OrbitalElements circular(double a = 7211.0, double inc = 0.0, double raan = 0.0,
                         double nu = 0.0) {
    OrbitalElements el;
    el.semi_major_axis_km = a;
    el.eccentricity = 0.0;
    el.inclination_deg = inc;
    el.raan_deg = raan;
    el.arg_perigee_deg = 0.0;
    el.true_anomaly_deg = nu;
    el.epoch = parse_utc("2024-08-07T00:00:00Z");
    return el;
}

} // namespace

TEST_CASE("propagate: full period returns to the epoch state") {
    OrbitalElements el = circular();
    double period = orbital_period_s(el);
    StateVector s0 = propagate(el, el.epoch);
    StateVector s1 = propagate(el, el.epoch + period);
    CHECK((s1.position_km - s0.position_km).norm() < 1e-6);
    CHECK((s1.velocity_km_s - s0.velocity_km_s).norm() < 1e-9);
}

TEST_CASE("propagate: zero elapsed time is the epoch state") {
    OrbitalElements el = circular(7211.0, 53.0, 40.0, 120.0);
    StateVector s = propagate(el, el.epoch);
    double r = s.position_km.norm();
    CHECK(r == doctest::Approx(7211.0).epsilon(1e-12));
    double energy = s.velocity_km_s.dot(s.velocity_km_s) / 2.0 - kMuEarth / r;
    CHECK(energy == doctest::Approx(-kMuEarth / (2.0 * 7211.0)).epsilon(1e-12));
}

TEST_CASE("propagate: quarter period rotates the position 90 deg in plane") {
    OrbitalElements el = circular();
    double period = orbital_period_s(el);
    StateVector s0 = propagate(el, el.epoch);
    StateVector s1 = propagate(el, el.epoch + period / 4.0);
    CHECK(std::fabs(s1.position_km.norm() - 7211.0) < 1e-6);
    // Equatorial prograde orbit starting on +X: quarter period lands on +Y.
    CHECK(std::fabs(s1.position_km.x - 0.0) < 1e-3);
    CHECK(std::fabs(s1.position_km.y - 7211.0) < 1e-3);
    CHECK(s0.position_km.dot(s1.position_km) / (7211.0 * 7211.0) ==
          doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("propagate: time consistency through re-anchoring") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        OrbitalElements el = circular(7000.0 + rng.uniform(0, 800),
                                      rng.uniform(0, 120), rng.uniform(0, 360),
                                      rng.uniform(0, 360));
        el.eccentricity = rng.uniform(0, 0.05);
        UtcTime t1 = el.epoch + rng.uniform(100, 5000);
        UtcTime t2 = t1 + rng.uniform(100, 5000);
        StateVector direct = propagate(el, t2);
        StateVector hop = propagate(reanchor(el, t1), t2);
        CHECK((direct.position_km - hop.position_km).norm() < 1e-6);
    }
}

TEST_CASE("propagate: energy is conserved along the orbit") {
    OrbitalElements el = circular(7400.0, 63.0, 10.0, 0.0);
    el.eccentricity = 0.08;
    double a = el.semi_major_axis_km;
    double expected = -kMuEarth / (2.0 * a);
    for (int i = 0; i < 50; ++i) {
        StateVector s = propagate(el, el.epoch + i * 137.0);
        double energy =
            s.velocity_km_s.dot(s.velocity_km_s) / 2.0 - kMuEarth / s.position_km.norm();
        CHECK(std::fabs(energy - expected) / std::fabs(expected) < 1e-9);
    }
}

TEST_CASE("propagate: kepler solver rejects bad eccentricity input") {
    OrbitalElements el = circular();
    el.eccentricity = 1.2;
    CHECK_THROWS_AS(propagate(el, el.epoch), std::invalid_argument);
}

TEST_CASE("subpoint: +X position with zero Greenwich angle") {
    EarthRotationModel earth;
    earth.greenwich_deg_at_ref = 0.0;
    earth.ref = parse_utc("2024-08-07T00:00:00Z");
    StateVector s;
    s.position_km = {7211.0, 0.0, 0.0};
    s.time = earth.ref;
    SubPoint sp = subpoint(s, earth);
    CHECK(sp.lat_deg == doctest::Approx(0.0));
    CHECK(sp.lon_deg == doctest::Approx(0.0));
    CHECK(sp.alt_km == doctest::Approx(7211.0 - kEarthRadiusKm));
}

TEST_CASE("subpoint: +Z position is the north pole") {
    StateVector s;
    s.position_km = {0.0, 0.0, 7000.0};
    s.time = parse_utc("2024-08-07T00:00:00Z");
    CHECK(subpoint(s).lat_deg == doctest::Approx(90.0));
}

TEST_CASE("subpoint: Greenwich angle 45 deg puts +X at longitude -45") {
    EarthRotationModel earth;
    earth.greenwich_deg_at_ref = 45.0;
    earth.ref = parse_utc("2024-08-07T00:00:00Z");
    StateVector s;
    s.position_km = {7211.0, 0.0, 0.0};
    s.time = earth.ref;
    CHECK(subpoint(s, earth).lon_deg == doctest::Approx(-45.0));
}

TEST_CASE("build_slot_grid: five planes of each type and 15 anomalies give 135 slots") {
    OrbitalElements el = circular(7211.0, 98.74, 160.0, 30.0);
    SlotGrid grid = build_slot_grid(el, 1.0, 5, 15);
    CHECK(grid.size() == 135);
    const OrbitalElements& cur = grid.slots[grid.current_slot_index];
    CHECK(cur.inclination_deg == doctest::Approx(el.inclination_deg));
    CHECK(cur.raan_deg == doctest::Approx(el.raan_deg));
    CHECK(cur.true_anomaly_deg == doctest::Approx(el.true_anomaly_deg));
    CHECK(maneuver_cost(el, cur) == doctest::Approx(0.0));
}

TEST_CASE("build_slot_grid: zero budget degenerates to phase-only options") {
    OrbitalElements el = circular(7211.0, 98.74);
    SlotGrid grid = build_slot_grid(el, 0.0, 5, 15);
    CHECK(grid.size() == 15);
    for (const auto& slot : grid.slots) {
        CHECK(slot.inclination_deg == doctest::Approx(el.inclination_deg));
        CHECK(slot.raan_deg == doctest::Approx(el.raan_deg));
    }
}

TEST_CASE("build_slot_grid: farthest plane offset matches the budget formula") {
    OrbitalElements el = circular(7211.0, 98.74);
    SlotGrid grid = build_slot_grid(el, 1.0, 5, 1);
    double max_di = 0.0;
    for (const auto& slot : grid.slots)
        max_di = std::max(max_di,
                          std::fabs(slot.inclination_deg - el.inclination_deg));
    // 2 asin(budget / 2v) evaluated independently.
    CHECK(max_di == doctest::Approx(7.712219833732198).epsilon(1e-9));
}

TEST_CASE("build_slot_grid: plane-change cost from current never exceeds budget") {
    OrbitalElements el = circular(7211.0, 98.74, 200.0, 75.0);
    double budget = 0.8;
    SlotGrid grid = build_slot_grid(el, budget, 5, 3);
    CHECK(grid.size() == 27);
    for (const auto& slot : grid.slots) {
        OrbitalElements plane_only = slot;
        plane_only.true_anomaly_deg = el.true_anomaly_deg;   // drop phasing part
        CHECK(maneuver_cost(el, plane_only) <= budget + 1e-9);
    }
}

TEST_CASE("maneuver_cost: identity transfer is free") {
    OrbitalElements el = circular(7211.0, 98.74, 10.0, 250.0);
    CHECK(maneuver_cost(el, el) == doctest::Approx(0.0));
}

TEST_CASE("maneuver_cost: pure inclination change matches the plane formula") {
    OrbitalElements a = circular(7211.0, 98.80);
    OrbitalElements b = circular(7211.0, 95.91);
    // 2 v sin(2.89 deg / 2) evaluated independently.
    CHECK(maneuver_cost(a, b) == doctest::Approx(0.3749732705130492).epsilon(1e-9));
    CHECK(maneuver_cost(a, b) == doctest::Approx(maneuver_cost(b, a)).epsilon(1e-12));
}

TEST_CASE("phasing_cost: 180 deg shift over 10 revolutions, pinned value") {
    // Independent evaluation of the two-impulse phasing expressions.
    CHECK(phasing_cost(7211.0, 180.0, 10) ==
          doctest::Approx(0.23606654730533094).epsilon(1e-12));
}

TEST_CASE("maneuver_cost: phasing picks the cheapest waiting revolution") {
    OrbitalElements a = circular(7211.0, 98.74, 0.0, 0.0);
    OrbitalElements b = circular(7211.0, 98.74, 0.0, 180.0);
    double cost = maneuver_cost(a, b, 15);
    double best = phasing_cost(7211.0, 180.0, 15);
    for (int k = 1; k <= 15; ++k)
        best = std::min(best, phasing_cost(7211.0, 180.0, k));
    CHECK(cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(cost >= 0.0);
}

TEST_CASE("maneuver_cost: rejects mismatched orbits") {
    OrbitalElements a = circular(7211.0);
    OrbitalElements b = circular(7300.0);
    CHECK_THROWS_AS(maneuver_cost(a, b), std::invalid_argument);
    OrbitalElements c = circular(7211.0);
    c.eccentricity = 0.01;
    CHECK_THROWS_AS(maneuver_cost(a, c), std::invalid_argument);
}

TEST_CASE("parse_tle: reads a two-line element set") {
    std::string tle =
        "NOAA 20\n"
        "1 43013U 17073A   24220.50000000  .00000050  00000-0  40000-4 0  9993\n"
        "2 43013  98.7400 160.0000 0001000  90.0000 270.1000 14.19560000345678\n";
    auto sets = parse_tle(tle);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].inclination_deg == doctest::Approx(98.74));
    CHECK(sets[0].raan_deg == doctest::Approx(160.0));
    CHECK(sets[0].semi_major_axis_km > 7150.0);
    CHECK(sets[0].semi_major_axis_km < 7280.0);
    CHECK(sets[0].eccentricity == doctest::Approx(0.0001));
}
