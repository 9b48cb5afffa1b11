#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "firesat/confidence.hpp"

using namespace firesat;
using namespace firesat::conf;

namespace {

detect::Detection det_at(double lat, double lon, double confidence,
                         double t_sec = 0.0) {
    detect::Detection d;
    d.lat_deg = lat;
    d.lon_deg = lon;
    d.box.confidence = confidence;
    d.time = UtcTime{t_sec};
    return d;
}

detect::DetectorProfile profile_with_map(double map_value) {
    detect::DetectorProfile p;
    p.map_value = map_value;
    return p;
}

} // namespace

TEST_CASE("bayes_update: likelihood equal to the false rate changes nothing") {
    CHECK(bayes_update(0.42, 0.3, 0.3) == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("bayes_update: certainty is absorbing") {
    CHECK(bayes_update(1.0, 0.5, 0.3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bayes_update(0.0, 0.5, 0.3) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("bayes_update: worked example 0.49 / 0.58") {
    CHECK(bayes_update(0.7, 0.7, 0.3) ==
          doctest::Approx(0.8448275862068965).epsilon(1e-12));
}

TEST_CASE("bayes_update: rejects out-of-domain inputs") {
    CHECK_THROWS_AS(bayes_update(0.5, 0.0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(bayes_update(0.5, 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(bayes_update(0.5, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bayes_update(1.5, 0.5, 0.3), std::invalid_argument);
}

TEST_CASE("bayes_update: monotone in prior and likelihood") {
    for (double prior = 0.1; prior < 0.9; prior += 0.2) {
        CHECK(bayes_update(prior + 0.05, 0.6, 0.3) >=
              bayes_update(prior, 0.6, 0.3));
        CHECK(bayes_update(prior, 0.7, 0.3) >= bayes_update(prior, 0.6, 0.3));
    }
    CHECK(bayes_update(0.5, 0.6, 0.3) > 0.5);   // L > f raises
    CHECK(bayes_update(0.5, 0.2, 0.3) < 0.5);   // L < f lowers
}

TEST_CASE("bayes_update: repeated updates converge monotonically") {
    double p = 0.5;
    for (int i = 0; i < 40; ++i) {
        double next = bayes_update(p, 0.6, 0.3);
        CHECK(next >= p);
        p = next;
    }
    CHECK(p > 0.999999);

    p = 0.5;
    for (int i = 0; i < 40; ++i) {
        double next = bayes_update(p, 0.2, 0.3);
        CHECK(next <= p);
        p = next;
    }
    CHECK(p < 1e-6);
}

TEST_CASE("register_detection: first detection seeds an auxiliary target") {
    TargetRegistry reg;
    reg.register_detection(det_at(34.0, -118.0, 0.7), profile_with_map(0.7));
    REQUIRE(reg.targets().size() == 1);
    CHECK(reg.targets()[0].confidence == doctest::Approx(0.7));
    CHECK(reg.targets()[0].n_interpretations == 1);
    CHECK_FALSE(reg.targets()[0].promoted);
    CHECK(reg.priority_count() == 0);
}

TEST_CASE("register_detection: promotion lands exactly on the 4th pass") {
    TargetRegistry reg;
    auto profile = profile_with_map(0.7);   // false rate 0.3
    for (int pass = 0; pass < 4; ++pass)
        reg.register_detection(det_at(34.0, -118.0, 0.7, pass * 100.0), profile);
    REQUIRE(reg.targets().size() == 1);

    // Odds-ratio oracle: each pass multiplies the odds by 0.7 / 0.3.
    double odds = std::pow(7.0 / 3.0, 4);
    CHECK(reg.targets()[0].confidence ==
          doctest::Approx(odds / (1.0 + odds)).epsilon(1e-12));
    CHECK(reg.targets()[0].confidence > 0.95);
    CHECK(reg.targets()[0].promoted);
    CHECK(reg.priority_count() == 1);
    CHECK(reg.targets()[0].n_interpretations == 4);

    // The 3rd pass was still below the threshold.
    TargetRegistry three;
    for (int pass = 0; pass < 3; ++pass)
        three.register_detection(det_at(34.0, -118.0, 0.7, pass * 100.0), profile);
    CHECK(three.targets()[0].confidence < 0.95);
    CHECK(three.priority_count() == 0);
}

TEST_CASE("register_detection: detections outside the radius open new targets") {
    TargetRegistry reg;
    auto profile = profile_with_map(0.7);
    reg.register_detection(det_at(34.0, -118.0, 0.7), profile);
    reg.register_detection(det_at(34.6, -118.0, 0.7), profile);   // 0.6 deg away
    CHECK(reg.targets().size() == 2);
    reg.register_detection(det_at(34.04, -118.04, 0.7), profile);   // merges
    CHECK(reg.targets().size() == 2);
    CHECK(reg.targets()[0].n_interpretations == 2);
}

TEST_CASE("register_detection: centroid follows the confidence weighting") {
    TargetRegistry reg;
    auto profile = profile_with_map(0.7);
    reg.register_detection(det_at(34.0, -118.0, 0.6), profile);
    reg.register_detection(det_at(34.2, -118.2, 0.3), profile);
    double wsum = 0.6 + 0.3;
    CHECK(reg.targets()[0].lat_deg ==
          doctest::Approx((34.0 * 0.6 + 34.2 * 0.3) / wsum).epsilon(1e-12));
    CHECK(reg.targets()[0].lon_deg ==
          doctest::Approx((-118.0 * 0.6 - 118.2 * 0.3) / wsum).epsilon(1e-12));
}

TEST_CASE("register_detection: neutral likelihood keeps count and confidence") {
    TargetRegistry reg;
    auto profile = profile_with_map(0.7);
    reg.register_detection(det_at(34.0, -118.0, 0.3), profile);   // L == f
    for (int i = 0; i < 5; ++i)
        reg.register_detection(det_at(34.0, -118.0, 0.3, i * 10.0), profile);
    CHECK(reg.targets().size() == 1);
    CHECK(reg.targets()[0].confidence == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("promotion is permanent even if confidence later falls") {
    TargetRegistry reg;
    auto profile = profile_with_map(0.7);
    for (int pass = 0; pass < 5; ++pass)
        reg.register_detection(det_at(34.0, -118.0, 0.8, pass), profile);
    CHECK(reg.priority_count() == 1);
    for (int pass = 0; pass < 20; ++pass)
        reg.register_detection(det_at(34.0, -118.0, 0.05, 100.0 + pass), profile);
    CHECK(reg.targets()[0].confidence < 0.5);
    CHECK(reg.priority_count() == 1);   // still promoted
    CHECK(reg.targets()[0].promoted);
}

TEST_CASE("select_auxiliary: empty registry, truncation, squared weights") {
    TargetRegistry reg;
    CHECK(reg.select_auxiliary().empty());

    auto profile = profile_with_map(0.7);
    for (int i = 0; i < 60; ++i)
        reg.register_detection(det_at(-50.0 + i * 1.0, 10.0, 0.2 + 0.01 * (i % 50)),
                               profile);
    auto picked = reg.select_auxiliary();
    CHECK(picked.size() == 50);
    for (std::size_t i = 1; i < picked.size(); ++i)
        CHECK(picked[i - 1].first->confidence >= picked[i].first->confidence);
    for (const auto& [t, weight] : picked) {
        CHECK(weight == doctest::Approx(t->confidence * t->confidence));
        CHECK(weight < 1.0);
    }
}

TEST_CASE("select_auxiliary: promoted targets drop out of the pool") {
    TargetRegistry reg;
    auto profile = profile_with_map(0.7);
    for (int pass = 0; pass < 5; ++pass)
        reg.register_detection(det_at(34.0, -118.0, 0.8, pass), profile);
    reg.register_detection(det_at(10.0, 10.0, 0.9), profile);
    auto picked = reg.select_auxiliary();
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].first->lat_deg == doctest::Approx(10.0));
    CHECK(picked[0].second == doctest::Approx(0.81).epsilon(1e-12));
}
