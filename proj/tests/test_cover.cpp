#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ferroconnect/cover.hpp"

using namespace ferroconnect;
using cover::Director;
using geom::Vec2;

namespace {
Director random_director(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    const double th = u(rng);
    return {std::cos(th), std::sin(th)};
}
}  // namespace

TEST_CASE("angle doubling") {
    CHECK(geom::dist(cover::apply_cover({1.0, 0.0}), {1.0, 0.0}) < 1e-15);
    CHECK(geom::dist(cover::apply_cover({0.0, 1.0}), {-1.0, 0.0}) < 1e-15);
    const double s = std::sqrt(0.5);
    CHECK(geom::dist(cover::apply_cover({s, s}), {0.0, 1.0}) < 1e-15);
    CHECK_THROWS_AS(cover::apply_cover({0.5, 0.0}), numeric_error);
}

TEST_CASE("deck transform is an involution over the cover") {
    CHECK(geom::dist(cover::deck_transform({1.0, 0.0}), {-1.0, 0.0}) == 0.0);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 100; ++k) {
        const Director v = random_director(rng);
        const Director w = cover::deck_transform(cover::deck_transform(v));
        CHECK(geom::dist(w, v) == 0.0);
        CHECK(geom::dist(cover::apply_cover(cover::deck_transform(v)), cover::apply_cover(v)) <
              1e-15);
    }
}

TEST_CASE("pairing function endpoints and symmetries") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 100; ++k) {
        const Director v = random_director(rng);
        CHECK(cover::pairing_xi(v, v) == 1.0);
        CHECK(cover::pairing_xi(v, cover::deck_transform(v)) == -1.0);
        const Director w = random_director(rng);
        const double a = cover::pairing_xi(v, w);
        CHECK(a == cover::pairing_xi(w, v));
        CHECK(a == cover::pairing_xi(cover::deck_transform(v), cover::deck_transform(w)));
        CHECK(a >= -1.0);
        CHECK(a <= 1.0);
    }
    // Perpendicular directors cover to antipodal points: outside the support.
    CHECK(cover::pairing_xi({1.0, 0.0}, {0.0, 1.0}) == 0.0);
}

TEST_CASE("square roots of a unit tensor") {
    {
        const auto [r1, r2] = cover::directors_of_tensor({1.0, 0.0});
        CHECK(geom::dist(r1, {1.0, 0.0}) < 1e-15);
        CHECK(geom::dist(r2, {-1.0, 0.0}) < 1e-15);
    }
    {
        const auto [r1, r2] = cover::directors_of_tensor({-1.0, 0.0});
        CHECK(geom::dist(r1, {0.0, 1.0}) < 1e-15);
        CHECK(geom::dist(r2, {0.0, -1.0}) < 1e-15);
    }
    std::mt19937_64 rng(9);
    for (int k = 0; k < 100; ++k) {
        const Director q = random_director(rng);  // any unit vector is a valid q
        const auto [r1, r2] = cover::directors_of_tensor(q);
        CHECK(geom::dist(r1, cover::deck_transform(r2)) < 1e-15);
        CHECK(geom::dist(cover::apply_cover(r1), q) < 1e-12);
        CHECK(geom::dist(cover::apply_cover(r2), q) < 1e-12);
    }
}

TEST_CASE("covered angular steps are twice the director steps") {
    // Along a fine unit-speed path on the circle the covered field advances at
    // exactly twice the angular rate.
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double phi = 0.3;
    for (int k = 0; k < 200; ++k) {
        const double dphi = 0.01 * u(rng);
        const Director v0{std::cos(phi), std::sin(phi)};
        const Director v1{std::cos(phi + dphi), std::sin(phi + dphi)};
        const Vec2 q0 = cover::apply_cover(v0), q1 = cover::apply_cover(v1);
        const double dv = std::atan2(geom::cross(v0, v1), geom::dot(v0, v1));
        const double dq = std::atan2(geom::cross(q0, q1), geom::dot(q0, q1));
        CHECK(dq == Catch::Approx(2.0 * dv).margin(1e-12));
        phi += dphi;
    }
}
