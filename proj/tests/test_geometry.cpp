#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ferroconnect/geometry.hpp"

using namespace ferroconnect;
using geom::Containment;
using geom::Domain;
using geom::Segment;
using geom::Vec2;

namespace {

// Brute-force distance to the boundary by dense sampling of the polyline.
double sampled_boundary_distance(const Domain& dom, Vec2 x, int per_edge = 8) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dom.edge_count(); ++i) {
        const Segment e = dom.edge(i);
        for (int k = 0; k <= per_edge; ++k)
            best = std::min(best, geom::dist(x, e.at(static_cast<double>(k) / per_edge)));
    }
    return best;
}

Vec2 kidney_boundary(double theta, double shrink = 1.0) {
    const double r = shrink * (1.0 + 0.8 * std::cos(theta));
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

TEST_CASE("containment on the unit disk") {
    const Domain disk = Domain::disk();
    CHECK(disk.contains({0.0, 0.0}) == Containment::Inside);
    CHECK(disk.contains({2.0, 0.0}) == Containment::Outside);
    CHECK(disk.contains({1.0, 0.0}) == Containment::Boundary);  // polyline vertex
}

TEST_CASE("boundary projection on the disk") {
    const Domain disk = Domain::disk();
    const auto p = disk.boundary_projection({0.4, 0.0});
    CHECK(p.distance == Catch::Approx(0.6).margin(1e-6));
    CHECK(geom::dist(p.foot, {1.0, 0.0}) < 1e-3);
    CHECK_FALSE(p.multi_foot);

    const auto c = disk.boundary_projection({0.0, 0.0});
    CHECK(c.distance == Catch::Approx(1.0).margin(1e-6));
    CHECK(c.multi_foot);
    CHECK(c.arclength < 1e-2);  // deterministic choice: lowest arc-length foot
}

TEST_CASE("boundary projection on the kidney matches exhaustive sampling") {
    const Domain kid = Domain::kidney();
    // Points near the concave dent and elsewhere.
    const Vec2 probes[] = {{-0.15, 0.0}, {-0.1, 0.25}, {0.5, 0.3}, {-0.05, -0.3}, {1.0, 0.0}};
    for (const Vec2 x : probes) {
        REQUIRE(kid.contains(x) == Containment::Inside);
        const auto p = kid.boundary_projection(x);
        const double oracle = sampled_boundary_distance(kid, x, 4);
        CHECK(p.distance == Catch::Approx(oracle).margin(1e-6));
        CHECK(kid.boundary_distance(p.foot) < 1e-9);
    }
}

TEST_CASE("segment admissibility") {
    const Domain disk = Domain::disk();
    CHECK(disk.segment_admissible({{-0.5, 0.0}, {0.5, 0.0}}));
    CHECK(disk.segment_admissible({{0.9, 0.0}, {1.0, 0.0}}));  // endpoint on the boundary

    const Domain kid = Domain::kidney();
    const Vec2 a = 0.95 * kidney_boundary(2.4);
    const Vec2 b = 0.95 * kidney_boundary(-2.4);
    REQUIRE(kid.contains(a) == Containment::Inside);
    REQUIRE(kid.contains(b) == Containment::Inside);
    CHECK_FALSE(kid.segment_admissible({a, b}));  // crosses the dent
}

TEST_CASE("clip to domain") {
    const Domain disk = Domain::disk();
    const Segment inside{{-0.5, 0.0}, {0.5, 0.0}};
    const auto comps_in = disk.clip_to_domain(inside);
    REQUIRE(comps_in.size() == 1);
    CHECK(geom::dist(comps_in[0].p, inside.p) < 1e-12);
    CHECK(geom::dist(comps_in[0].q, inside.q) < 1e-12);

    CHECK(disk.clip_to_domain({{2.0, 0.0}, {3.0, 0.0}}).empty());

    const Domain kid = Domain::kidney();
    const Vec2 a = 0.95 * kidney_boundary(2.4);
    const Vec2 b = 0.95 * kidney_boundary(-2.4);
    const Segment cross{a, b};
    const auto comps = kid.clip_to_domain(cross);
    REQUIRE(comps.size() == 2);
    CHECK(geom::dist(comps.front().p, a) < 1e-12);
    CHECK(geom::dist(comps.back().q, b) < 1e-12);
    // Lengths against a dense containment-sampling oracle.
    const int n = 20000;
    double sampled_len = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) / n;
        if (kid.contains(cross.at(t)) != Containment::Outside)
            sampled_len += cross.length() / n;
    }
    double clipped_len = 0.0;
    for (const auto& c : comps) clipped_len += c.length();
    CHECK(clipped_len == Catch::Approx(sampled_len).margin(2e-3 * cross.length()));
    // Components are admissible and stay inside.
    for (const auto& c : comps) CHECK(kid.segment_admissible(c));
}

TEST_CASE("boundary geodesic distances on the disk") {
    const Domain disk = Domain::disk();
    CHECK(disk.boundary_geodesic({1.0, 0.0}, {0.0, 1.0}) == Catch::Approx(M_PI / 2).margin(1e-4));
    CHECK(disk.boundary_geodesic({1.0, 0.0}, {1.0, 0.0}) == 0.0);
    CHECK(disk.boundary_geodesic({1.0, 0.0}, {-1.0, 0.0}) == Catch::Approx(M_PI).margin(1e-4));
    CHECK_THROWS_AS(disk.boundary_geodesic({0.5, 0.0}, {1.0, 0.0}), usage_error);
}

TEST_CASE("geodesic dominates the chord") {
    const Domain kid = Domain::kidney();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, kid.perimeter());
    for (int k = 0; k < 50; ++k) {
        const Vec2 x = kid.point_at_arclength(u(rng));
        const Vec2 y = kid.point_at_arclength(u(rng));
        CHECK(kid.boundary_geodesic(x, y) >= geom::dist(x, y) - 1e-9);
    }
}

TEST_CASE("admissible segments stay inside under sampling") {
    const Domain kid = Domain::kidney();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int tested = 0;
    while (tested < 25) {
        const Vec2 a{1.6 * u(rng), 1.2 * u(rng)};
        const Vec2 b{1.6 * u(rng), 1.2 * u(rng)};
        if (kid.contains(a) != Containment::Inside || kid.contains(b) != Containment::Inside)
            continue;
        if (geom::dist(a, b) < 1e-3) continue;
        ++tested;
        if (!kid.segment_admissible({a, b})) continue;
        for (int k = 0; k <= 64; ++k)
            CHECK(kid.contains(Segment{a, b}.at(k / 64.0)) != Containment::Outside);
    }
}

TEST_CASE("generators produce valid domains") {
    for (const Domain& d : {Domain::disk(), Domain::ellipse(1.5, 0.8), Domain::kidney(),
                            Domain::rounded_square()}) {
        CHECK(d.perimeter() > 0.0);
        CHECK(d.max_turning_angle() < 0.05);
    }
    // Disk perimeter approaches 2*pi from below.
    CHECK(Domain::disk().perimeter() == Catch::Approx(2 * M_PI).margin(1e-4));
    CHECK(Domain::rounded_square().perimeter() ==
          Catch::Approx(8.0 * 0.7 + 2 * M_PI * 0.3).margin(1e-4));
}
