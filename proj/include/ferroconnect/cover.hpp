#pragma once

#include <cmath>
#include <utility>

#include "ferroconnect/errors.hpp"
#include "ferroconnect/geometry.hpp"

// The double covering of the circle z -> z^2, written on unit 2-vectors:
// a director n covers the traceless symmetric tensor Q = sqrt(2)(n (x) n - I/2),
// identified with the 2-vector q = sqrt(2)(Q11, Q12) = (n1^2 - n2^2, 2 n1 n2).
namespace ferroconnect::cover {

using geom::Vec2;

inline constexpr double kUnitTol = 1e-12;   // tolerance on |v| = 1
inline constexpr double kXiDelta0 = M_PI / 2.0;  // support radius of the pairing function

using Director = Vec2;  // unit vector on the orienting circle
using QVec = Vec2;      // q = sqrt(2)(Q11, Q12); unit iff |Q| = 1

inline void require_unit(Vec2 v, const char* who) {
    if (std::abs(geom::norm(v) - 1.0) > kUnitTol)
        throw numeric_error(std::string(who) + ": input is not a unit vector");
}

// Angle doubling: q = n^2 in complex notation.
inline QVec apply_cover(Director v) {
    require_unit(v, "apply_cover");
    return {v.x * v.x - v.y * v.y, 2.0 * v.x * v.y};
}

// The deck involution exchanging the two preimages of each q.
inline Director deck_transform(Director v) { return {-v.x, -v.y}; }

// Geodesic (angular) distance on the circle between unit vectors, in [0, pi].
inline double circle_distance(Vec2 a, Vec2 b) {
    return std::atan2(std::abs(geom::cross(a, b)), geom::dot(a, b));
}

// Pairing function: +-1 exactly at equal / deck-opposite directors, cut off at
// covered angular distance delta0, and invariant under the deck transform on both slots.
inline double pairing_xi(Director v1, Director v2) {
    require_unit(v1, "pairing_xi");
    require_unit(v2, "pairing_xi");
    const double covered = circle_distance(apply_cover(v1), apply_cover(v2));
    const double sign = geom::dot(v1, v2) >= 0.0 ? 1.0 : -1.0;
    return sign * std::max(0.0, 1.0 - covered / kXiDelta0);
}

// The two square roots of a unit q, the first ordered by (v1 > 0) or (v1 = 0, v2 > 0).
inline std::pair<Director, Director> directors_of_tensor(QVec q) {
    require_unit(q, "directors_of_tensor");
    const double half = 0.5 * std::atan2(q.y, q.x);
    Director v{std::cos(half), std::sin(half)};
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = deck_transform(v);
    return {v, deck_transform(v)};
}

// Root of q nearest to the reference director; used for lifting continuation.
inline Director nearest_root(QVec q, Director ref) {
    auto [r1, r2] = directors_of_tensor(q);
    return geom::dot(r1, ref) >= geom::dot(r2, ref) ? r1 : r2;
}

}  // namespace ferroconnect::cover
