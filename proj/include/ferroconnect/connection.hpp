#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ferroconnect/errors.hpp"
#include "ferroconnect/geometry.hpp"

// Minimal connections of a finite point set relative to a planar domain:
// systems of straight segments in the closed domain joining the points to each
// other or to the boundary, with odd incidence at every point.
namespace ferroconnect::conn {

using geom::Domain;
using geom::Segment;
using geom::Vec2;

inline constexpr int kMaxSolverPoints = 16;
inline constexpr int kMaxOraclePoints = 8;
inline constexpr double kOrthogonalityTol = 1e-3;  // radians

struct EndpointTag {
    enum class Kind { Point, BoundaryFoot };
    Kind kind = Kind::Point;
    int point_index = -1;  // valid when kind == Point
    Vec2 location{};
};

struct TaggedSegment {
    Segment seg;
    EndpointTag tag_p;
    EndpointTag tag_q;
};

struct Connection {
    std::vector<TaggedSegment> segments;
    double total_length = 0.0;
};

// Deterministic total: lengths summed in sorted order, so equal segment multisets
// produce bitwise-equal totals regardless of construction order.
inline double sorted_total_length(const std::vector<TaggedSegment>& segs) {
    std::vector<double> lens;
    lens.reserve(segs.size());
    for (const auto& s : segs) lens.push_back(s.seg.length());
    std::sort(lens.begin(), lens.end());
    double total = 0.0;
    for (const double l : lens) total += l;
    return total;
}

inline void finalize(Connection& c) {
    auto key = [](const TaggedSegment& t) {
        Vec2 a = t.seg.p, b = t.seg.q;
        if (a.x > b.x || (a.x == b.x && a.y > b.y)) std::swap(a, b);
        return std::array<double, 4>{a.x, a.y, b.x, b.y};
    };
    std::sort(c.segments.begin(), c.segments.end(),
              [&](const TaggedSegment& u, const TaggedSegment& w) { return key(u) < key(w); });
    c.total_length = sorted_total_length(c.segments);
}

// Candidate moves priced once per instance and shared by solver and oracle.
struct CostMatrix {
    int p = 0;
    std::vector<double> boundary_cost;          // distance to the boundary foot
    std::vector<geom::Projection> feet;         // projection record per point
    std::vector<double> pair_cost;              // p*p; +inf when forbidden
    std::vector<std::uint8_t> pair_clipped;     // 1 when the pair is realized by two clipped pieces
    std::vector<Segment> clip_piece_a;          // piece containing point i (for pair i<j)
    std::vector<Segment> clip_piece_b;          // piece containing point j

    double pcost(int i, int j) const { return pair_cost[i * p + j]; }
    bool clipped(int i, int j) const { return pair_clipped[i * p + j] != 0; }
};

inline CostMatrix precompute_costs(const Domain& dom, const std::vector<Vec2>& pts) {
    const int p = static_cast<int>(pts.size());
    for (int i = 0; i < p; ++i) {
        if (dom.contains(pts[i]) != geom::Containment::Inside)
            throw usage_error("connection: point " + std::to_string(i) +
                              " must lie strictly inside the domain");
        for (int j = 0; j < i; ++j)
            if (geom::dist(pts[i], pts[j]) <= dom.tolerance())
                throw usage_error("connection: points must be distinct");
    }
    CostMatrix m;
    m.p = p;
    m.boundary_cost.resize(p);
    m.feet.resize(p);
    m.pair_cost.assign(static_cast<std::size_t>(p) * p, std::numeric_limits<double>::infinity());
    m.pair_clipped.assign(static_cast<std::size_t>(p) * p, 0);
    m.clip_piece_a.resize(static_cast<std::size_t>(p) * p);
    m.clip_piece_b.resize(static_cast<std::size_t>(p) * p);
    for (int i = 0; i < p; ++i) {
        m.feet[i] = dom.boundary_projection(pts[i]);
        m.boundary_cost[i] = m.feet[i].distance;
    }
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const Segment s{pts[i], pts[j]};
            double cost;
            bool clipped = false;
            Segment pa{}, pb{};
            if (dom.segment_admissible(s)) {
                cost = s.length();
            } else {
                // Exiting segment: admissible only as the two clipped pieces that
                // keep the endpoints and reach the boundary; otherwise forbidden.
                const auto comps = dom.clip_to_domain(s);
                cost = std::numeric_limits<double>::infinity();
                if (comps.size() >= 2) {
                    const Segment& first = comps.front();
                    const Segment& last = comps.back();
                    const double tol = 1e3 * dom.tolerance();
                    if (geom::dist(first.p, pts[i]) <= tol && geom::dist(last.q, pts[j]) <= tol) {
                        cost = first.length() + last.length();
                        clipped = true;
                        pa = first;
                        pb = last;
                    }
                }
            }
            m.pair_cost[i * p + j] = m.pair_cost[j * p + i] = cost;
            m.pair_clipped[i * p + j] = m.pair_clipped[j * p + i] = clipped ? 1 : 0;
            m.clip_piece_a[i * p + j] = m.clip_piece_a[j * p + i] = pa;
            m.clip_piece_b[i * p + j] = m.clip_piece_b[j * p + i] = pb;
        }
    }
    return m;
}

namespace detail {

inline EndpointTag point_tag(int i, Vec2 loc) { return {EndpointTag::Kind::Point, i, loc}; }
inline EndpointTag foot_tag(Vec2 loc) { return {EndpointTag::Kind::BoundaryFoot, -1, loc}; }

inline void emit_pair(const CostMatrix& m, const std::vector<Vec2>& pts, int i, int j,
                      Connection& c) {
    if (m.clipped(i, j)) {
        const Segment& a = (i < j) ? m.clip_piece_a[i * m.p + j] : m.clip_piece_b[j * m.p + i];
        const Segment& b = (i < j) ? m.clip_piece_b[i * m.p + j] : m.clip_piece_a[j * m.p + i];
        c.segments.push_back({a, point_tag(i, pts[i]), foot_tag(a.q)});
        c.segments.push_back({b, foot_tag(b.p), point_tag(j, pts[j])});
    } else {
        c.segments.push_back({{pts[i], pts[j]}, point_tag(i, pts[i]), point_tag(j, pts[j])});
    }
}

inline void emit_foot(const CostMatrix& m, const std::vector<Vec2>& pts, int i, Connection& c) {
    c.segments.push_back({{pts[i], m.feet[i].foot}, point_tag(i, pts[i]), foot_tag(m.feet[i].foot)});
}

}  // namespace detail

// Exact subset dynamic program over the canonical family: each point is either
// paired with one other point or joined to its boundary foot.
inline Connection solve_min_connection(const Domain& dom, const std::vector<Vec2>& pts,
                                       const CostMatrix& m) {
    const int p = static_cast<int>(pts.size());
    if (p > kMaxSolverPoints) throw capacity_error("solve_min_connection: more than 16 points");
    Connection c;
    if (p == 0) {
        finalize(c);
        return c;
    }
    const int full = (1 << p) - 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f(static_cast<std::size_t>(full) + 1, inf);
    std::vector<int> choice(static_cast<std::size_t>(full) + 1, -1);  // -1 foot, else partner
    f[0] = 0.0;
    for (int s = 1; s <= full; ++s) {
        int i = 0;
        while (!(s & (1 << i))) ++i;
        // Boundary foot for the lowest point of the subset.
        const int rest = s & ~(1 << i);
        if (f[rest] + m.boundary_cost[i] < f[s]) {
            f[s] = f[rest] + m.boundary_cost[i];
            choice[s] = -1;
        }
        for (int j = i + 1; j < p; ++j) {
            if (!(s & (1 << j))) continue;
            const double cst = m.pcost(i, j);
            if (cst == inf) continue;
            const int rem = s & ~(1 << i) & ~(1 << j);
            if (f[rem] + cst < f[s]) {
                f[s] = f[rem] + cst;
                choice[s] = j;
            }
        }
    }
    int s = full;
    while (s) {
        int i = 0;
        while (!(s & (1 << i))) ++i;
        if (choice[s] < 0) {
            detail::emit_foot(m, pts, i, c);
            s &= ~(1 << i);
        } else {
            detail::emit_pair(m, pts, i, choice[s], c);
            s &= ~(1 << i) & ~(1 << choice[s]);
        }
    }
    (void)dom;
    finalize(c);
    return c;
}

inline Connection solve_min_connection(const Domain& dom, const std::vector<Vec2>& pts) {
    return solve_min_connection(dom, pts, precompute_costs(dom, pts));
}

// Exhaustive branch-and-bound over all segment systems with odd incidence at
// every point (up to 3 incident segments each); certifies the solver without
// assuming the one-segment-per-point structure.
inline Connection oracle_min_connection(const Domain& dom, const std::vector<Vec2>& pts,
                                        const CostMatrix& m) {
    const int p = static_cast<int>(pts.size());
    if (p > kMaxOraclePoints) throw capacity_error("oracle_min_connection: more than 8 points");
    Connection best_conn;
    if (p == 0) {
        finalize(best_conn);
        return best_conn;
    }

    struct Move {
        double cost;
        int i, j;  // j = -1 for a boundary foot
    };
    std::vector<Move> moves;
    for (int i = 0; i < p; ++i) moves.push_back({m.boundary_cost[i], i, -1});
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (std::isfinite(m.pcost(i, j))) moves.push_back({m.pcost(i, j), i, j});
    std::sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<double> cheapest(p, std::numeric_limits<double>::infinity());
    for (const Move& mv : moves) {
        cheapest[mv.i] = std::min(cheapest[mv.i], mv.cost);
        if (mv.j >= 0) cheapest[mv.j] = std::min(cheapest[mv.j], mv.cost);
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_moves;
    std::vector<int> deg(p, 0);
    std::vector<std::uint8_t> used(moves.size(), 0);
    std::vector<int> stack;

    auto lower_bound_rest = [&]() {
        double lb = 0.0;
        for (int i = 0; i < p; ++i)
            if (deg[i] % 2 == 0) lb += 0.5 * cheapest[i];
        return lb;
    };

    std::function<void(double)> rec = [&](double cost) {
        if (cost + lower_bound_rest() >= best) return;
        int v = -1;
        for (int i = 0; i < p; ++i)
            if (deg[i] % 2 == 0) {
                v = i;
                break;
            }
        if (v < 0) {
            if (cost < best) {
                best = cost;
                best_moves = stack;
            }
            return;
        }
        for (std::size_t k = 0; k < moves.size(); ++k) {
            if (used[k]) continue;
            const Move& mv = moves[k];
            if (mv.i != v && mv.j != v) continue;
            if (deg[mv.i] >= 3 || (mv.j >= 0 && deg[mv.j] >= 3)) continue;
            used[k] = 1;
            ++deg[mv.i];
            if (mv.j >= 0) ++deg[mv.j];
            stack.push_back(static_cast<int>(k));
            rec(cost + mv.cost);
            stack.pop_back();
            --deg[mv.i];
            if (mv.j >= 0) --deg[mv.j];
            used[k] = 0;
        }
    };
    rec(0.0);
    if (!std::isfinite(best)) throw numeric_error("oracle_min_connection: no feasible connection");

    for (const int k : best_moves) {
        const Move& mv = moves[static_cast<std::size_t>(k)];
        if (mv.j < 0)
            detail::emit_foot(m, pts, mv.i, best_conn);
        else
            detail::emit_pair(m, pts, mv.i, mv.j, best_conn);
    }
    (void)dom;
    finalize(best_conn);
    return best_conn;
}

inline Connection oracle_min_connection(const Domain& dom, const std::vector<Vec2>& pts) {
    return oracle_min_connection(dom, pts, precompute_costs(dom, pts));
}

struct ValidationReport {
    bool admissible = true;
    bool tagging = true;
    bool parity = true;
    bool length_consistent = true;
    std::vector<std::string> notes;

    bool pass() const { return admissible && tagging && parity && length_consistent; }
};

inline ValidationReport validate_connection(const Domain& dom, const std::vector<Vec2>& pts,
                                            const Connection& c) {
    ValidationReport r;
    const double tol = 1e3 * dom.tolerance();
    std::vector<int> incidence(pts.size(), 0);
    for (std::size_t k = 0; k < c.segments.size(); ++k) {
        const TaggedSegment& t = c.segments[k];
        if (t.seg.length() <= dom.tolerance() || !dom.segment_admissible(t.seg)) {
            r.admissible = false;
            r.notes.push_back("segment " + std::to_string(k) + " not admissible");
        }
        int boundary_tags = 0;
        for (const auto* tag : {&t.tag_p, &t.tag_q}) {
            const Vec2 loc = (tag == &t.tag_p) ? t.seg.p : t.seg.q;
            if (tag->kind == EndpointTag::Kind::Point) {
                if (tag->point_index < 0 || tag->point_index >= static_cast<int>(pts.size()) ||
                    geom::dist(loc, pts[static_cast<std::size_t>(tag->point_index)]) > tol) {
                    r.tagging = false;
                    r.notes.push_back("segment " + std::to_string(k) + " has a bad point tag");
                } else {
                    ++incidence[static_cast<std::size_t>(tag->point_index)];
                }
            } else {
                ++boundary_tags;
                if (dom.boundary_distance(loc) > tol) {
                    r.tagging = false;
                    r.notes.push_back("segment " + std::to_string(k) +
                                      " boundary tag is not on the boundary");
                }
            }
        }
        if (boundary_tags == 2) {
            r.tagging = false;
            r.notes.push_back("segment " + std::to_string(k) + " joins two boundary points");
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (incidence[i] % 2 == 0) {
            r.parity = false;
            r.notes.push_back("point " + std::to_string(i) + " has even incidence " +
                              std::to_string(incidence[i]));
        }
    }
    if (std::abs(c.total_length - sorted_total_length(c.segments)) > 1e-12 * (1.0 + c.total_length))
        r.length_consistent = false;
    return r;
}

inline bool segments_strictly_disjoint(const Segment& a, const Segment& b, double tol) {
    double d = std::numeric_limits<double>::infinity();
    d = std::min(d, geom::point_segment_distance(a.p, b.p, b.q));
    d = std::min(d, geom::point_segment_distance(a.q, b.p, b.q));
    d = std::min(d, geom::point_segment_distance(b.p, a.p, a.q));
    d = std::min(d, geom::point_segment_distance(b.q, a.p, a.q));
    if (d <= tol) return false;
    const Vec2 da = a.q - a.p, db = b.q - b.p;
    const double den = geom::cross(da, db);
    if (std::abs(den) > 1e-15) {
        const Vec2 w = b.p - a.p;
        const double t = geom::cross(w, db) / den;
        const double u = geom::cross(w, da) / den;
        if (t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0) return false;
    }
    return true;
}

struct MinimalityReport {
    bool disjoint = true;            // (a) segments pairwise disjoint
    bool unique_incidence = true;    // (b) one incident segment per interior point
    bool orthogonal = true;          // (c) boundary segments normal to the boundary
    bool interior_touch = true;      // (d) boundary met at most at an endpoint
    double max_angle_deviation = 0.0;

    bool pass() const { return disjoint && unique_incidence && orthogonal && interior_touch; }
};

inline MinimalityReport minimality_diagnostics(const Domain& dom, const Connection& c) {
    MinimalityReport r;
    const double tol = dom.tolerance();
    for (std::size_t i = 0; i < c.segments.size(); ++i)
        for (std::size_t j = i + 1; j < c.segments.size(); ++j)
            if (!segments_strictly_disjoint(c.segments[i].seg, c.segments[j].seg, tol))
                r.disjoint = false;

    std::vector<int> incidence;
    for (const auto& t : c.segments)
        for (const auto* tag : {&t.tag_p, &t.tag_q})
            if (tag->kind == EndpointTag::Kind::Point) {
                if (tag->point_index >= static_cast<int>(incidence.size()))
                    incidence.resize(static_cast<std::size_t>(tag->point_index) + 1, 0);
                ++incidence[static_cast<std::size_t>(tag->point_index)];
            }
    for (const int inc : incidence)
        if (inc != 1) r.unique_incidence = false;

    for (const auto& t : c.segments) {
        const bool p_bd = t.tag_p.kind == EndpointTag::Kind::BoundaryFoot;
        const bool q_bd = t.tag_q.kind == EndpointTag::Kind::BoundaryFoot;
        if (p_bd || q_bd) {
            const Vec2 interior = p_bd ? t.seg.q : t.seg.p;
            const Vec2 foot = p_bd ? t.seg.p : t.seg.q;
            const Vec2 dir = geom::normalized(foot - interior);
            const Vec2 n_in = dom.boundary_projection(foot).inward_normal;
            // dir should run against the inward normal
            const double ang = std::atan2(std::abs(geom::cross(dir, -1.0 * n_in)),
                                          geom::dot(dir, -1.0 * n_in));
            r.max_angle_deviation = std::max(r.max_angle_deviation, ang);
            if (ang > kOrthogonalityTol) r.orthogonal = false;
        }
        // Interior of the segment must avoid the boundary.
        const int n_samples = 64;
        const double skip = 1e3 * tol / std::max(t.seg.length(), tol);
        for (int k = 1; k < n_samples; ++k) {
            const double u = static_cast<double>(k) / n_samples;
            if (u < skip || u > 1.0 - skip) continue;
            if (dom.boundary_distance(t.seg.at(u)) <= tol) {
                r.interior_touch = false;
                break;
            }
        }
    }
    return r;
}

}  // namespace ferroconnect::conn
