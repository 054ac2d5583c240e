#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ferroconnect/errors.hpp"

namespace ferroconnect::geom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

inline Vec2 normalized(Vec2 a) {
    const double n = norm(a);
    if (n == 0.0) throw numeric_error("normalized: zero vector");
    return {a.x / n, a.y / n};
}

// Left-hand normal; for a counterclockwise boundary this points into the domain.
inline Vec2 left_normal(Vec2 t) { return {-t.y, t.x}; }

struct Segment {
    Vec2 p;
    Vec2 q;

    double length() const { return dist(p, q); }
    Vec2 at(double t) const { return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)}; }
};

enum class Containment { Inside, Boundary, Outside };

struct Projection {
    double distance = 0.0;
    Vec2 foot{};
    Vec2 inward_normal{};
    double arclength = 0.0;  // arc-length parameter of the foot along the boundary
    bool multi_foot = false; // two or more geometrically distinct minimizers
};

inline double point_segment_distance(Vec2 x, Vec2 a, Vec2 b, double* t_out = nullptr) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(x - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (t_out) *t_out = t;
    return dist(x, a + t * ab);
}

// Simply connected planar region bounded by a closed counterclockwise polyline.
class Domain {
public:
    Domain() = default;

    Domain(std::vector<Vec2> vertices, std::string name = "custom", double target_spacing = 0.0)
        : verts_(std::move(vertices)), name_(std::move(name)), target_h_(target_spacing) {
        if (verts_.size() < 3) throw usage_error("domain: at least 3 boundary vertices required");
        init();
    }

    const std::vector<Vec2>& vertices() const { return verts_; }
    const std::string& name() const { return name_; }
    double perimeter() const { return cum_.back(); }
    double diameter() const { return diameter_; }
    double tolerance() const { return tau_; }
    double target_spacing() const { return target_h_; }
    Vec2 bbox_min() const { return bb_min_; }
    Vec2 bbox_max() const { return bb_max_; }
    double max_turning_angle() const { return max_turn_; }

    std::size_t edge_count() const { return verts_.size(); }
    Segment edge(std::size_t i) const { return {verts_[i], verts_[(i + 1) % verts_.size()]}; }

    // Point on the boundary at a given arc-length parameter (wrapped to the perimeter).
    Vec2 point_at_arclength(double s) const {
        const double per = perimeter();
        s = std::fmod(s, per);
        if (s < 0.0) s += per;
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
        std::size_t i = static_cast<std::size_t>(std::distance(cum_.begin(), it));
        i = (i == 0) ? 0 : i - 1;
        if (i >= verts_.size()) i = verts_.size() - 1;
        const Segment e = edge(i);
        const double el = e.length();
        const double t = el > 0.0 ? (s - cum_[i]) / el : 0.0;
        return e.at(t);
    }

    Containment contains(Vec2 x) const {
        if (boundary_distance(x) <= tau_) return Containment::Boundary;
        return crossing_parity(x) ? Containment::Inside : Containment::Outside;
    }

    double boundary_distance(Vec2 x) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < verts_.size(); ++i) {
            const Segment e = edge(i);
            best = std::min(best, point_segment_distance(x, e.p, e.q));
        }
        return best;
    }

    Projection boundary_projection(Vec2 x) const {
        struct Cand {
            double d;
            double t;
            std::size_t i;
        };
        double best = std::numeric_limits<double>::infinity();
        std::vector<Cand> cands;
        for (std::size_t i = 0; i < verts_.size(); ++i) {
            const Segment e = edge(i);
            double t = 0.0;
            const double d = point_segment_distance(x, e.p, e.q, &t);
            if (d < best - tau_) {
                best = d;
                cands.clear();
                cands.push_back({d, t, i});
            } else if (d <= best + tau_) {
                best = std::min(best, d);
                cands.push_back({d, t, i});
            }
        }
        // Re-filter against the final minimum, then take the lowest arc-length foot.
        Projection proj;
        proj.distance = best;
        double best_arc = std::numeric_limits<double>::infinity();
        Vec2 best_foot{};
        std::size_t best_edge = 0;
        double sep = 0.0;
        Vec2 first_foot{};
        bool have_first = false;
        for (const Cand& c : cands) {
            if (c.d > best + tau_) continue;
            const Segment e = edge(c.i);
            const Vec2 foot = e.at(c.t);
            if (!have_first) {
                first_foot = foot;
                have_first = true;
            } else {
                sep = std::max(sep, dist(first_foot, foot));
            }
            const double arc = cum_[c.i] + c.t * e.length();
            if (arc < best_arc) {
                best_arc = arc;
                best_foot = foot;
                best_edge = c.i;
            }
        }
        proj.foot = best_foot;
        proj.arclength = best_arc;
        // Distinct minimizers must be separated by more than a few polyline
        // edges; ties straddling a single vertex are discretization artifacts.
        const double distinct_sep =
            std::max(1e-6 * diameter_, 4.0 * perimeter() / static_cast<double>(verts_.size()));
        proj.multi_foot = sep > distinct_sep;
        proj.inward_normal = inward_normal_at(best_edge, best_foot);
        return proj;
    }

    // True iff every point of s lies in the closed domain.
    bool segment_admissible(const Segment& s) const {
        if (s.length() <= tau_) throw usage_error("segment_admissible: degenerate segment");
        const auto ts = boundary_split_params(s);
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const double tm = 0.5 * (ts[k] + ts[k + 1]);
            if (contains(s.at(tm)) == Containment::Outside) return false;
        }
        return true;
    }

    // Maximal closed sub-segments of s inside the closed domain, ordered along s.
    std::vector<Segment> clip_to_domain(const Segment& s) const {
        const auto ts = boundary_split_params(s);
        std::vector<std::pair<double, double>> kept;
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const double a = ts[k], b = ts[k + 1];
            const double tm = 0.5 * (a + b);
            if (contains(s.at(tm)) == Containment::Outside) continue;
            if (!kept.empty() && std::abs(kept.back().second - a) < 1e-15) {
                kept.back().second = b;
            } else {
                kept.push_back({a, b});
            }
        }
        std::vector<Segment> out;
        const double min_t = tau_ / std::max(s.length(), tau_);
        for (const auto& [a, b] : kept) {
            if (b - a <= min_t) continue;  // drop point components
            out.push_back({s.at(a), s.at(b)});
        }
        return out;
    }

    // Arc-length distance along the boundary, minimum of the two directions.
    double boundary_geodesic(Vec2 x, Vec2 y) const {
        const double loose = 1e3 * tau_;
        if (boundary_distance(x) > loose || boundary_distance(y) > loose)
            throw usage_error("boundary_geodesic: point not on boundary");
        const double sx = boundary_projection(x).arclength;
        const double sy = boundary_projection(y).arclength;
        const double arc = std::abs(sx - sy);
        return std::min(arc, perimeter() - arc);
    }

    static Domain disk(double radius = 1.0, std::size_t n = 4096);
    static Domain ellipse(double a, double b, std::size_t n = 8192);
    static Domain kidney(double scale = 1.0, std::size_t n = 32768);
    static Domain rounded_square(double half_side = 1.0, double corner_radius = 0.3,
                                 std::size_t n = 8192);

private:
    void init() {
        double area2 = 0.0;
        for (std::size_t i = 0; i < verts_.size(); ++i) {
            const Segment e = edge(i);
            area2 += cross(e.p, e.q);
        }
        if (area2 <= 0.0) throw usage_error("domain: boundary must be counterclockwise");
        cum_.resize(verts_.size() + 1);
        cum_[0] = 0.0;
        bb_min_ = bb_max_ = verts_[0];
        for (std::size_t i = 0; i < verts_.size(); ++i) {
            const Segment e = edge(i);
            const double el = e.length();
            if (el <= 0.0) throw usage_error("domain: repeated boundary vertex");
            cum_[i + 1] = cum_[i] + el;
            bb_min_.x = std::min(bb_min_.x, verts_[i].x);
            bb_min_.y = std::min(bb_min_.y, verts_[i].y);
            bb_max_.x = std::max(bb_max_.x, verts_[i].x);
            bb_max_.y = std::max(bb_max_.y, verts_[i].y);
        }
        diameter_ = dist(bb_min_, bb_max_);
        tau_ = 1e-9 * diameter_;
        max_turn_ = 0.0;
        for (std::size_t i = 0; i < verts_.size(); ++i) {
            const Vec2 t0 = normalized(edge((i + verts_.size() - 1) % verts_.size()).q -
                                       edge((i + verts_.size() - 1) % verts_.size()).p);
            const Vec2 t1 = normalized(edge(i).q - edge(i).p);
            max_turn_ = std::max(max_turn_, std::abs(std::atan2(cross(t0, t1), dot(t0, t1))));
        }
        if (max_turn_ > turning_cap_)
            throw usage_error("domain: turning angle " + std::to_string(max_turn_) +
                              " exceeds cap; refine the boundary polyline");
    }

    bool crossing_parity(Vec2 x) const {
        bool inside = false;
        const std::size_t n = verts_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& vi = verts_[i];
            const Vec2& vj = verts_[j];
            if ((vi.y > x.y) != (vj.y > x.y)) {
                const double xi = (vj.x - vi.x) * (x.y - vi.y) / (vj.y - vi.y) + vi.x;
                if (x.x < xi) inside = !inside;
            }
        }
        return inside;
    }

    Vec2 inward_normal_at(std::size_t edge_idx, Vec2 foot) const {
        const Segment e = edge(edge_idx);
        const double tv = dist(foot, e.p) / e.length();
        const double vertex_tol = tau_ / std::max(e.length(), tau_);
        Vec2 n;
        if (tv <= vertex_tol) {
            const std::size_t prev = (edge_idx + verts_.size() - 1) % verts_.size();
            n = normalized(left_normal(normalized(edge(prev).q - edge(prev).p)) +
                           left_normal(normalized(e.q - e.p)));
        } else if (tv >= 1.0 - vertex_tol) {
            const std::size_t next = (edge_idx + 1) % verts_.size();
            n = normalized(left_normal(normalized(e.q - e.p)) +
                           left_normal(normalized(edge(next).q - edge(next).p)));
        } else {
            n = left_normal(normalized(e.q - e.p));
        }
        return n;
    }

    // Parameters along s where it meets the boundary polyline, including 0 and 1.
    std::vector<double> boundary_split_params(const Segment& s) const {
        std::vector<double> ts{0.0, 1.0};
        const Vec2 d = s.q - s.p;
        for (std::size_t i = 0; i < verts_.size(); ++i) {
            const Segment e = edge(i);
            const Vec2 ed = e.q - e.p;
            const double denom = cross(d, ed);
            const Vec2 w = e.p - s.p;
            if (std::abs(denom) > 1e-15 * std::max(1.0, norm(d) * norm(ed))) {
                const double t = cross(w, ed) / denom;
                const double u = cross(w, d) / denom;
                if (t >= -1e-12 && t <= 1.0 + 1e-12 && u >= -1e-12 && u <= 1.0 + 1e-12)
                    ts.push_back(std::clamp(t, 0.0, 1.0));
            } else if (std::abs(cross(w, d)) <= tau_ * std::max(1.0, norm(d))) {
                // Collinear overlap: split at the projections of the edge endpoints.
                const double len2 = dot(d, d);
                if (len2 > 0.0) {
                    for (const Vec2& pt : {e.p, e.q}) {
                        const double t = dot(pt - s.p, d) / len2;
                        if (t >= 0.0 && t <= 1.0) ts.push_back(t);
                    }
                }
            }
        }
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                 ts.end());
        return ts;
    }

    std::vector<Vec2> verts_;
    std::vector<double> cum_;
    std::string name_;
    double target_h_ = 0.0;
    double diameter_ = 0.0;
    double tau_ = 0.0;
    double max_turn_ = 0.0;
    static constexpr double turning_cap_ = 0.05;
    Vec2 bb_min_{}, bb_max_{};
};

inline Domain Domain::disk(double radius, std::size_t n) {
    std::vector<Vec2> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        v[i] = {radius * std::cos(th), radius * std::sin(th)};
    }
    return Domain(std::move(v), "disk");
}

inline Domain Domain::ellipse(double a, double b, std::size_t n) {
    if (a <= 0.0 || b <= 0.0) throw usage_error("ellipse: semi-axes must be positive");
    std::vector<Vec2> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        v[i] = {a * std::cos(th), b * std::sin(th)};
    }
    return Domain(std::move(v), "ellipse");
}

// Limacon r = 1 + 0.8 cos(theta): simply connected with a concave dent at theta = pi.
inline Domain Domain::kidney(double scale, std::size_t n) {
    std::vector<Vec2> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        const double r = scale * (1.0 + 0.8 * std::cos(th));
        v[i] = {r * std::cos(th), r * std::sin(th)};
    }
    return Domain(std::move(v), "kidney");
}

inline Domain Domain::rounded_square(double half_side, double corner_radius, std::size_t n) {
    if (corner_radius <= 0.0 || corner_radius >= half_side)
        throw usage_error("rounded_square: need 0 < corner_radius < half_side");
    const double a = half_side, r = corner_radius;
    const double straight = 2.0 * (a - r);
    const double quarter = 0.5 * M_PI * r;
    const double total = 4.0 * (straight + quarter);
    std::vector<Vec2> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = total * static_cast<double>(i) / static_cast<double>(n);
        const int side = static_cast<int>(s / (straight + quarter));
        s -= side * (straight + quarter);
        const double rot = 0.5 * M_PI * side;
        Vec2 p;
        if (s < straight) {
            p = {a, -(a - r) + s};  // right edge, counterclockwise
        } else {
            const double th = (s - straight) / r;  // arc around (a-r, a-r)
            p = {a - r + r * std::cos(th), a - r + r * std::sin(th)};
        }
        const double c = std::cos(rot), sn = std::sin(rot);
        v.push_back({c * p.x - sn * p.y, sn * p.x + c * p.y});
    }
    return Domain(std::move(v), "rounded_square");
}

}  // namespace ferroconnect::geom
