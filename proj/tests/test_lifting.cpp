#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "ferroconnect/lifting.hpp"

using namespace ferroconnect;
using conn::Connection;
using conn::EndpointTag;
using geom::Domain;
using geom::Vec2;
using grid::EdgeSet;
using grid::GridField;
using grid::PixelSet;

namespace {

GridField vortex_field(const Domain& dom, int n, const std::vector<Vec2>& centers, int power = 1) {
    GridField f = grid::make_domain_field(dom, n, 2);
    for (int c = 0; c < f.g.size(); ++c) {
        if (!f.in(c)) continue;
        const Vec2 x = f.g.center(c);
        std::complex<double> q(1.0, 0.0);
        for (const Vec2& a : centers) {
            std::complex<double> z(x.x - a.x, x.y - a.y);
            const double m = std::abs(z);
            if (m < 1e-12)
                q *= std::complex<double>(1.0, 0.0);
            else
                q *= std::pow(z / m, power);
        }
        f.set_vec(c, {q.real(), q.imag()});
    }
    return f;
}

GridField constant_field(const Domain& dom, int n, Vec2 value = {1.0, 0.0}) {
    GridField f = grid::make_domain_field(dom, n, 2);
    for (int c = 0; c < f.g.size(); ++c)
        if (f.in(c)) f.set_vec(c, value);
    return f;
}

std::vector<int> ring_loop(const GridField& f, int half_width) {
    // Square ring of cells centred on the grid middle, walked counterclockwise.
    const int ci = f.g.nx / 2, cj = f.g.ny / 2, m = half_width;
    std::vector<int> loop;
    for (int i = -m; i < m; ++i) loop.push_back(f.g.idx(ci + i, cj - m));
    for (int j = -m; j < m; ++j) loop.push_back(f.g.idx(ci + m, cj + j));
    for (int i = m; i > -m; --i) loop.push_back(f.g.idx(ci + i, cj + m));
    for (int j = m; j > -m; --j) loop.push_back(f.g.idx(ci - m, cj + j));
    return loop;
}

PixelSet pixels_where(const GridField& f, const std::function<bool(Vec2)>& pred) {
    PixelSet A(f.g);
    for (int c = 0; c < f.g.size(); ++c)
        if (f.in(c) && pred(f.g.center(c))) A.cells[c] = 1;
    return A;
}

PixelSet random_pixels(const GridField& f, std::mt19937_64& rng, double p) {
    std::bernoulli_distribution coin(p);
    PixelSet A(f.g);
    for (int c = 0; c < f.g.size(); ++c)
        if (f.in(c) && coin(rng)) A.cells[c] = 1;
    return A;
}

Connection tagged_connection(const std::vector<std::pair<Vec2, Vec2>>& segs,
                             const std::vector<std::pair<int, int>>& tags) {
    Connection c;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        EndpointTag tp, tq;
        if (tags[k].first >= 0)
            tp = {EndpointTag::Kind::Point, tags[k].first, segs[k].first};
        else
            tp = {EndpointTag::Kind::BoundaryFoot, -1, segs[k].first};
        if (tags[k].second >= 0)
            tq = {EndpointTag::Kind::Point, tags[k].second, segs[k].second};
        else
            tq = {EndpointTag::Kind::BoundaryFoot, -1, segs[k].second};
        c.segments.push_back({{segs[k].first, segs[k].second}, tp, tq});
    }
    conn::finalize(c);
    return c;
}

}  // namespace

TEST_CASE("loop parity") {
    const Domain disk = Domain::disk();
    const GridField flat = constant_field(disk, 64);
    const auto r0 = lift::loop_parity(flat, ring_loop(flat, 10));
    CHECK(r0.winding == 0);
    CHECK(r0.orientable);

    const GridField v1 = vortex_field(disk, 64, {{0.01, 0.013}}, 1);
    const auto r1 = lift::loop_parity(v1, ring_loop(v1, 10));
    CHECK(r1.winding == 1);
    CHECK_FALSE(r1.orientable);

    const GridField v2 = vortex_field(disk, 64, {{0.01, 0.013}}, 2);
    const auto r2 = lift::loop_parity(v2, ring_loop(v2, 10));
    CHECK(r2.winding == 2);
    CHECK(r2.orientable);

    // A loop that passes next to the defect has an unresolvable angle jump.
    CHECK_THROWS_AS(lift::loop_parity(v2, ring_loop(v2, 1)), numeric_error);
}

TEST_CASE("defect detection") {
    const Domain disk = Domain::disk();
    const Vec2 a{0.153, 0.047};
    {
        const GridField f = vortex_field(disk, 96, {a}, 1);
        const auto rep = lift::detect_singularities(f);
        REQUIRE(rep.defects.size() == 1);
        CHECK(rep.defects[0].q_winding == 1);
        CHECK_FALSE(rep.defects[0].orientable);
        CHECK(geom::dist(rep.defects[0].location, a) < 2.0 * f.g.h);
        CHECK(rep.winding_consistent);
    }
    {
        const GridField f = vortex_field(disk, 96, {a}, 2);
        const auto rep = lift::detect_singularities(f);
        REQUIRE(rep.defects.size() == 1);
        CHECK(rep.defects[0].q_winding == 2);
        CHECK(rep.defects[0].orientable);
        CHECK(rep.winding_consistent);
    }
    {
        const auto rep = lift::detect_singularities(constant_field(disk, 96));
        CHECK(rep.defects.empty());
        CHECK(rep.flagged.empty());
        CHECK(rep.winding_consistent);
    }
}

TEST_CASE("essential boundary edge counts") {
    const Domain disk = Domain::disk();
    const GridField f = constant_field(disk, 64);
    const int ci = f.g.nx / 2, cj = f.g.ny / 2;
    {
        PixelSet A(f.g);
        A.cells[f.g.idx(ci, cj)] = 1;
        const EdgeSet eb = lift::essential_boundary(f, A);
        CHECK(eb.count() == 4);
        CHECK(eb.length() == Catch::Approx(4.0 * f.g.h));
    }
    {
        PixelSet all(f.g);
        for (int c = 0; c < f.g.size(); ++c) all.cells[c] = f.mask[c];
        CHECK(lift::essential_boundary(f, all).count() == 0);
    }
    {
        PixelSet block(f.g);
        const int k = 5;
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < k; ++i) block.cells[f.g.idx(ci + i, cj + j)] = 1;
        CHECK(lift::essential_boundary(f, block).count() == 4 * k);
    }
}

TEST_CASE("symmetric difference boundary identity") {
    const Domain disk = Domain::disk();
    const GridField f = constant_field(disk, 48);
    std::mt19937_64 rng(101);
    const PixelSet empty(f.g);
    const PixelSet A0 = random_pixels(f, rng, 0.3);
    CHECK(lift::symdiff_boundary_check(f, A0, empty));
    CHECK(lift::symdiff_boundary_check(f, A0, A0));
    for (int k = 0; k < 50; ++k) {
        const PixelSet A = random_pixels(f, rng, 0.2 + 0.01 * k);
        const PixelSet B = random_pixels(f, rng, 0.5);
        CHECK(lift::symdiff_boundary_check(f, A, B));
    }
}

TEST_CASE("jump set of the deck-flip correspondence") {
    const Domain disk = Domain::disk();
    const Vec2 a1{-0.3, 0.0}, a2{0.3, 0.0};
    const GridField f = vortex_field(disk, 96, {a1, a2}, 1);
    const Connection cuts = conn::solve_min_connection(disk, {a1, a2});
    const lift::Lifting vstar = lift::construct_lifting(f, cuts);

    // Roundtrip: the directors cover the field away from the defect cores.
    int checked = 0;
    for (int c = 0; c < f.g.size(); ++c) {
        if (!f.in(c) || vstar.core[c]) continue;
        const Vec2 q = lift::unit_q(f, c);
        const Vec2 qq = cover::apply_cover(vstar.directors.vec(c));
        CHECK(geom::dist(q, qq) < 1e-9);
        ++checked;
    }
    CHECK(checked > 1000);

    // Jumps form the lattice band of the cut, away from the cores.
    auto near_core = [&](std::uint64_t k) {
        const auto [ca, cb] = EdgeSet::cells_of(f.g, k);
        return vstar.core[ca] || (cb < f.g.size() && vstar.core[cb]);
    };
    for (const std::uint64_t k : vstar.jumps.keys)
        if (!near_core(k)) CHECK(vstar.cut_band.contains(k));
    for (const std::uint64_t k : vstar.cut_band.keys)
        if (!near_core(k)) CHECK(vstar.jumps.contains(k));

    // Flipping a pixel set produces jumps equal to the symmetric difference,
    // away from the defect cores where the band is only accurate mod the core.
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        const PixelSet A = random_pixels(f, rng, 0.15 * (trial + 1) / 8.0);
        const lift::Lifting v = lift::lifting_from_set(f, vstar, A);
        const EdgeSet expected = lift::la_edge_set(f, A, vstar.cut_band);
        for (const std::uint64_t k : v.jumps.sym_diff(expected).keys) CHECK(near_core(k));
        const PixelSet back = lift::set_from_lifting(f, v.directors, vstar);
        bool same = true;
        for (int c = 0; c < f.g.size(); ++c)
            if (f.in(c) && back.cells[c] != A.cells[c]) same = false;
        CHECK(same);
    }

    // On a defect-free field with a mask-splitting cut the reference jumps are
    // the band itself, and the identity holds edge-for-edge.
    {
        const GridField flat = constant_field(disk, 96);
        const Connection split = tagged_connection({{{-1.2, 0.037}, {1.2, 0.037}}}, {{0, 1}});
        const lift::Lifting wstar = lift::construct_lifting(flat, split);
        REQUIRE(wstar.jumps == wstar.cut_band);
        for (int trial = 0; trial < 6; ++trial) {
            const PixelSet A = random_pixels(flat, rng, 0.1 + 0.1 * trial);
            const lift::Lifting v = lift::lifting_from_set(flat, wstar, A);
            CHECK(v.jumps == lift::la_edge_set(flat, A, wstar.cut_band));
        }
    }

    // A = empty keeps the reference; A = everything is the global deck flip.
    PixelSet empty(f.g);
    const lift::Lifting same = lift::lifting_from_set(f, vstar, empty);
    CHECK(same.jumps == vstar.jumps);
    PixelSet all(f.g);
    for (int c = 0; c < f.g.size(); ++c) all.cells[c] = f.mask[c];
    const lift::Lifting flipped = lift::lifting_from_set(f, vstar, all);
    CHECK(flipped.jumps == vstar.jumps);
    for (int c = 0; c < f.g.size(); ++c)
        if (f.in(c))
            CHECK(geom::dist(flipped.directors.vec(c),
                             cover::deck_transform(vstar.directors.vec(c))) == 0.0);
}

TEST_CASE("lifting with a boundary cut and parity failures") {
    const Domain disk = Domain::disk();
    const Vec2 a{0.4, 0.1};
    const GridField f = vortex_field(disk, 96, {a}, 1);

    // No cut: the odd defect makes the continuation inconsistent.
    Connection none;
    conn::finalize(none);
    CHECK_THROWS_WITH(lift::construct_lifting(f, none),
                      Catch::Matchers::ContainsSubstring("plaquette"));

    // Cut to the boundary: jumps lie on the band (and around the core).
    const Connection cuts = conn::solve_min_connection(disk, {a});
    const lift::Lifting v = lift::construct_lifting(f, cuts);
    auto near_core = [&](std::uint64_t k) {
        const auto [ca, cb] = EdgeSet::cells_of(f.g, k);
        return v.core[ca] || (cb < f.g.size() && v.core[cb]);
    };
    for (const std::uint64_t k : v.jumps.keys)
        if (!near_core(k)) CHECK(v.cut_band.contains(k));

    // Defect-free field with no cuts lifts globally.
    const lift::Lifting smooth = lift::construct_lifting(constant_field(disk, 64), none);
    CHECK(smooth.jumps.count() == 0);
}

TEST_CASE("la edge set special cases") {
    const Domain disk = Domain::disk();
    const GridField f = constant_field(disk, 64);
    const Connection cuts = tagged_connection({{{-0.3, 0.0}, {0.3, 0.0}}}, {{0, 1}});
    const EdgeSet band = lift::rasterize_cuts(f, cuts);
    REQUIRE(band.count() > 0);

    const PixelSet empty(f.g);
    CHECK(lift::la_edge_set(f, empty, cuts) == band);

    // A tiny square far from the cuts contributes a disjoint union.
    const PixelSet square = pixels_where(
        f, [](Vec2 x) { return x.x > 0.4 && x.x < 0.55 && x.y > 0.4 && x.y < 0.55; });
    REQUIRE(square.count() > 0);
    const EdgeSet la = lift::la_edge_set(f, square, cuts);
    CHECK(la.count() == band.count() + lift::essential_boundary(f, square).count());
}

TEST_CASE("parity conservation of jump sets") {
    // Odd-degree corners of any jump set sit at non-orientable defects or on the
    // domain boundary; everywhere else the degree is even.
    const Domain disk = Domain::disk();
    const Vec2 a1{-0.3, 0.0}, a2{0.3, 0.0};
    const GridField f = vortex_field(disk, 96, {a1, a2}, 1);
    const Connection cuts = conn::solve_min_connection(disk, {a1, a2});
    const lift::Contacts contacts = lift::make_contacts(f, cuts, {a1, a2});
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        const PixelSet A = random_pixels(f, rng, 0.25);
        const EdgeSet la = lift::la_edge_set(f, A, cuts);
        std::map<int, int> degree;
        for (const std::uint64_t k : la.keys) {
            const auto [ca, cb] = EdgeSet::corners_of(f.g, k);
            ++degree[contacts.corner_index(ca.first, ca.second)];
            ++degree[contacts.corner_index(cb.first, cb.second)];
        }
        for (const auto& [corner, deg] : degree) {
            if (deg % 2 == 0) continue;
            const bool explained = contacts.has(corner, lift::ContactKind::Defect) ||
                                   contacts.has(corner, lift::ContactKind::Boundary);
            CHECK(explained);
        }
        // Odd total degree near each of the two non-orientable defects.
        for (const Vec2& a : {a1, a2}) {
            int crossing = 0;
            for (const std::uint64_t k : la.keys) {
                const auto [ca, cb] = EdgeSet::corners_of(f.g, k);
                const bool ina = geom::dist(f.g.corner(ca.first, ca.second), a) <= 1.5 * f.g.h;
                const bool inb = geom::dist(f.g.corner(cb.first, cb.second), a) <= 1.5 * f.g.h;
                if (ina != inb) ++crossing;
            }
            CHECK(crossing % 2 == 1);
        }
    }
}

TEST_CASE("jordan decomposition") {
    const Domain disk = Domain::disk();
    const GridField f = constant_field(disk, 64);
    Connection none;
    conn::finalize(none);
    const lift::Contacts contacts = lift::make_contacts(f, none);
    const int ci = f.g.nx / 2, cj = f.g.ny / 2;
    {
        PixelSet A(f.g);
        A.cells[f.g.idx(ci, cj)] = 1;
        const auto dec = lift::jordan_decompose(lift::essential_boundary(f, A), contacts);
        REQUIRE(dec.loops.size() == 1);
        CHECK(dec.arcs.empty());
        CHECK(dec.total_length == Catch::Approx(4.0 * f.g.h));
    }
    {
        PixelSet A(f.g);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) {
                A.cells[f.g.idx(ci - 8 + i, cj + j)] = 1;
                A.cells[f.g.idx(ci + 8 + i, cj + j)] = 1;
            }
        const EdgeSet eb = lift::essential_boundary(f, A);
        const auto dec = lift::jordan_decompose(eb, contacts);
        CHECK(dec.loops.size() == 2);
        CHECK(dec.arcs.empty());
        CHECK(dec.total_length == Catch::Approx(eb.length()));
    }
    {
        // A block overlapping one cut segment produces arcs ending on the cut.
        const Connection cuts = tagged_connection({{{-0.4, 0.0}, {0.4, 0.0}}}, {{0, 1}});
        const lift::Contacts ct = lift::make_contacts(f, cuts);
        const PixelSet block = pixels_where(
            f, [](Vec2 x) { return std::abs(x.x) < 0.15 && x.y > -0.12 && x.y < 0.12; });
        const auto dec = lift::jordan_decompose(lift::la_edge_set(f, block, cuts), ct);
        CHECK(dec.arcs.size() >= 1);
        int cut_contact_arcs = 0;
        for (const auto& arc : dec.arcs)
            if (ct.has(arc.end_a, lift::ContactKind::Cut) &&
                ct.has(arc.end_b, lift::ContactKind::Cut))
                ++cut_contact_arcs;
        CHECK(cut_contact_arcs >= 1);
        CHECK(dec.total_length ==
              Catch::Approx(lift::la_edge_set(f, block, cuts).length()));
    }
}

TEST_CASE("arc taxonomy") {
    const Domain disk = Domain::disk();
    const GridField f = constant_field(disk, 96);
    // Two interior vertical cuts and one boundary-touching cut.
    const Connection cuts = tagged_connection(
        {{{-0.5, -0.35}, {-0.5, 0.35}}, {{0.5, -0.35}, {0.5, 0.35}}},
        {{0, 1}, {2, 3}});
    const lift::Contacts ct = lift::make_contacts(f, cuts);

    {
        // Closed curve away from everything.
        const PixelSet blob = pixels_where(
            f, [](Vec2 x) { return geom::dist(x, {0.0, -0.6}) < 0.12; });
        const auto dec = lift::jordan_decompose(lift::essential_boundary(f, blob), ct);
        const auto cls = lift::classify_arcs(dec, ct, cuts, disk);
        REQUIRE_FALSE(cls.empty());
        CHECK(cls.front() == lift::ArcClass::NonessentialLoop);
    }
    {
        // A band joining the two interior cuts: its horizontal arcs are essential.
        const PixelSet strip = pixels_where(
            f, [](Vec2 x) { return std::abs(x.y) < 0.1 && std::abs(x.x) < 0.5; });
        const auto la = lift::la_edge_set(f, strip, cuts);
        const auto dec = lift::jordan_decompose(la, ct);
        const auto cls = lift::classify_arcs(dec, ct, cuts, disk);
        int essential_a = 0;
        for (const auto c : cls)
            if (c == lift::ArcClass::EssentialDistinctSegments) ++essential_a;
        CHECK(essential_a >= 2);
    }
    {
        // Arc from the domain boundary to a boundary-touching cut.
        const Connection bd_cut =
            tagged_connection({{{0.0, 0.0}, {0.0, -0.9999}}}, {{0, -1}});
        const lift::Contacts ct2 = lift::make_contacts(f, bd_cut);
        const PixelSet half = pixels_where(f, [](Vec2 x) { return x.x > 0.0 && x.y < -0.5; });
        const auto la = lift::la_edge_set(f, half, bd_cut);
        const auto dec = lift::jordan_decompose(la, ct2);
        const auto cls = lift::classify_arcs(dec, ct2, bd_cut, disk);
        int boundary_touching = 0;
        for (const auto c : cls)
            if (c == lift::ArcClass::NonessentialBoundaryTouchingSegment) ++boundary_touching;
        CHECK(boundary_touching >= 1);
    }
}

TEST_CASE("trail partition") {
    {
        // Path graph a-b-c: one trail through both edges.
        const auto trails = lift::fleury_trails(3, {{0, 1}, {1, 2}});
        REQUIRE(trails.size() == 1);
        CHECK(trails[0].edges.size() == 2);
        CHECK_FALSE(trails[0].closed);
        CHECK(((trails[0].v_start == 0 && trails[0].v_end == 2) ||
               (trails[0].v_start == 2 && trails[0].v_end == 0)));
    }
    {
        // Star with three leaves: two trails, the hub terminates exactly one.
        const auto trails = lift::fleury_trails(4, {{0, 1}, {0, 2}, {0, 3}});
        REQUIRE(trails.size() == 2);
        std::size_t total = 0;
        int hub_endpoints = 0;
        for (const auto& t : trails) {
            total += t.edges.size();
            if (t.v_start == 0) ++hub_endpoints;
            if (t.v_end == 0) ++hub_endpoints;
            CHECK(t.v_start != t.v_end);
        }
        CHECK(total == 3);
        CHECK(hub_endpoints == 1);
    }
    {
        // Even cycle: one closed trail, flagged.
        const auto trails = lift::fleury_trails(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
        REQUIRE(trails.size() == 1);
        CHECK(trails[0].closed);
        CHECK(trails[0].edges.size() == 4);
    }
    CHECK_THROWS_AS(lift::fleury_trails(2, {{0, 0}}), usage_error);
}

TEST_CASE("lower bound audit on the standard pair") {
    const Domain disk = Domain::disk();
    const std::vector<Vec2> pts{{-0.3, 0.0}, {0.3, 0.0}};
    const GridField f = constant_field(disk, 64);
    const Connection cuts = conn::solve_min_connection(disk, pts);
    REQUIRE(cuts.total_length == Catch::Approx(0.6).margin(1e-12));

    const PixelSet empty(f.g);
    const auto base = lift::verify_lower_bound(f, disk, pts, empty, cuts);
    CHECK(base.pass);
    // The staircase band never undercuts the chord by more than the endpoint
    // snapping, half a cell at each end.
    CHECK(base.lattice_length >= 0.6 - f.g.h - 1e-12);

    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const PixelSet A = random_pixels(f, rng, 0.02 + 0.015 * trial);
        CHECK(lift::verify_lower_bound(f, disk, pts, A, cuts).pass);
    }

    // Engineered axis-aligned near-equality witness: the one-cell strip that
    // cancels the band and replaces it by the parallel lattice path above it.
    const EdgeSet band = lift::rasterize_cuts(f, cuts);
    PixelSet strip(f.g);
    for (const std::uint64_t k : band.keys) {
        const auto [ca, cb] = EdgeSet::cells_of(f.g, k);
        strip.cells[std::max(ca, cb)] = 1;  // the upper cell of each band edge
    }
    const auto rep = lift::verify_lower_bound(f, disk, pts, strip, cuts);
    CHECK(rep.pass);
    CHECK(rep.equality_within_allowance);
    CHECK(rep.traces_connection);
}
