#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rdfm/geometry.hpp"
#include "rdfm/mesh.hpp"
#include "test_util.hpp"

using namespace rdfm;

namespace {

Mesh square_mesh(int n, double x0 = 0.0, double x1 = 1.0)
{
    Scenario sc = test::unit_square();
    sc.domain = {x0, x0, x1, x1};
    return build_mesh(sc, n, n);
}

Segment seg(SegmentKind kind, Vec2 a, Vec2 b, int priority = 0)
{
    Segment s;
    s.kind = kind;
    s.a = a;
    s.b = b;
    s.thickness = 1e-4;
    s.perm = kind == SegmentKind::Fracture ? 1e4 : 1e-4;
    s.priority = priority;
    return s;
}

/// Independent Liang-Barsky clip of a segment against a box; returns the clipped length.
double clip_length(const Vec2& a, const Vec2& b, const Vec2& lo, const Vec2& hi)
{
    double t0 = 0.0, t1 = 1.0;
    const Vec2 d = b - a;
    const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
    const double q[4] = {a.x() - lo.x(), hi.x() - a.x(), a.y() - lo.y(), hi.y() - a.y()};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return 0.0;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, r);
        else
            t1 = std::min(t1, r);
    }
    return t1 > t0 ? (t1 - t0) * d.norm() : 0.0;
}

void check_against_oracle(const Mesh& mesh, const Segment& s)
{
    const Clipping clip = clip_segments(mesh, {s}, 1e-9, 1e-8);
    std::map<int, double> got;
    for (const auto& p : clip.pieces) got[p.cell] += p.length();
    const Grid& g = mesh.grid();
    for (int c = 0; c < g.cell_count(); ++c) {
        const double want = clip_length(s.a, s.b, g.lower(c), g.upper(c));
        const double have = got.count(c) ? got[c] : 0.0;
        if (want > 1e-12 || have > 1e-12) {
            CAPTURE(c);
            CHECK(have == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

}  // namespace

TEST_SUITE("mesh_geom")
{
    TEST_CASE("edge and cell counts")
    {
        const Mesh m = square_mesh(10);
        CHECK(m.cell_count() == 100);
        CHECK(m.interior_edges().size() == 180);
        CHECK(m.boundary_edges().size() == 40);
        const Mesh one = square_mesh(1);
        CHECK(one.interior_edges().empty());
        CHECK(one.boundary_edges().size() == 4);

        Scenario sc = test::unit_square();
        sc.domain = {-1, 0, 2, 0.5};
        const Mesh r = build_mesh(sc, 7, 3);
        double area = 0.0;
        for (int c = 0; c < r.cell_count(); ++c) area += r.grid().cell_area();
        CHECK(area == doctest::Approx(sc.domain.area()));
        CHECK(r.interior_edges().size() == static_cast<std::size_t>(6 * 3 + 7 * 2));
        CHECK_THROWS(build_mesh(sc, 0, 3));
    }

    TEST_CASE("connectivity and normals")
    {
        const Mesh m = square_mesh(4);
        for (const auto& e : m.interior_edges()) {
            const Vec2 mid = 0.5 * (e.a + e.b);
            const Vec2 step = 1e-6 * e.normal();
            CHECK(m.grid().locate(mid - step) == e.minus);
            CHECK(m.grid().locate(mid + step) == e.plus);
        }
        for (int c = 0; c < m.cell_count(); ++c) {
            const auto corners = m.corners(c);
            CHECK((corners[0] - m.grid().lower(c)).norm() < 1e-15);
            CHECK((corners[2] - m.grid().upper(c)).norm() < 1e-15);
            for (const auto& f : m.faces(c)) {
                if (f.boundary) continue;
                const auto& e = m.interior_edges()[f.edge];
                CHECK((e.minus == c || e.plus == c));
                CHECK(f.neighbor == (e.minus == c ? e.plus : e.minus));
                CHECK(f.normal.dot(e.normal()) == (e.minus == c ? 1.0 : -1.0));
            }
        }
        CHECK(m.cells_at_vertex(0, 0).size() == 1);
        CHECK(m.cells_at_vertex(2, 0).size() == 2);
        CHECK(m.cells_at_vertex(2, 2).size() == 4);
        // vertex (2,2) is x = y = 0.5
        for (int c : m.cells_at_vertex(2, 2)) CHECK(m.grid().contains(c, Vec2(0.5, 0.5)));
    }

    TEST_CASE("odd grid places x = 0.5 inside a column of cells")
    {
        const Mesh m = square_mesh(11);
        const Segment s = seg(SegmentKind::Fracture, {0.5, 0.25}, {0.5, 0.75});
        const Clipping clip = clip_segments(m, {s}, 1e-9, 1e-8);
        CHECK_FALSE(clip.segments[0].aligned);
        for (const auto& p : clip.pieces) CHECK(m.grid().col(p.cell) == 5);
    }

    TEST_CASE("local frame")
    {
        const LocalFrame h = local_frame(seg(SegmentKind::Fracture, {1, 2}, {0, 2}));
        CHECK(h.theta == 0.0);
        CHECK(h.nu == Vec2(1, 0));
        CHECK(h.xi1 == 0.0);
        CHECK(h.xi2 == 1.0);
        CHECK(h.eta0 == 2.0);

        const LocalFrame v = local_frame(seg(SegmentKind::Fracture, {0.3, 1}, {0.3, 0}));
        CHECK(v.theta == doctest::Approx(std::numbers::pi / 2));
        CHECK(v.sigma == Vec2(-1, 0));
        CHECK(v.eta0 == doctest::Approx(-0.3));

        const LocalFrame d = local_frame(seg(SegmentKind::Fracture, {0, 0}, {-1, -1}));
        CHECK(d.theta == doctest::Approx(std::numbers::pi / 4));
        CHECK(d.xi1 == doctest::Approx(-std::sqrt(2.0)));
        CHECK(d.xi2 == doctest::Approx(0.0));
        CHECK(std::abs(d.eta0) < 1e-15);
        CHECK_THROWS_AS(local_frame(seg(SegmentKind::Fracture, {1, 1}, {1, 1})), std::invalid_argument);

        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int t = 0; t < 100; ++t) {
            const Segment s = seg(SegmentKind::Barrier, {u(rng), u(rng)}, {u(rng), u(rng)});
            const LocalFrame f = local_frame(s);
            CHECK(f.theta > -std::numbers::pi / 2);
            CHECK(f.theta <= std::numbers::pi / 2);
            CHECK(f.eta(s.a) == doctest::Approx(f.eta0));
            CHECK(f.eta(s.b) == doctest::Approx(f.eta0));
            CHECK(f.xi2 - f.xi1 == doctest::Approx(s.length()));
            CHECK(std::abs(f.nu.dot(f.sigma)) < 1e-15);
        }
    }

    TEST_CASE("horizontal segment splits at every vertical grid line")
    {
        const Mesh m = square_mesh(10);
        const Clipping clip = clip_segments(m, {seg(SegmentKind::Fracture, {0.25, 0.55}, {0.75, 0.55})}, 1e-9, 1e-8);
        REQUIRE(clip.pieces.size() == 6);
        const double want[6] = {0.05, 0.1, 0.1, 0.1, 0.1, 0.05};
        for (int i = 0; i < 6; ++i) {
            CHECK(clip.pieces[i].length() == doctest::Approx(want[i]));
            CHECK(m.grid().row(clip.pieces[i].cell) == 5);
            CHECK(m.grid().col(clip.pieces[i].cell) == 2 + i);
        }
    }

    TEST_CASE("clipping matches a brute-force box clip")
    {
        const Mesh m = square_mesh(20, -1.0, 1.0);
        const double th = 1.0;
        const Vec2 dir(std::cos(th), std::sin(th));
        const double reach = 1.0 / std::sin(th) - 1e-9;
        check_against_oracle(m, seg(SegmentKind::Barrier, -reach * dir, reach * dir));

        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int t = 0; t < 40; ++t) check_against_oracle(m, seg(SegmentKind::Fracture, {u(rng), u(rng)}, {u(rng), u(rng)}));

        // wholly inside one cell
        const Clipping one = clip_segments(m, {seg(SegmentKind::Fracture, {0.01, 0.01}, {0.04, 0.03})}, 1e-9, 1e-8);
        REQUIRE(one.pieces.size() == 1);
        CHECK(one.pieces[0].cell == *m.grid().locate({0.02, 0.02}));
    }

    TEST_CASE("pieces partition the segment and follow its frame")
    {
        const Mesh m = square_mesh(17);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(0, 1);
        for (int t = 0; t < 30; ++t) {
            const Segment s = seg(SegmentKind::Fracture, {u(rng), u(rng)}, {u(rng), u(rng)});
            const Clipping clip = clip_segments(m, {s}, 1e-9, 1e-8);
            double total = 0.0;
            for (std::size_t i = 0; i < clip.pieces.size(); ++i) {
                const auto& p = clip.pieces[i];
                total += p.length();
                CHECK(m.grid().contains(p.cell, 0.5 * (p.a + p.b)));
                CHECK(clip.segments[0].frame.eta(p.a) == doctest::Approx(clip.segments[0].frame.eta0));
                if (i > 0) CHECK((clip.pieces[i - 1].b - p.a).norm() < 1e-14);
            }
            CHECK(total == doctest::Approx(s.length()).epsilon(1e-12));
        }
    }

    TEST_CASE("aligned segment is shifted off the grid line deterministically")
    {
        const Mesh m = square_mesh(10);
        const Segment s = seg(SegmentKind::Barrier, {0.5, 0.0}, {0.5, 1.0});
        const Clipping c1 = clip_segments(m, {s}, 1e-9, 1e-8, 42);
        const Clipping c2 = clip_segments(m, {s}, 1e-9, 1e-8, 42);
        REQUIRE(c1.segments[0].aligned);
        CHECK(c1.segments[0].line_axis == Axis::X);
        CHECK(c1.segments[0].grid_line == doctest::Approx(0.5));
        CHECK(std::abs(c1.segments[0].shift) == doctest::Approx(1e-9));
        CHECK(c1.pieces.size() == 10);
        CHECK(c1.segments[0].shift == c2.segments[0].shift);
        for (std::size_t i = 0; i < c1.pieces.size(); ++i) CHECK(c1.pieces[i].cell == c2.pieces[i].cell);

        // on the domain edge the shift must point inward
        const Clipping edge = clip_segments(m, {seg(SegmentKind::Barrier, {1.0, 0.0}, {1.0, 1.0})}, 1e-9, 1e-8);
        CHECK(edge.segments[0].shift < 0.0);
        CHECK(edge.pieces.size() == 10);
    }

    TEST_CASE("fracture and barrier dominance follows priority")
    {
        const Mesh m = square_mesh(10);
        const Segment f = seg(SegmentKind::Fracture, {0.05, 0.55}, {0.95, 0.55}, 2);
        const Segment b = seg(SegmentKind::Barrier, {0.55, 0.05}, {0.55, 0.95}, 1);
        const int centre = *m.grid().locate({0.55, 0.55});

        auto state = [&](const Segment& s0, const Segment& s1) {
            Clipping clip = clip_segments(m, {s0, s1}, 1e-9, 1e-8);
            resolve_intersections(clip);
            std::map<SegmentKind, bool> active;
            int inactive = 0;
            for (const auto& p : clip.pieces) {
                if (p.cell == centre) active[clip.kind(p)] = p.active;
                inactive += !p.active;
            }
            CHECK(inactive == 1);
            return active;
        };
        auto a1 = state(f, b);
        CHECK(a1[SegmentKind::Fracture]);
        CHECK_FALSE(a1[SegmentKind::Barrier]);

        Segment f2 = f, b2 = b;
        f2.priority = 1;
        b2.priority = 2;
        auto a2 = state(f2, b2);
        CHECK_FALSE(a2[SegmentKind::Fracture]);
        CHECK(a2[SegmentKind::Barrier]);

        // two fractures crossing both stay active
        Clipping ff = clip_segments(m, {f, seg(SegmentKind::Fracture, {0.55, 0.05}, {0.55, 0.95}, 2)}, 1e-9, 1e-8);
        resolve_intersections(ff);
        for (const auto& p : ff.pieces) CHECK(p.active);

        Segment b3 = b;
        b3.priority = 2;
        Clipping tie = clip_segments(m, {f, b3}, 1e-9, 1e-8);
        CHECK_THROWS_AS(resolve_intersections(tie), std::invalid_argument);
    }

    TEST_CASE("barrier edge classification")
    {
        const Mesh m = square_mesh(10);
        {
            const Clipping clip = clip_segments(m, {seg(SegmentKind::Fracture, {0.05, 0.55}, {0.95, 0.55})}, 1e-9, 1e-8);
            CHECK(classify_barrier_edges(m, clip).count() == 0);
        }
        {
            // barrier on the line x = 0.5 between y = 0.2 and 0.4: exactly two vertical edges
            const Clipping clip = clip_segments(m, {seg(SegmentKind::Barrier, {0.5, 0.2}, {0.5, 0.4})}, 1e-9, 1e-8);
            const EdgeFlags fl = classify_barrier_edges(m, clip);
            CHECK(fl.count() == 2);
            for (std::size_t e = 0; e < m.interior_edges().size(); ++e) {
                if (!fl.flagged(static_cast<int>(e))) continue;
                const auto& edge = m.interior_edges()[e];
                CHECK(edge.normal_axis == Axis::X);
                CHECK(edge.a.x() == doctest::Approx(0.5));
                CHECK(fl.aligned[e]);
            }
            const EdgeFlags off = classify_barrier_edges(m, clip, {false});
            CHECK(off.count() > 2);
        }
        {
            // cross of barriers on an odd grid, no adaptation needed: every face of a crossed cell is flagged
            Scenario sc = test::unit_square();
            const Mesh m11 = build_mesh(sc, 11, 11);
            const Clipping clip = clip_segments(m11,
                                                {seg(SegmentKind::Barrier, {0.25, 0.5}, {0.75, 0.5}),
                                                 seg(SegmentKind::Barrier, {0.5, 0.25}, {0.5, 0.75})},
                                                1e-9, 1e-8);
            const auto crossed = cells_with(m11, clip, SegmentKind::Barrier);
            const EdgeFlags fl = classify_barrier_edges(m11, clip);
            for (std::size_t e = 0; e < m11.interior_edges().size(); ++e) {
                const auto& edge = m11.interior_edges()[e];
                CHECK(fl.flagged(static_cast<int>(e)) == (crossed[edge.minus] || crossed[edge.plus]));
            }
            int ncrossed = 0;
            for (auto v : crossed) ncrossed += v;
            CHECK(ncrossed == 13);
        }
    }
}
