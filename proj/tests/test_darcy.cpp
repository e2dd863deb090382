#include <cmath>
#include <random>

#include "doctest.h"
#include "rdfm/darcy.hpp"
#include "test_util.hpp"

using namespace rdfm;

namespace {

MeshSettings mesh(int n, int order = 1)
{
    MeshSettings ms;
    ms.nx = ms.ny = n;
    ms.order = order;
    return ms;
}

Segment line(SegmentKind kind, Vec2 a, Vec2 b, double eps, double perm, int priority = 1)
{
    Segment s;
    s.kind = kind;
    s.a = a;
    s.b = b;
    s.thickness = eps;
    s.perm = perm;
    s.priority = priority;
    return s;
}

double boundary_outflow(const DarcySolution& sol, Side side)
{
    double q = 0.0;
    const auto& edges = sol.mesh().boundary_edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].side != side) continue;
        const auto lq = segment_quadrature(edges[e].a, edges[e].b, sol.setup.order + 2);
        for (std::size_t i = 0; i < lq.points.size(); ++i)
            q += lq.weights[i] * sol.boundary_flux(static_cast<int>(e), lq.points[i]);
    }
    return q;
}

}  // namespace

TEST_SUITE("darcy_ldg")
{
    TEST_CASE("linear pressure is reproduced exactly on a 2x2 mesh")
    {
        const Scenario sc = test::unit_square(1.0, 0.0);
        for (bool condense : {false, true}) {
            DarcyOptions opts;
            opts.condense = condense;
            const DarcySolution sol = solve_darcy(sc, mesh(2), opts);
            CHECK(sol.stats.unknowns == 80);
            for (int c = 0; c < 4; ++c) {
                for (const Vec2 r : {Vec2(-1, -1), Vec2(0.3, -0.2), Vec2(1, 1)}) {
                    const Vec2 x = sol.mesh().grid().from_reference(c, r);
                    CHECK(sol.p.value(c, x) == doctest::Approx(1.0 - x.x()).scale(1.0).epsilon(1e-10));
                    const Vec2 u = sol.u.vector_value(c, x), s = sol.s.vector_value(c, x);
                    CHECK(u.x() == doctest::Approx(1.0).epsilon(1e-10));
                    CHECK(std::abs(u.y()) < 1e-10);
                    CHECK(s.x() == doctest::Approx(1.0).epsilon(1e-10));
                    CHECK(std::abs(s.y()) < 1e-10);
                }
            }
        }
    }

    TEST_CASE("homogeneous data gives the zero solution")
    {
        Scenario sc = test::unit_square(0.0, 0.0);
        sc.segments.push_back(line(SegmentKind::Barrier, {0.2, 0.3}, {0.8, 0.6}, 1e-3, 1e-3));
        sc.segments.push_back(line(SegmentKind::Fracture, {0.2, 0.7}, {0.7, 0.8}, 1e-3, 1e3));
        const DarcySolution sol = solve_darcy(sc, mesh(8));
        for (double v : sol.p.data()) CHECK(std::abs(v) < 1e-12);
        for (double v : sol.u.data()) CHECK(std::abs(v) < 1e-12);
    }

    TEST_CASE("local conservation of the numerical flux")
    {
        Scenario sc = test::unit_square();
        sc.source = 0.3;
        sc.segments.push_back(line(SegmentKind::Barrier, {0.1, 0.2}, {0.9, 0.7}, 1e-4, 1e-4));
        sc.segments.push_back(line(SegmentKind::Fracture, {0.3, 0.9}, {0.6, 0.1}, 1e-4, 1e4, 2));
        for (int k : {1, 2}) {
            const DarcySolution sol = solve_darcy(sc, mesh(12, k));
            CAPTURE(k);
            CHECK(sol.stats.converged);
            CHECK(sol.diagnostics.max_cell_residual < 1e-9);
        }
    }

    TEST_CASE("cross of fractures keeps the pressure flat along the lines")
    {
        const Scenario sc = load_scenario(test::source_path("scenarios/ex2a.scn"));
        const DarcySolution sol = solve_darcy(sc);
        double lo = 1e300, hi = -1e300;
        for (double t = 0.26; t <= 0.74; t += 0.01) {
            for (const Vec2 x : {Vec2(t, 0.5), Vec2(0.5, t)}) {
                const double v = sol.p.value_at(x);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        CHECK(hi - lo < 1e-3);
        CHECK(0.5 * (hi + lo) == doctest::Approx(0.5).epsilon(1e-3));
    }

    TEST_CASE("cross of barriers blocks the flow and is mirror symmetric")
    {
        const Scenario sc = load_scenario(test::source_path("scenarios/ex2b.scn"));
        const DarcySolution sol = solve_darcy(sc);
        const double left = sol.limited_p.value_at({0.45, 0.5}), right = sol.limited_p.value_at({0.55, 0.5});
        CHECK(left - right > 0.5 * 1.0);

        const Grid& g = sol.mesh().grid();
        for (int c = 0; c < g.cell_count(); ++c) {
            const int mirror = g.index(g.col(c), g.ny - 1 - g.row(c));
            CHECK(cell_average(sol.p, c) == doctest::Approx(cell_average(sol.p, mirror)).scale(1.0).epsilon(1e-8));
        }
        // the same holds for the fracture network
        const DarcySolution fa = solve_darcy(load_scenario(test::source_path("scenarios/ex2a.scn")));
        for (int c = 0; c < g.cell_count(); ++c) {
            const int mirror = g.index(g.col(c), g.ny - 1 - g.row(c));
            CHECK(cell_average(fa.p, c) == doctest::Approx(cell_average(fa.p, mirror)).scale(1.0).epsilon(1e-8));
        }
    }

    TEST_CASE("velocity jump on barrier-flagged edges shrinks under refinement")
    {
        Scenario sc = test::unit_square();
        sc.segments.push_back(line(SegmentKind::Barrier, {0.31, 0.0}, {0.71, 1.0}, 1e-3, 1e-2));
        double prev = 1e300;
        for (int n : {10, 20, 40}) {
            const DarcySolution sol = solve_darcy(sc, mesh(n));
            double jump = 0.0, length = 0.0;
            for (std::size_t e = 0; e < sol.mesh().interior_edges().size(); ++e)
                if (sol.setup.flags.flagged(static_cast<int>(e))) {
                    jump += sol.diagnostics.edge_jump[e];
                    length += sol.mesh().interior_edges()[e].length();
                }
            const double mean = jump / length;
            CAPTURE(n);
            CHECK(mean < prev);
            prev = mean;
        }
    }

    TEST_CASE("regular fracture network passes the injected flux")
    {
        const Scenario sc = load_scenario(test::source_path("scenarios/ex3a.scn"));
        const DarcySolution sol = solve_darcy(sc);
        CHECK(boundary_outflow(sol, Side::Left) == doctest::Approx(-1.0).epsilon(1e-10));
        CHECK(boundary_outflow(sol, Side::Right) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(boundary_outflow(sol, Side::Top)) < 1e-10);
    }

    TEST_CASE("limiter")
    {
        Scenario sc = test::unit_square();
        const Mesh m = build_mesh(sc, 3, 3);
        // a steep linear field in the centre cell, flat neighbours
        DGField p = project(m.grid(), 1, [](const Vec2&) { return 1.0; });
        const int centre = 4;
        auto coef = p.coefficients(centre);
        coef[1] = 0.5;
        std::vector<double> theta;
        const DGField lim = apply_limiter(p, m, {centre}, &theta);
        REQUIRE(theta.size() == 1);
        CHECK(theta[0] == 0.0);
        CHECK(cell_average(lim, centre) == doctest::Approx(1.0));

        // field already within the vertex bounds is untouched
        const DGField lin = project(m.grid(), 1, [](const Vec2& x) { return x.x() + 2 * x.y(); });
        const DGField same = apply_limiter(lin, m, {centre}, &theta);
        CHECK(theta[0] == doctest::Approx(1.0));
        for (std::size_t i = 0; i < lin.data().size(); ++i) CHECK(same.data()[i] == lin.data()[i]);

        // random fields: theta in [0,1], means preserved, vertex values within the bounds
        std::mt19937 rng(12);
        std::normal_distribution<double> nd;
        const Mesh m6 = build_mesh(sc, 6, 6);
        for (int t = 0; t < 10; ++t) {
            DGField r(m6.grid(), 2);
            for (double& v : r.data()) v = nd(rng);
            std::vector<int> cells;
            for (int c = 0; c < m6.cell_count(); c += 2) cells.push_back(c);
            const DGField out = apply_limiter(r, m6, cells, &theta);
            for (std::size_t i = 0; i < cells.size(); ++i) {
                const int c = cells[i];
                CHECK(theta[i] >= 0.0);
                CHECK(theta[i] <= 1.0);
                CHECK(cell_average(out, c) == doctest::Approx(cell_average(r, c)).epsilon(1e-13));
                const auto corners = m6.corners(c);
                const int ci = m6.grid().col(c), cj = m6.grid().row(c);
                const int vi[4] = {ci, ci + 1, ci + 1, ci}, vj[4] = {cj, cj, cj + 1, cj + 1};
                for (int v = 0; v < 4; ++v) {
                    double lo = cell_average(r, c), hi = lo;
                    for (int nb : m6.cells_at_vertex(vi[v], vj[v])) {
                        lo = std::min(lo, cell_average(r, nb));
                        hi = std::max(hi, cell_average(r, nb));
                    }
                    const double pv = out.value(c, corners[v]);
                    CHECK(pv >= lo - 1e-12);
                    CHECK(pv <= hi + 1e-12);
                }
            }
        }
    }

    TEST_CASE("limiter runs only on barrier cells without a pressure penalty")
    {
        const Scenario sc = load_scenario(test::source_path("scenarios/ex2b.scn"));
        const DarcySetup setup = prepare(sc, sc.mesh);
        const auto cells = limiter_cells(setup);
        const auto barrier = cells_with(setup.mesh, setup.clipping, SegmentKind::Barrier);
        CHECK_FALSE(cells.empty());
        for (int c : cells) CHECK(barrier[c]);
    }

    TEST_CASE("assembled operator is affine in the line strength")
    {
        for (auto kind : {SegmentKind::Fracture, SegmentKind::Barrier}) {
            auto system = [&](double eps) {
                Scenario sc = test::unit_square();
                sc.segments.push_back(line(kind, {0.13, 0.21}, {0.77, 0.88}, eps, 1.0));
                DarcyOptions opts;
                opts.penalties = PenaltySchedule{};
                return assemble(prepare(sc, mesh(6), opts));
            };
            const LinearSystem a = system(1e-2), b = system(2e-2), c = system(3e-2);
            const SparseMatrix d2 = c.matrix - 2.0 * b.matrix + a.matrix;
            CHECK(d2.norm() < 1e-12 * a.matrix.norm());
            CHECK((b.matrix - a.matrix).norm() > 1e-6);
        }
    }

    TEST_CASE("symmetric and plain forms give the same solution")
    {
        Scenario sc = test::unit_square();
        sc.segments.push_back(line(SegmentKind::Barrier, {0.1, 0.2}, {0.9, 0.7}, 1e-4, 1e-4));
        sc.segments.push_back(line(SegmentKind::Fracture, {0.2, 0.9}, {0.8, 0.85}, 1e-4, 1e4));
        for (int k : {1, 2}) {
            DarcyOptions sym, plain, full;
            plain.symmetric_form = false;
            full.condense = false;
            const DarcySetup setup = prepare(sc, mesh(10, k));
            CHECK(admits_symmetric_form(setup));
            const DarcySolution a = solve_darcy(setup, sym), b = solve_darcy(setup, plain), c = solve_darcy(setup, full);
            Eigen::Map<const Eigen::VectorXd> pa(a.p.data().data(), a.p.data().size());
            Eigen::Map<const Eigen::VectorXd> pb(b.p.data().data(), b.p.data().size());
            Eigen::Map<const Eigen::VectorXd> pc(c.p.data().data(), c.p.data().size());
            CHECK((pa - pb).norm() < 1e-8 * pb.norm());
            CHECK((pc - pb).norm() < 1e-8 * pb.norm());
        }
    }

    TEST_CASE("invalid options are rejected")
    {
        const Scenario sc = test::unit_square();
        MeshSettings bad = mesh(4);
        bad.order = -1;
        CHECK_THROWS_AS(prepare(sc, bad), std::invalid_argument);
    }
}
