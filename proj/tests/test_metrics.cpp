#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rdfm/metrics.hpp"
#include "test_util.hpp"

using namespace rdfm;

namespace {

Grid make_grid(int n, double x0 = 0.0, double w = 1.0)
{
    Grid g;
    g.x0 = g.y0 = x0;
    g.nx = g.ny = n;
    g.hx = g.hy = w / n;
    return g;
}

/// Cell-centred finite differences with harmonic face permeabilities on a fine 1D grid.
std::vector<double> resolved_1d(int n, const std::vector<std::pair<double, double>>& layers, double width,
                                double pa, double pb)
{
    const double h = 1.0 / n;
    std::vector<double> k(n, 1.0);
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * h;
        for (const auto& [xc, perm] : layers)
            if (std::abs(x - xc) < 0.5 * width) k[i] = perm;
    }
    // tridiagonal system, Dirichlet values imposed at the two ends through half cells
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double tw = i == 0 ? 2 * k[0] / h : 2.0 / (h / k[i - 1] + h / k[i]);
        const double te = i == n - 1 ? 2 * k[n - 1] / h : 2.0 / (h / k[i] + h / k[i + 1]);
        di[i] = tw + te;
        if (i > 0) lo[i] = -tw; else rhs[i] += tw * pa;
        if (i < n - 1) up[i] = -te; else rhs[i] += te * pb;
    }
    for (int i = 1; i < n; ++i) {
        const double m = lo[i] / di[i - 1];
        di[i] -= m * up[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> p(n);
    p[n - 1] = rhs[n - 1] / di[n - 1];
    for (int i = n - 2; i >= 0; --i) p[i] = (rhs[i] - up[i] * p[i + 1]) / di[i];
    return p;
}

DGField piecewise_constant(const Grid& g, const std::vector<double>& v)
{
    DGField f(g, 0);
    for (int c = 0; c < g.cell_count(); ++c) f.coefficients(c)[0] = v[c] * std::sqrt(g.cell_area());
    return f;
}

}  // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("one-dimensional series oracle")
    {
        const Oracle1D o = oracle_1d(1.0, {{0.5, 1e-4, 1e-4}}, 1.0, 0.0, 0.0, 1.0);
        CHECK(o.u == doctest::Approx(0.5));
        CHECK(o.pressure(0.0) == doctest::Approx(1.0));
        CHECK(o.pressure(0.5 - 1e-12) == doctest::Approx(0.75));
        CHECK(o.pressure(0.5) == doctest::Approx(0.25));
        CHECK(o.pressure(1.0) == doctest::Approx(0.0));

        const Oracle1D none = oracle_1d(2.0, {}, 3.0, 1.0, -1.0, 1.0);
        CHECK(none.u == doctest::Approx(2.0));
        CHECK(none.pressure(0.0) == doctest::Approx(2.0));

        CHECK_THROWS_AS(oracle_1d(1.0, {{1.5, 1e-4, 1e-4}}, 1, 0, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(oracle_1d(1.0, {{0.5, 1e-4, 0.0}}, 1, 0, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(oracle_1d(0.0, {}, 1, 0, 0, 1), std::invalid_argument);
    }

    TEST_CASE("series oracle agrees with resolved thin layers")
    {
        // three layers of width 0.004 with resistances 0.4, 1 and 2
        const double w = 0.004;
        const std::vector<std::pair<double, double>> layers{{0.2, w / 0.4}, {0.5, w / 1.0}, {0.8, w / 2.0}};
        std::vector<Barrier1D> bars;
        for (const auto& [x, k] : layers) bars.push_back({x, w, k});
        const Oracle1D o = oracle_1d(1.0, bars, 1.0, 0.0, 0.0, 1.0);
        const int n = 20000;
        const auto p = resolved_1d(n, layers, w, 1.0, 0.0);
        for (double x : {0.05, 0.35, 0.6, 0.9}) {
            const int i = static_cast<int>(x * n);
            // the layers take up thickness the series model treats as zero
            CHECK(p[i] == doctest::Approx(o.pressure(x)).epsilon(5e-3).scale(1.0));
        }
    }

    TEST_CASE("exact solutions satisfy the line coupling conditions")
    {
        for (double th : {0.0, 0.4, 1.0}) {
            const double c = std::cos(th), s = std::sin(th);
            const Vec2 tau(c, s), n(-s, c);
            const double d = 1e-7;

            ExactSolution barrier{ExactCase::SingleBarrier, th};
            CHECK((barrier.line_normal() - n).norm() < 1e-15);
            for (double xi : {-0.5, 0.1, 0.7}) {
                const Vec2 x = xi * tau;
                const double plus = barrier.value(x + d * n), minus = barrier.value(x - d * n);
                const double un = -barrier.gradient(x + d * n).dot(n);
                CHECK(un == doctest::Approx(-barrier.gradient(x - d * n).dot(n)));
                // pressure drop equals the normal flux times eps/k_eps = 1
                CHECK(minus - plus == doctest::Approx(un * 1.0).epsilon(1e-6));
            }

            ExactSolution frac{ExactCase::SingleFracture, th};
            for (double xi : {-0.5, 0.1, 0.7}) {
                const Vec2 x = xi * tau;
                CHECK(frac.value(x + d * n) == doctest::Approx(frac.value(x - d * n)).epsilon(1e-6));
                const double jump_un = -frac.gradient(x + d * n).dot(n) + frac.gradient(x - d * n).dot(n);
                // d/dxi of the line flux -eps k_f dp/dxi balances the matrix flux leaving the line
                const double e = 1e-5;
                const double qf = [&](double a, double b) {
                    return -2.0 * (frac.value(b * tau) - frac.value(a * tau)) / (b - a);
                }(xi - e, xi + e);
                const double qf_r = -2.0 * (frac.value((xi + 2 * e) * tau) - frac.value(xi * tau)) / (2 * e);
                const double qf_l = -2.0 * (frac.value(xi * tau) - frac.value((xi - 2 * e) * tau)) / (2 * e);
                CHECK(qf == doctest::Approx(-2.0 * std::cos(xi)).epsilon(1e-6));
                CHECK((qf_r - qf_l) / (2 * e) + jump_un == doctest::Approx(0.0).scale(1.0).epsilon(1e-4));
            }
            const Segment sg = frac.segment();
            CHECK(sg.strength() == doctest::Approx(2.0));
            CHECK(barrier.segment().strength() == doctest::Approx(1.0));
            CHECK(std::abs(sg.a.x()) <= 1.0 + 1e-12);
            CHECK(std::abs(sg.b.y()) <= 1.0 + 1e-12);
        }
    }

    TEST_CASE("projection errors")
    {
        for (int k : {0, 1, 2}) {
            const Grid g = make_grid(5, -1.0, 2.0);
            auto poly = [k](const Vec2& x) { return std::pow(x.x() + 0.3, k) * std::pow(x.y() - 0.1, k) + 1.0; };
            const DGField f = project(g, k, poly);
            CHECK(field_error(f, poly, Norm::L2) < 1e-13);
            CHECK(field_error(f, poly, Norm::L1) < 1e-13);
        }
        auto smooth = [](const Vec2& x) { return std::sin(std::numbers::pi * x.x()) * std::cos(2 * x.y()); };
        for (int k : {1, 2}) {
            const double e1 = field_error(project(make_grid(8), k, smooth), smooth, Norm::L2);
            const double e2 = field_error(project(make_grid(16), k, smooth), smooth, Norm::L2);
            CHECK(std::log2(e1 / e2) == doctest::Approx(k + 1).epsilon(0.05));
        }
        // the exact solution of the barrier case projected piecewise on the cut cells is exact on each side
        ExactSolution ex{ExactCase::SingleBarrier, 0.0};
        const Grid g = make_grid(4, -1.0, 2.0);
        const DGField f = project(g, 1, [&](const Vec2& x) { return ex.value(x); });
        CHECK(exact_errors(f, ex, Norm::L2) < 1e-12);
    }

    TEST_CASE("benchmark errors")
    {
        const Grid g = make_grid(4);
        std::vector<double> vals(g.cell_count());
        for (int c = 0; c < g.cell_count(); ++c) vals[c] = 0.1 * c;
        const DGField ph = piecewise_constant(g, vals);

        ReferenceData ref;
        for (int c = 0; c < g.cell_count(); ++c) {
            const Vec2 lo = g.lower(c), hi = g.upper(c);
            ref.cells.push_back({{lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}}, vals[c]});
        }
        const BenchmarkErrors same = benchmark_errors(ph, ref);
        CHECK(same.err_m < 1e-15);
        CHECK(same.delta_p == doctest::Approx(1.5));
        CHECK(std::abs(same.coverage_gap) < 1e-14);
        CHECK(same.warnings.empty());
        CHECK(std::isnan(same.err_f));

        ReferenceData shifted = ref;
        for (auto& c : shifted.cells) c.value += 0.3;
        CHECK(benchmark_errors(ph, shifted).err_m == doctest::Approx(0.3 / 1.5));
        CHECK(benchmark_errors(ph, shifted, 3.0).err_m == doctest::Approx(0.1));

        // reordering cells and splitting a cell into triangles leave the result unchanged
        ReferenceData split = shifted;
        std::reverse(split.cells.begin(), split.cells.end());
        const auto quad = split.cells.back().polygon;
        const double v = split.cells.back().value;
        split.cells.pop_back();
        split.cells.push_back({{quad[0], quad[1], quad[2]}, v});
        split.cells.push_back({{quad[0], quad[2], quad[3]}, v});
        CHECK(benchmark_errors(ph, split).err_m == doctest::Approx(benchmark_errors(ph, shifted).err_m));

        // a reference cell straddling grid cells
        ReferenceData coarse;
        coarse.cells.push_back({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.75});
        coarse.delta_p = 1.0;
        const BenchmarkErrors ce = benchmark_errors(ph, coarse);
        double want = 0.0;
        for (double x : vals) want += (x - 0.75) * (x - 0.75) / 16;
        CHECK(ce.err_m == doctest::Approx(std::sqrt(want)));

        ReferenceData gap = ref;
        gap.cells.pop_back();
        CHECK_FALSE(benchmark_errors(ph, gap).warnings.empty());

        ReferenceData lines = ref;
        lines.elements.push_back({{0.1, 0.3}, {0.9, 0.3}, 0.0});
        const BenchmarkErrors le = benchmark_errors(ph, lines);
        CHECK(std::isfinite(le.err_f));
        CHECK(le.err_f > 0.0);
    }

    TEST_CASE("reference file reader")
    {
        const auto dir = test::temp_dir("reference");
        {
            std::ofstream out(dir / "m.csv");
            out << "# delta_p=2.5\n4,0,0,0,1,1,1,1,0,0.5\n\n3,0,0,1,0,1,1,0.25\n";
            std::ofstream f(dir / "f.csv");
            f << "0,0.5,1,0.5,0.3\n";
        }
        const ReferenceData r = read_reference_matrix((dir / "m.csv").string());
        REQUIRE(r.cells.size() == 2);
        CHECK(r.delta_p == 2.5);
        CHECK(polygon_area(r.cells[0].polygon) == doctest::Approx(1.0));  // clockwise input reversed
        CHECK(r.cells[1].value == 0.25);
        const auto el = read_reference_fractures((dir / "f.csv").string());
        REQUIRE(el.size() == 1);
        CHECK(el[0].value == 0.3);
        {
            std::ofstream out(dir / "bad.csv");
            out << "4,0,0,1\n";
        }
        CHECK_THROWS(read_reference_matrix((dir / "bad.csv").string()));
        CHECK_THROWS(read_reference_matrix((dir / "missing.csv").string()));
    }

    TEST_CASE("polygon helpers")
    {
        const std::vector<Vec2> tri{{0, 0}, {2, 0}, {0, 2}};
        CHECK(polygon_area(tri) == doctest::Approx(2.0));
        CHECK((polygon_centroid(tri) - Vec2(2.0 / 3, 2.0 / 3)).norm() < 1e-14);
        const auto clipped = clip_polygon(tri, {0, 0}, {1, 1});
        CHECK(polygon_area(clipped) == doctest::Approx(1.0));
        CHECK(clip_polygon(tri, {3, 3}, {4, 4}).size() < 3);
    }

    TEST_CASE("slices")
    {
        const Grid g = make_grid(5);
        const DGField c = project(g, 1, [](const Vec2&) { return 2.0; });
        const auto s = slice(c, {0, 0}, {1, 1}, 11);
        REQUIRE(s.size() == 11);
        for (const auto& [a, v] : s) CHECK(v == doctest::Approx(2.0));
        CHECK(s.back().first == doctest::Approx(std::sqrt(2.0)));

        const DGField x = project(g, 1, [](const Vec2& p) { return p.x(); });
        const auto two = slice(x, {0, 0.5}, {1, 0.5}, 2);
        REQUIRE(two.size() == 2);
        CHECK(two[0].second == doctest::Approx(0.0).scale(1.0));
        CHECK(two[1].second == doctest::Approx(1.0));

        // at an interface the value comes from the cell on the start side
        DGField jumpy = piecewise_constant(g, [&] {
            std::vector<double> v(g.cell_count());
            for (int cc = 0; cc < g.cell_count(); ++cc) v[cc] = g.col(cc);
            return v;
        }());
        const auto fwd = slice(jumpy, {0.1, 0.5}, {0.2, 0.5}, 2);
        CHECK(fwd[1].second == 0.0);
        const auto back = slice(jumpy, {0.3, 0.5}, {0.2, 0.5}, 2);
        CHECK(back[1].second == doctest::Approx(1.0));

        CHECK_THROWS_AS(slice(c, {0, 0}, {1.5, 1}, 5), std::invalid_argument);
        CHECK_THROWS_AS(slice(c, {0, 0}, {1, 1}, 1), std::invalid_argument);
    }
}
