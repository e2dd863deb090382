#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rdfm/output.hpp"
#include "test_util.hpp"

using namespace rdfm;

namespace {

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> numbers_after(const std::string& text, const std::string& header, int count)
{
    const auto pos = text.find(header);
    REQUIRE(pos != std::string::npos);
    std::stringstream ss(text.substr(pos + header.size()));
    std::string skip;
    std::getline(ss, skip);  // rest of the header line
    if (text.compare(pos, 7, "SCALARS") == 0) std::getline(ss, skip);  // LOOKUP_TABLE
    std::vector<double> out(count);
    for (double& v : out) ss >> v;
    return out;
}

Grid unit_grid(int n)
{
    Grid g;
    g.nx = g.ny = n;
    g.hx = g.hy = 1.0 / n;
    return g;
}

}  // namespace

TEST_SUITE("output")
{
    TEST_CASE("VTK file for a constant field")
    {
        const Grid g = unit_grid(2);
        const DGField one = project(g, 1, [](const Vec2&) { return 1.0; });
        const DGField vel = project_vector(g, 1, [](const Vec2& x) { return Vec2(x.x(), -1.0); });
        const auto path = test::temp_dir("vtk") / "f.vtk";
        write_field_vtk(path.string(), g, {{"pressure", &one}, {"velocity", &vel}});
        const std::string text = read_file(path);
        CHECK(text.rfind("# vtk DataFile Version", 0) == 0);
        CHECK(text.find("POINTS 16 double") != std::string::npos);
        CHECK(text.find("CELLS 4 20") != std::string::npos);
        CHECK(text.find("POINT_DATA 16") != std::string::npos);
        for (double v : numbers_after(text, "SCALARS pressure", 16)) CHECK(v == doctest::Approx(1.0));
        const auto pts = numbers_after(text, "POINTS 16 double", 48);
        const auto uv = numbers_after(text, "velocity 2 16 double", 32);
        for (int i = 0; i < 16; ++i) {
            CHECK(uv[2 * i] == doctest::Approx(pts[3 * i]).scale(1.0));
            CHECK(uv[2 * i + 1] == doctest::Approx(-1.0));
        }
        const auto types = numbers_after(text, "CELL_TYPES 4", 4);
        for (double t : types) CHECK(t == 9);
    }

    TEST_CASE("VTK corner values average to the cell mean for Q1 fields")
    {
        const Grid g = unit_grid(3);
        const DGField f = project(g, 1, [](const Vec2& x) { return 3 * x.x() - 2 * x.y() + 4 * x.x() * x.y(); });
        const auto path = test::temp_dir("vtk_avg") / "f.vtk";
        write_field_vtk(path.string(), g, {{"p", &f}});
        const auto v = numbers_after(read_file(path), "SCALARS p", 36);
        for (int c = 0; c < 9; ++c) {
            const double mean = 0.25 * (v[4 * c] + v[4 * c + 1] + v[4 * c + 2] + v[4 * c + 3]);
            CHECK(mean == doctest::Approx(cell_average(f, c)));
        }
        const Grid other = unit_grid(4);
        CHECK_THROWS_AS(write_field_vtk(path.string(), other, {{"p", &f}}), std::invalid_argument);
        CHECK_THROWS_AS(write_field_vtk("/nonexistent/dir/f.vtk", g, {{"p", &f}}), OutputError);
    }

    TEST_CASE("slice CSV")
    {
        const auto path = test::temp_dir("slice") / "s.csv";
        write_slice_csv(path.string(), {{0.0, 1.0}, {0.5, 0.25}});
        const std::string text = read_file(path);
        std::stringstream ss(text);
        std::string line;
        int rows = 0;
        std::getline(ss, line);
        CHECK(line == "s,value");
        while (std::getline(ss, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 2);
        CHECK_THROWS_AS(write_slice_csv(path.string(), {}), std::invalid_argument);
        CHECK_THROWS_AS(write_slice_csv(path.string(), {{1.0, 0.0}, {0.5, 0.0}}), std::invalid_argument);
    }

    TEST_CASE("error table")
    {
        ErrorReport r;
        r.levels = {{10, 4e-2, 1e-1}, {20, 1e-2, 5e-2}, {40, 2.5e-3, 2.5e-2}};
        CHECK(r.l1_order(1) == doctest::Approx(2.0));
        CHECK(r.l2_order(2) == doctest::Approx(1.0));
        const auto path = test::temp_dir("table") / "e.csv";
        write_error_table(path.string(), r);
        std::stringstream ss(read_file(path));
        std::string line;
        std::getline(ss, line);
        CHECK(line == "mesh,L1_error,L1_order,L2_error,L2_order");
        std::getline(ss, line);
        CHECK(line.rfind("10,", 0) == 0);
        CHECK(line.find(",,") != std::string::npos);
        std::getline(ss, line);
        CHECK(line.find(",2") != std::string::npos);

        ErrorReport single;
        single.levels = {{8, 1.0, 1.0}};
        write_error_table(path.string(), single);
        std::stringstream s1(read_file(path));
        std::getline(s1, line);
        std::getline(s1, line);
        CHECK(line.find(",,") != std::string::npos);
    }

    TEST_CASE("cell average CSV")
    {
        const Grid g = unit_grid(2);
        const DGField f = project(g, 1, [](const Vec2& x) { return x.x(); });
        const auto path = test::temp_dir("cells") / "c.csv";
        write_cell_average_csv(path.string(), f, "pressure");
        std::stringstream ss(read_file(path));
        std::string line;
        std::getline(ss, line);
        CHECK(line == "cell,x,y,pressure");
        int rows = 0;
        while (std::getline(ss, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 4);
    }
}
