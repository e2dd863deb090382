#include "rdfm/output.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace rdfm {

namespace {

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw OutputError("cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) throw OutputError("write to '" + path + "' failed");
}

}  // namespace

void write_field_vtk(const std::string& path, const Grid& grid, const std::vector<NamedField>& fields)
{
    for (const auto& f : fields) {
        if (!f.field) throw std::invalid_argument("write_field_vtk: null field '" + f.name + "'");
        const Grid& g = f.field->grid();
        if (g.nx != grid.nx || g.ny != grid.ny || g.hx != grid.hx || g.hy != grid.hy || g.x0 != grid.x0 ||
            g.y0 != grid.y0)
            throw std::invalid_argument("write_field_vtk: field '" + f.name + "' lives on a different grid");
        if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos)
            throw std::invalid_argument("write_field_vtk: invalid array name '" + f.name + "'");
    }
    const int nc = grid.cell_count();
    auto corners = [&](int c) {
        const Vec2 lo = grid.lower(c), hi = grid.upper(c);
        return std::array<Vec2, 4>{lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
    };

    std::ofstream out = open_output(path);
    out << "# vtk DataFile Version 3.0\nrdfm field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << 4 * nc << " double\n";
    for (int c = 0; c < nc; ++c)
        for (const Vec2& p : corners(c)) out << p.x() << ' ' << p.y() << " 0\n";
    out << "CELLS " << nc << ' ' << 5 * nc << '\n';
    for (int c = 0; c < nc; ++c)
        out << "4 " << 4 * c << ' ' << 4 * c + 1 << ' ' << 4 * c + 2 << ' ' << 4 * c + 3 << '\n';
    out << "CELL_TYPES " << nc << '\n';
    for (int c = 0; c < nc; ++c) out << "9\n";
    if (fields.empty()) {
        finish(out, path);
        return;
    }

    out << "POINT_DATA " << 4 * nc << '\n';
    int vector_count = 0;
    for (const auto& f : fields) {
        if (f.field->components() > 1) {
            ++vector_count;
            continue;
        }
        out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (int c = 0; c < nc; ++c)
            for (const Vec2& p : corners(c)) out << f.field->value(c, p) << '\n';
    }
    // Two-component arrays go into a FIELD block; VECTORS would force a third component.
    if (vector_count > 0) {
        out << "FIELD FieldData " << vector_count << '\n';
        for (const auto& f : fields) {
            if (f.field->components() == 1) continue;
            const int m = f.field->components();
            out << f.name << ' ' << m << ' ' << 4 * nc << " double\n";
            for (int c = 0; c < nc; ++c)
                for (const Vec2& p : corners(c)) {
                    for (int k = 0; k < m; ++k) out << (k ? " " : "") << f.field->value(c, p, k);
                    out << '\n';
                }
        }
    }
    finish(out, path);
}

void write_slice_csv(const std::string& path, const std::vector<std::pair<double, double>>& samples)
{
    if (samples.empty()) throw std::invalid_argument("write_slice_csv: no samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].first < samples[i - 1].first)
            throw std::invalid_argument("write_slice_csv: arclength must be nondecreasing");
    std::ofstream out = open_output(path);
    out << "s,value\n";
    for (const auto& [s, v] : samples) out << s << ',' << v << '\n';
    finish(out, path);
}

namespace {

double order_between(double e0, double e1, int m0, int m1)
{
    if (!(e0 > 0.0) || !(e1 > 0.0) || m0 <= 0 || m1 <= 0 || m0 == m1) return std::nan("");
    return std::log(e0 / e1) / std::log(static_cast<double>(m1) / m0);
}

}  // namespace

double ErrorReport::l1_order(std::size_t i) const
{
    if (i == 0 || i >= levels.size()) throw std::out_of_range("ErrorReport::l1_order: no previous level");
    return order_between(levels[i - 1].l1, levels[i].l1, levels[i - 1].mesh, levels[i].mesh);
}

double ErrorReport::l2_order(std::size_t i) const
{
    if (i == 0 || i >= levels.size()) throw std::out_of_range("ErrorReport::l2_order: no previous level");
    return order_between(levels[i - 1].l2, levels[i].l2, levels[i - 1].mesh, levels[i].mesh);
}

void write_error_table(const std::string& path, const ErrorReport& report)
{
    if (report.levels.empty()) throw std::invalid_argument("write_error_table: empty report");
    std::ofstream out = open_output(path);
    out << "mesh,L1_error,L1_order,L2_error,L2_order\n";
    auto order = [&](double v) {
        if (std::isfinite(v)) out << std::setprecision(4) << v << std::setprecision(17);
    };
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const auto& l = report.levels[i];
        out << l.mesh << ',' << l.l1 << ',';
        if (i > 0) order(report.l1_order(i));
        out << ',' << l.l2 << ',';
        if (i > 0) order(report.l2_order(i));
        out << '\n';
    }
    finish(out, path);
}

void write_segments_csv(const std::string& path, const Clipping& clipping)
{
    std::ofstream out = open_output(path);
    out << "segment,kind,x1,y1,x2,y2,thickness,perm\n";
    for (std::size_t i = 0; i < clipping.segments.size(); ++i) {
        const Segment& s = clipping.segments[i].placed;
        out << i << ',' << to_string(s.kind) << ',' << s.a.x() << ',' << s.a.y() << ',' << s.b.x() << ','
            << s.b.y() << ',' << s.thickness << ',' << s.perm << '\n';
    }
    finish(out, path);
}

void write_cell_average_csv(const std::string& path, const DGField& field, const std::string& name)
{
    const Grid& g = field.grid();
    std::ofstream out = open_output(path);
    out << "cell,x,y," << name << '\n';
    for (int c = 0; c < g.cell_count(); ++c) {
        const Vec2 x = g.center(c);
        out << c << ',' << x.x() << ',' << x.y() << ',' << cell_average(field, c) << '\n';
    }
    finish(out, path);
}

}  // namespace rdfm
