#include "rdfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rdfm {

double ExactSolution::value(const Vec2& x) const
{
    const double c = std::cos(theta), s = std::sin(theta);
    if (kind == ExactCase::SingleFracture) {
        const double xi = c * x.x() + s * x.y(), eta = -s * x.x() + c * x.y();
        return std::sin(xi) * std::exp(std::abs(eta));
    }
    return (s - c) * x.x() - (s + c) * x.y() + (s * x.x() - c * x.y() > 0.0 ? 1.0 : 0.0);
}

Vec2 ExactSolution::gradient(const Vec2& x) const
{
    const double c = std::cos(theta), s = std::sin(theta);
    if (kind == ExactCase::SingleFracture) {
        const double xi = c * x.x() + s * x.y(), eta = -s * x.x() + c * x.y();
        const double e = std::exp(std::abs(eta));
        const double dxi = std::cos(xi) * e;
        const double deta = std::sin(xi) * (eta > 0.0 ? 1.0 : (eta < 0.0 ? -1.0 : 0.0)) * e;
        return dxi * Vec2(c, s) + deta * Vec2(-s, c);
    }
    return {s - c, -(s + c)};
}

ScalarFunction ExactSolution::trace() const
{
    const ExactSolution copy = *this;
    return [copy](const Vec2& x) { return copy.value(x); };
}

Vec2 ExactSolution::line_normal() const { return {-std::sin(theta), std::cos(theta)}; }

Segment ExactSolution::segment() const
{
    const Vec2 t(std::cos(theta), std::sin(theta));
    const double reach = 1.0 / std::max(std::abs(t.x()), std::abs(t.y()));
    Segment seg;
    seg.a = -reach * t;
    seg.b = reach * t;
    seg.thickness = 1e-4;
    if (kind == ExactCase::SingleFracture) {
        seg.kind = SegmentKind::Fracture;
        seg.perm = 2.0 / seg.thickness;
    } else {
        seg.kind = SegmentKind::Barrier;
        seg.perm = seg.thickness;
    }
    // keep endpoints inside the closed square despite rounding
    for (Vec2* p : {&seg.a, &seg.b})
        for (int d = 0; d < 2; ++d) (*p)[d] = std::clamp((*p)[d], -1.0, 1.0);
    return seg;
}

Scenario ExactSolution::scenario() const
{
    Scenario sc;
    sc.domain = {-1.0, -1.0, 1.0, 1.0};
    sc.segments = {segment()};
    for (auto& b : sc.boundary) b = {BoundaryType::Dirichlet, 0.0};
    validate(sc);
    return sc;
}

namespace {

// Part of a convex polygon with n.x <= d (keep_below) or n.x >= d.
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& n, double d, bool keep_below)
{
    std::vector<Vec2> out;
    const std::size_t m = poly.size();
    auto inside = [&](const Vec2& p) { return keep_below ? n.dot(p) <= d : n.dot(p) >= d; };
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& cur = poly[i];
        const Vec2& nxt = poly[(i + 1) % m];
        const bool ci = inside(cur), ni = inside(nxt);
        if (ci) out.push_back(cur);
        if (ci != ni) {
            const double t = (d - n.dot(cur)) / n.dot(nxt - cur);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    return out;
}

// Calls f(x, w) for a collapsed Gauss rule on each fan triangle of the polygon.
template <class F>
void polygon_quadrature(const std::vector<Vec2>& poly, const GaussRule& g, F&& f)
{
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const Vec2 &A = poly[0], &B = poly[k], &C = poly[k + 1];
        const double area2 = std::abs((B - A).x() * (C - A).y() - (B - A).y() * (C - A).x());
        if (area2 == 0.0) continue;
        for (int i = 0; i < g.size(); ++i)
            for (int j = 0; j < g.size(); ++j) {
                const double u = 0.5 * (g.nodes[i] + 1.0), v = 0.5 * (g.nodes[j] + 1.0);
                const Vec2 x = A + u * (B - A) + v * (1.0 - u) * (C - A);
                f(x, 0.25 * g.weights[i] * g.weights[j] * area2 * (1.0 - u));
            }
    }
}

}  // namespace

double field_error(const DGField& ph, const ScalarFunction& exact, Norm norm,
                   const std::optional<std::pair<Vec2, double>>& split, int points)
{
    const Grid& g = ph.grid();
    const GaussRule q = gauss_legendre(points > 0 ? points : ph.order() + 3);
    const double jac = 0.25 * g.cell_area();
    double total = 0.0;
    for (int c = 0; c < g.cell_count(); ++c) {
        auto add = [&](const Vec2& x, double w) {
            const double e = std::abs(ph.value(c, x) - exact(x));
            total += w * (norm == Norm::L1 ? e : e * e);
        };
        const Vec2 lo = g.lower(c), hi = g.upper(c);
        const std::vector<Vec2> rect{lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
        bool cut = false;
        if (split) {
            const auto& [n, d] = *split;
            const double tol = 1e-12 * g.h();
            bool below = false, above = false;
            for (const Vec2& p : rect) {
                below |= n.dot(p) < d - tol;
                above |= n.dot(p) > d + tol;
            }
            cut = below && above;
        }
        if (cut) {
            const auto& [n, d] = *split;
            polygon_quadrature(clip_halfplane(rect, n, d, true), q, add);
            polygon_quadrature(clip_halfplane(rect, n, d, false), q, add);
            continue;
        }
        for (int i = 0; i < q.size(); ++i)
            for (int j = 0; j < q.size(); ++j)
                add(g.from_reference(c, Vec2(q.nodes[i], q.nodes[j])), q.weights[i] * q.weights[j] * jac);
    }
    return norm == Norm::L1 ? total : std::sqrt(total);
}

double exact_errors(const DGField& ph, const ExactSolution& exact, Norm norm)
{
    return field_error(ph, exact.trace(), norm, std::make_pair(exact.line_normal(), 0.0));
}

ErrorReport convergence_study(const ExactSolution& exact, const std::vector<int>& meshes, int order,
                              const DarcyOptions& options, const MeshSettings& base)
{
    if (meshes.empty()) throw std::invalid_argument("convergence_study: empty mesh list");
    for (std::size_t i = 0; i < meshes.size(); ++i)
        if (meshes[i] <= 0 || (i > 0 && meshes[i] <= meshes[i - 1]))
            throw std::invalid_argument("convergence_study: mesh sizes must be positive and increasing");
    const Scenario sc = exact.scenario();
    DarcyOptions opts = options;
    opts.dirichlet = exact.trace();
    ErrorReport report;
    for (int m : meshes) {
        MeshSettings ms = base;
        ms.nx = ms.ny = m;
        ms.order = order;
        const DarcySolution sol = solve_darcy(sc, ms, opts);
        report.levels.push_back({m, exact_errors(sol.limited_p, exact, Norm::L1),
                                 exact_errors(sol.limited_p, exact, Norm::L2)});
    }
    return report;
}

double Oracle1D::pressure(double x) const
{
    double drop = (x - a) / km;
    for (const auto& bar : barriers)
        if (bar.x <= x) drop += bar.thickness / bar.perm;
    return pa - u * drop;
}

Oracle1D oracle_1d(double km, std::vector<Barrier1D> barriers, double pa, double pb, double a, double b)
{
    if (!(b > a)) throw std::invalid_argument("oracle_1d: need b > a");
    if (!(km > 0.0)) throw std::invalid_argument("oracle_1d: k_m must be positive");
    double resistance = (b - a) / km;
    for (const auto& bar : barriers) {
        if (!(bar.x > a && bar.x < b)) throw std::invalid_argument("oracle_1d: barrier outside (a, b)");
        if (!(bar.thickness > 0.0 && bar.perm > 0.0))
            throw std::invalid_argument("oracle_1d: barrier strength must be positive");
        resistance += bar.thickness / bar.perm;
    }
    std::sort(barriers.begin(), barriers.end(), [](const Barrier1D& l, const Barrier1D& r) { return l.x < r.x; });
    Oracle1D o;
    o.a = a;
    o.b = b;
    o.km = km;
    o.pa = pa;
    o.pb = pb;
    o.barriers = std::move(barriers);
    o.u = (pa - pb) / resistance;
    return o;
}

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& where)
{
    std::vector<double> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::runtime_error(where + ": not a number: '" + tok + "'");
        }
        if (tok.find_first_not_of(" \t\r", used) != std::string::npos)
            throw std::runtime_error(where + ": not a number: '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

bool skip_line(const std::string& line)
{
    const auto p = line.find_first_not_of(" \t\r");
    return p == std::string::npos || line[p] == '#';
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return in;
}

}  // namespace

ReferenceData read_reference_matrix(const std::string& path)
{
    std::ifstream in = open_input(path);
    ReferenceData data;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        const std::string where = path + ":" + std::to_string(lineno);
        const auto key = line.find("delta_p=");
        if (line.rfind('#', line.find_first_not_of(" \t")) != std::string::npos && key != std::string::npos) {
            data.delta_p = std::stod(line.substr(key + 8));
            continue;
        }
        if (skip_line(line)) continue;
        const auto row = parse_row(line, where);
        if (row.empty() || row[0] < 3 || row[0] != std::floor(row[0]))
            throw std::runtime_error(where + ": vertex count must be an integer >= 3");
        const auto nv = static_cast<std::size_t>(row[0]);
        if (row.size() != 2 * nv + 2) throw std::runtime_error(where + ": expected " + std::to_string(2 * nv + 2) + " fields");
        ReferenceCell cell;
        for (std::size_t i = 0; i < nv; ++i) cell.polygon.emplace_back(row[1 + 2 * i], row[2 + 2 * i]);
        cell.value = row.back();
        if (polygon_area(cell.polygon) < 0.0) std::reverse(cell.polygon.begin(), cell.polygon.end());
        data.cells.push_back(std::move(cell));
    }
    return data;
}

std::vector<ReferenceElement> read_reference_fractures(const std::string& path)
{
    std::ifstream in = open_input(path);
    std::vector<ReferenceElement> out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (skip_line(line)) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto row = parse_row(line, where);
        if (row.size() != 5) throw std::runtime_error(where + ": expected x1,y1,x2,y2,value");
        out.push_back({{row[0], row[1]}, {row[2], row[3]}, row[4]});
    }
    return out;
}

std::vector<Vec2> clip_polygon(const std::vector<Vec2>& polygon, const Vec2& lower, const Vec2& upper)
{
    std::vector<Vec2> p = polygon;
    p = clip_halfplane(p, Vec2(1.0, 0.0), lower.x(), false);
    if (!p.empty()) p = clip_halfplane(p, Vec2(1.0, 0.0), upper.x(), true);
    if (!p.empty()) p = clip_halfplane(p, Vec2(0.0, 1.0), lower.y(), false);
    if (!p.empty()) p = clip_halfplane(p, Vec2(0.0, 1.0), upper.y(), true);
    return p;
}

double polygon_area(const std::vector<Vec2>& polygon)
{
    double a = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Vec2& p = polygon[i];
        const Vec2& q = polygon[(i + 1) % polygon.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& polygon)
{
    Vec2 c = Vec2::Zero();
    double a = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Vec2& p = polygon[i];
        const Vec2& q = polygon[(i + 1) % polygon.size()];
        const double cr = p.x() * q.y() - q.x() * p.y();
        a += cr;
        c += cr * (p + q);
    }
    if (a == 0.0) {
        Vec2 m = Vec2::Zero();
        for (const Vec2& p : polygon) m += p;
        return m / static_cast<double>(std::max<std::size_t>(polygon.size(), 1));
    }
    return c / (3.0 * a);
}

namespace {

// Cell range [lo, hi] along one axis covering [a, b].
std::pair<int, int> cell_range(double a, double b, double origin, double h, int n)
{
    const int lo = std::clamp(static_cast<int>(std::floor((a - origin) / h)) - 1, 0, n - 1);
    const int hi = std::clamp(static_cast<int>(std::floor((b - origin) / h)) + 1, 0, n - 1);
    return {lo, hi};
}

// {p_h} at a point: the mean over the cells whose closure contains x.
double trace_average(const DGField& ph, const Vec2& x)
{
    const Grid& g = ph.grid();
    const double tx = (x.x() - g.x0) / g.hx, ty = (x.y() - g.y0) / g.hy;
    auto candidates = [](double t, int n) {
        std::vector<int> out;
        const double r = std::round(t);
        if (std::abs(t - r) <= 1e-9 * std::max(1.0, std::abs(t))) {
            const int k = static_cast<int>(r);
            if (k - 1 >= 0 && k - 1 < n) out.push_back(k - 1);
            if (k >= 0 && k < n) out.push_back(k);
        } else {
            out.push_back(std::clamp(static_cast<int>(std::floor(t)), 0, n - 1));
        }
        return out;
    };
    double sum = 0.0;
    int count = 0;
    for (int i : candidates(tx, g.nx))
        for (int j : candidates(ty, g.ny)) {
            const int c = g.index(i, j);
            const Vec2 lo = g.lower(c), hi = g.upper(c);
            const Vec2 xc(std::clamp(x.x(), lo.x(), hi.x()), std::clamp(x.y(), lo.y(), hi.y()));
            sum += ph.value(c, xc);
            ++count;
        }
    if (count == 0) throw std::out_of_range("trace_average: point outside the grid");
    return sum / count;
}

}  // namespace

BenchmarkErrors benchmark_errors(const DGField& ph, const ReferenceData& reference, double delta_p)
{
    if (reference.cells.empty()) throw std::invalid_argument("benchmark_errors: no reference cells");
    const Grid& g = ph.grid();
    BenchmarkErrors out;
    if (delta_p > 0.0) {
        out.delta_p = delta_p;
    } else if (reference.delta_p && *reference.delta_p > 0.0) {
        out.delta_p = *reference.delta_p;
    } else {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& c : reference.cells) {
            lo = std::min(lo, c.value);
            hi = std::max(hi, c.value);
        }
        out.delta_p = hi - lo;
    }
    if (!(out.delta_p > 0.0)) throw std::invalid_argument("benchmark_errors: pressure scale must be positive");

    const double area = g.nx * g.hx * g.ny * g.hy;
    double covered = 0.0, sum_m = 0.0;
    for (const auto& rc : reference.cells) {
        double xmin = rc.polygon[0].x(), xmax = xmin, ymin = rc.polygon[0].y(), ymax = ymin;
        for (const Vec2& p : rc.polygon) {
            xmin = std::min(xmin, p.x());
            xmax = std::max(xmax, p.x());
            ymin = std::min(ymin, p.y());
            ymax = std::max(ymax, p.y());
        }
        const auto [i0, i1] = cell_range(xmin, xmax, g.x0, g.hx, g.nx);
        const auto [j0, j1] = cell_range(ymin, ymax, g.y0, g.hy, g.ny);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                const int c = g.index(i, j);
                const auto piece = clip_polygon(rc.polygon, g.lower(c), g.upper(c));
                if (piece.size() < 3) continue;
                const double a = polygon_area(piece);
                if (!(a > 0.0)) continue;
                const double diff = rc.value - ph.value(c, polygon_centroid(piece));
                sum_m += a * diff * diff;
                covered += a;
            }
    }
    out.coverage_gap = (area - covered) / area;
    if (std::abs(out.coverage_gap) > 0.01) {
        std::ostringstream msg;
        msg << "reference cells cover " << covered << " of the domain area " << area;
        out.warnings.push_back(msg.str());
    }
    out.err_m = std::sqrt(sum_m / area) / out.delta_p;

    if (reference.elements.empty()) {
        out.err_f = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    double length = 0.0, sum_f = 0.0;
    for (const auto& e : reference.elements) {
        const Vec2 d = e.b - e.a;
        const double len = d.norm();
        if (!(len > 0.0)) continue;
        length += len;
        std::vector<double> ts{0.0, 1.0};
        for (int ax = 0; ax < 2; ++ax) {
            if (d[ax] == 0.0) continue;
            const double origin = ax == 0 ? g.x0 : g.y0, h = ax == 0 ? g.hx : g.hy;
            const int n = ax == 0 ? g.nx : g.ny;
            for (int k = 0; k <= n; ++k) {
                const double t = (origin + k * h - e.a[ax]) / d[ax];
                if (t > 0.0 && t < 1.0) ts.push_back(t);
            }
        }
        std::sort(ts.begin(), ts.end());
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const double piece = (ts[k + 1] - ts[k]) * len;
            if (piece <= 1e-14 * len) continue;
            const Vec2 mid = e.a + 0.5 * (ts[k] + ts[k + 1]) * d;
            const double diff = e.value - trace_average(ph, mid);
            sum_f += piece * diff * diff;
        }
    }
    out.err_f = std::sqrt(sum_f / length) / out.delta_p;
    return out;
}

std::vector<std::pair<double, double>> slice(const DGField& ph, const Vec2& p0, const Vec2& p1, int n)
{
    if (n < 2) throw std::invalid_argument("slice: need at least two samples");
    const Grid& g = ph.grid();
    const double x1 = g.x0 + g.nx * g.hx, y1 = g.y0 + g.ny * g.hy;
    const double tol = 1e-12 * std::max(x1 - g.x0, y1 - g.y0);
    for (const Vec2& p : {p0, p1})
        if (p.x() < g.x0 - tol || p.x() > x1 + tol || p.y() < g.y0 - tol || p.y() > y1 + tol)
            throw std::invalid_argument("slice: line leaves the domain");
    const Vec2 dir = p1 - p0;
    const double len = dir.norm();

    auto index = [](double t, double step, int cells) {
        // t in cell units; on an interface pick the cell facing the start point
        const double r = std::round(t);
        if (std::abs(t - r) <= 1e-12 * std::max(1.0, std::abs(t)))
            return std::clamp(static_cast<int>(r) - (step > 0.0 ? 1 : 0), 0, cells - 1);
        return std::clamp(static_cast<int>(std::floor(t)), 0, cells - 1);
    };
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double s = static_cast<double>(k) / (n - 1);
        Vec2 x = p0 + s * dir;
        x.x() = std::clamp(x.x(), g.x0, x1);
        x.y() = std::clamp(x.y(), g.y0, y1);
        const int i = index((x.x() - g.x0) / g.hx, dir.x(), g.nx);
        const int j = index((x.y() - g.y0) / g.hy, dir.y(), g.ny);
        out.emplace_back(s * len, ph.value(g.index(i, j), x));
    }
    return out;
}

}  // namespace rdfm
