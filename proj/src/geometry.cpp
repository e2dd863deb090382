#include "rdfm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rdfm {

LocalFrame local_frame(const Segment& segment)
{
    Vec2 d = segment.b - segment.a;
    const double len = d.norm();
    if (!(len > 0.0)) throw std::invalid_argument("local_frame: zero-length segment");
    if (d.x() < 0.0 || (d.x() == 0.0 && d.y() < 0.0)) d = -d;

    LocalFrame f;
    f.theta = std::atan2(d.y(), d.x());
    if (f.theta <= -std::numbers::pi / 2) f.theta += std::numbers::pi;
    // exact unit vectors for axis-aligned segments
    if (d.y() == 0.0) {
        f.nu = Vec2(1.0, 0.0);
    } else if (d.x() == 0.0) {
        f.nu = Vec2(0.0, 1.0);
    } else {
        f.nu = d / len;
    }
    f.sigma = Vec2(-f.nu.y(), f.nu.x());
    const double xa = f.xi(segment.a), xb = f.xi(segment.b);
    f.xi1 = std::min(xa, xb);
    f.xi2 = std::max(xa, xb);
    f.eta0 = 0.5 * (f.eta(segment.a) + f.eta(segment.b));
    return f;
}

namespace {

// Nearest grid line index to coordinate v on an axis with origin o and spacing h.
double nearest_line(double v, double o, double h, int n)
{
    const double k = std::clamp(std::round((v - o) / h), 0.0, static_cast<double>(n));
    return o + k * h;
}

PlacedSegment place(const Mesh& mesh, const Segment& seg, int index, double align_tol, double perturb,
                    std::uint64_t seed)
{
    const Grid& g = mesh.grid();
    const double h = g.h();
    const double tol = align_tol * h;

    PlacedSegment ps;
    ps.original = seg;
    ps.placed = seg;

    const double x1 = g.x0 + g.nx * g.hx, y1 = g.y0 + g.ny * g.hy;
    auto try_axis = [&](Axis axis) {
        const int c = axis == Axis::X ? 0 : 1;
        const double va = seg.a[c], vb = seg.b[c];
        const double o = axis == Axis::X ? g.x0 : g.y0;
        const double sp = axis == Axis::X ? g.hx : g.hy;
        const int n = axis == Axis::X ? g.nx : g.ny;
        const double line = nearest_line(0.5 * (va + vb), o, sp, n);
        if (std::abs(va - line) > tol || std::abs(vb - line) > tol) return false;

        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ULL);
        double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
        const double lo = axis == Axis::X ? g.x0 : g.y0;
        const double hi = axis == Axis::X ? x1 : y1;
        const double amount = perturb * h;
        if (line + sign * amount > hi || line + sign * amount < lo) sign = -sign;

        ps.aligned = true;
        ps.line_axis = axis;
        ps.grid_line = line;
        ps.shift = sign * amount;
        ps.placed.a[c] = va + ps.shift;
        ps.placed.b[c] = vb + ps.shift;
        return true;
    };
    if (!try_axis(Axis::X)) try_axis(Axis::Y);
    ps.frame = local_frame(ps.placed);
    return ps;
}

}  // namespace

Clipping clip_segments(const Mesh& mesh, const std::vector<Segment>& segments, double align_tol, double perturb,
                       std::uint64_t seed)
{
    const Grid& g = mesh.grid();
    const double min_len = 1e-14 * g.h();
    Clipping out;
    out.segments.reserve(segments.size());

    for (std::size_t si = 0; si < segments.size(); ++si) {
        PlacedSegment ps = place(mesh, segments[si], static_cast<int>(si), align_tol, perturb, seed);
        const Vec2 a = ps.placed.a, d = ps.placed.b - ps.placed.a;

        std::vector<double> ts{0.0, 1.0};
        auto add_crossings = [&](int c, double o, double sp, int n) {
            if (d[c] == 0.0) return;
            const double lo = std::min(a[c], a[c] + d[c]), hi = std::max(a[c], a[c] + d[c]);
            const int k0 = std::max(0, static_cast<int>(std::ceil((lo - o) / sp)));
            const int k1 = std::min(n, static_cast<int>(std::floor((hi - o) / sp)));
            for (int k = k0; k <= k1; ++k) {
                const double t = (o + k * sp - a[c]) / d[c];
                if (t > 0.0 && t < 1.0) ts.push_back(t);
            }
        };
        add_crossings(0, g.x0, g.hx, g.nx);
        add_crossings(1, g.y0, g.hy, g.ny);
        std::sort(ts.begin(), ts.end());

        const double len = d.norm();
        const std::size_t first = out.pieces.size();
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const double t0 = ts[k], t1 = ts[k + 1];
            if ((t1 - t0) * len < min_len) continue;
            const Vec2 mid = a + 0.5 * (t0 + t1) * d;
            const auto cell = g.locate(mid);
            if (!cell) continue;
            const Vec2 pa = a + t0 * d, pb = k + 2 == ts.size() ? Vec2(ps.placed.b) : Vec2(a + t1 * d);
            if (out.pieces.size() > first && out.pieces.back().cell == *cell) {
                out.pieces.back().b = pb;
                continue;
            }
            out.pieces.push_back({*cell, static_cast<int>(si), pa, pb, true});
        }
        out.segments.push_back(std::move(ps));
    }
    return out;
}

namespace {

double cross(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2, double tol)
{
    const Vec2 r = p2 - p1, s = q2 - q1;
    const double denom = cross(r, s);
    const double scale = std::max(r.norm(), s.norm());
    if (std::abs(denom) <= 1e-14 * scale * scale) {
        // parallel: intersect only if collinear and overlapping
        if (std::abs(cross(q1 - p1, r)) > tol * r.norm()) return false;
        const double rr = r.squaredNorm();
        const double t0 = (q1 - p1).dot(r) / rr, t1 = (q2 - p1).dot(r) / rr;
        return std::max(t0, t1) >= -tol / r.norm() && std::min(t0, t1) <= 1.0 + tol / r.norm();
    }
    const double t = cross(q1 - p1, s) / denom;
    const double u = cross(q1 - p1, r) / denom;
    const double et = tol / r.norm(), eu = tol / s.norm();
    return t >= -et && t <= 1.0 + et && u >= -eu && u <= 1.0 + eu;
}

}  // namespace

void resolve_intersections(Clipping& clipping)
{
    auto& pieces = clipping.pieces;
    if (pieces.empty()) return;

    std::vector<std::size_t> order(pieces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return pieces[l].cell < pieces[r].cell; });

    double scale = 0.0;
    for (const auto& p : pieces) scale = std::max(scale, p.length());
    const double tol = 1e-12 * std::max(scale, 1e-300);

    std::vector<std::uint8_t> deactivate(pieces.size(), 0);
    for (std::size_t lo = 0; lo < order.size();) {
        std::size_t hi = lo;
        while (hi < order.size() && pieces[order[hi]].cell == pieces[order[lo]].cell) ++hi;
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = i + 1; j < hi; ++j) {
                const auto& p = pieces[order[i]];
                const auto& q = pieces[order[j]];
                if (clipping.kind(p) == clipping.kind(q)) continue;
                if (!segments_intersect(p.a, p.b, q.a, q.b, tol)) continue;
                const int pp = clipping.segments[p.segment].placed.priority;
                const int pq = clipping.segments[q.segment].placed.priority;
                if (pp == pq)
                    throw std::invalid_argument("resolve_intersections: fracture segment and barrier segment (" +
                                                std::to_string(p.segment) + ", " + std::to_string(q.segment) +
                                                ") intersect with equal priority " + std::to_string(pp) +
                                                "; set explicit priorities");
                deactivate[pp < pq ? order[i] : order[j]] = 1;
            }
        }
        lo = hi;
    }
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (deactivate[i]) pieces[i].active = false;
}

int EdgeFlags::count() const
{
    int n = 0;
    for (auto f : barrier_mode) n += f != 0;
    return n;
}

std::vector<std::uint8_t> cells_with(const Mesh& mesh, const Clipping& clipping, SegmentKind kind)
{
    std::vector<std::uint8_t> out(mesh.cell_count(), 0);
    for (const auto& p : clipping.pieces)
        if (p.active && clipping.kind(p) == kind && p.length() > 0.0) out[p.cell] = 1;
    return out;
}

EdgeFlags classify_barrier_edges(const Mesh& mesh, const Clipping& clipping, const ClassifyOptions& options)
{
    const auto& edges = mesh.interior_edges();
    EdgeFlags flags;
    flags.barrier_mode.assign(edges.size(), 0);
    flags.aligned.assign(edges.size(), 0);

    std::vector<std::uint8_t> crossed(mesh.cell_count(), 0);
    for (const auto& p : clipping.pieces) {
        if (!p.active || clipping.kind(p) != SegmentKind::Barrier || !(p.length() > 0.0)) continue;
        const auto& seg = clipping.segments[p.segment];
        if (!(options.aligned_adaptation && seg.aligned)) {
            crossed[p.cell] = 1;
            continue;
        }
        // The piece sits just off the grid line; the aligned edge is the face of its cell on that line.
        Side face;
        if (seg.line_axis == Axis::X)
            face = seg.shift >= 0.0 ? Side::Left : Side::Right;
        else
            face = seg.shift >= 0.0 ? Side::Bottom : Side::Top;
        const auto& f = mesh.faces(p.cell)[static_cast<int>(face)];
        if (f.boundary) continue;
        flags.aligned[f.edge] = 1;
        flags.barrier_mode[f.edge] = 1;
    }

    for (std::size_t e = 0; e < edges.size(); ++e)
        if (crossed[edges[e].minus] || crossed[edges[e].plus]) flags.barrier_mode[e] = 1;
    return flags;
}

}  // namespace rdfm
