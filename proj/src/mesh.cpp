#include "rdfm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdfm {

Vec2 Grid::to_reference(int c, const Vec2& p) const
{
    const Vec2 m = center(c);
    return {2.0 * (p.x() - m.x()) / hx, 2.0 * (p.y() - m.y()) / hy};
}

Vec2 Grid::from_reference(int c, const Vec2& r) const
{
    const Vec2 m = center(c);
    return {m.x() + 0.5 * hx * r.x(), m.y() + 0.5 * hy * r.y()};
}

bool Grid::contains(int c, const Vec2& p, double tol) const
{
    const Vec2 lo = lower(c), hi = upper(c);
    const double tx = tol * hx, ty = tol * hy;
    return p.x() >= lo.x() - tx && p.x() <= hi.x() + tx && p.y() >= lo.y() - ty && p.y() <= hi.y() + ty;
}

std::optional<int> Grid::locate(const Vec2& p, double tol) const
{
    const double fx = (p.x() - x0) / hx;
    const double fy = (p.y() - y0) / hy;
    if (fx < -tol || fx > nx + tol || fy < -tol || fy > ny + tol) return std::nullopt;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny - 1);
    return index(i, j);
}

Vec2 BoundaryEdge::normal() const
{
    switch (side) {
    case Side::Left: return {-1.0, 0.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Bottom: return {0.0, -1.0};
    case Side::Top: return {0.0, 1.0};
    }
    return Vec2::Zero();
}

Mesh::Mesh(const Domain& domain, int nx, int ny, const std::array<BoundaryCondition, 4>& boundary)
    : bcs_(boundary)
{
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_mesh: nx and ny must be >= 1");
    grid_.x0 = domain.x0;
    grid_.y0 = domain.y0;
    grid_.nx = nx;
    grid_.ny = ny;
    grid_.hx = domain.width() / nx;
    grid_.hy = domain.height() / ny;

    faces_.resize(grid_.cell_count());
    auto x = [&](int i) { return i == nx ? domain.x1 : domain.x0 + i * grid_.hx; };
    auto y = [&](int j) { return j == ny ? domain.y1 : domain.y0 + j * grid_.hy; };

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int c = grid_.index(i, j);
            auto& f = faces_[c];
            // right face
            if (i + 1 < nx) {
                InteriorEdge e{c, grid_.index(i + 1, j), Axis::X, {x(i + 1), y(j)}, {x(i + 1), y(j + 1)}};
                const int id = static_cast<int>(interior_.size());
                interior_.push_back(e);
                f[static_cast<int>(Side::Right)] = {false, id, e.plus, Vec2(1.0, 0.0)};
                faces_[e.plus][static_cast<int>(Side::Left)] = {false, id, c, Vec2(-1.0, 0.0)};
            }
            // top face
            if (j + 1 < ny) {
                InteriorEdge e{c, grid_.index(i, j + 1), Axis::Y, {x(i), y(j + 1)}, {x(i + 1), y(j + 1)}};
                const int id = static_cast<int>(interior_.size());
                interior_.push_back(e);
                f[static_cast<int>(Side::Top)] = {false, id, e.plus, Vec2(0.0, 1.0)};
                faces_[e.plus][static_cast<int>(Side::Bottom)] = {false, id, c, Vec2(0.0, -1.0)};
            }
        }
    }

    auto add_boundary = [&](int c, Side side, Vec2 a, Vec2 b) {
        BoundaryEdge e{c, side, a, b};
        const int id = static_cast<int>(boundary_.size());
        boundary_.push_back(e);
        faces_[c][static_cast<int>(side)] = {true, id, -1, e.normal()};
    };
    for (int j = 0; j < ny; ++j) {
        add_boundary(grid_.index(0, j), Side::Left, {x(0), y(j)}, {x(0), y(j + 1)});
        add_boundary(grid_.index(nx - 1, j), Side::Right, {x(nx), y(j)}, {x(nx), y(j + 1)});
    }
    for (int i = 0; i < nx; ++i) {
        add_boundary(grid_.index(i, 0), Side::Bottom, {x(i), y(0)}, {x(i + 1), y(0)});
        add_boundary(grid_.index(i, ny - 1), Side::Top, {x(i), y(ny)}, {x(i + 1), y(ny)});
    }
}

std::array<Vec2, 4> Mesh::corners(int cell) const
{
    const Vec2 lo = grid_.lower(cell), hi = grid_.upper(cell);
    return {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
}

std::vector<int> Mesh::cells_at_vertex(int vi, int vj) const
{
    std::vector<int> out;
    for (int dj = -1; dj <= 0; ++dj)
        for (int di = -1; di <= 0; ++di) {
            const int i = vi + di, j = vj + dj;
            if (i >= 0 && i < grid_.nx && j >= 0 && j < grid_.ny) out.push_back(grid_.index(i, j));
        }
    return out;
}

Mesh build_mesh(const Scenario& scenario, int nx, int ny)
{
    return Mesh(scenario.domain, nx, ny, scenario.boundary);
}

}  // namespace rdfm
