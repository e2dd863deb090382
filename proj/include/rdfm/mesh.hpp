#pragma once

/**
 * @file mesh.hpp
 * @brief Uniform rectangular partition with edge connectivity and boundary tags.
 *
 * Cells are numbered row-major, c = j*nx + i, with i along x and j along y.
 * Interior edges are stored once with `minus` the cell to the left (vertical
 * edge) or below (horizontal edge), so the stored normal points from minus
 * into plus.
 */

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "rdfm/scenario.hpp"

namespace rdfm {

/// Geometry of the uniform grid, without connectivity. Cheap to copy.
struct Grid {
    double x0 = 0.0, y0 = 0.0;
    double hx = 1.0, hy = 1.0;
    int nx = 1, ny = 1;

    int cell_count() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    int col(int c) const { return c % nx; }
    int row(int c) const { return c / nx; }
    double h() const { return std::max(hx, hy); }
    double cell_area() const { return hx * hy; }

    Vec2 lower(int c) const { return {x0 + col(c) * hx, y0 + row(c) * hy}; }
    Vec2 upper(int c) const { return {x0 + (col(c) + 1) * hx, y0 + (row(c) + 1) * hy}; }
    Vec2 center(int c) const { return {x0 + (col(c) + 0.5) * hx, y0 + (row(c) + 0.5) * hy}; }

    /// Maps a physical point to the reference square [-1,1]^2 of cell c.
    Vec2 to_reference(int c, const Vec2& p) const;
    Vec2 from_reference(int c, const Vec2& r) const;

    /// Closed-cell test with a relative tolerance.
    bool contains(int c, const Vec2& p, double tol = 1e-12) const;

    /// Cell containing p (clamped to the domain); ties go to the cell with larger index.
    std::optional<int> locate(const Vec2& p, double tol = 1e-12) const;
};

enum class Axis { X = 0, Y = 1 };

struct InteriorEdge {
    int minus = -1;
    int plus = -1;
    Axis normal_axis = Axis::X;  ///< X: vertical edge with normal (1,0)
    Vec2 a, b;

    Vec2 normal() const { return normal_axis == Axis::X ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0); }
    double length() const { return (b - a).norm(); }
};

struct BoundaryEdge {
    int cell = -1;
    Side side = Side::Left;
    Vec2 a, b;

    Vec2 normal() const;
    double length() const { return (b - a).norm(); }
};

/// One of the four faces of a cell, seen from that cell.
struct CellFace {
    bool boundary = false;
    int edge = -1;      ///< index into interior_edges or boundary_edges
    int neighbor = -1;  ///< -1 on the boundary
    Vec2 normal;        ///< outward from the cell
};

class Mesh {
public:
    Mesh() = default;
    Mesh(const Domain& domain, int nx, int ny, const std::array<BoundaryCondition, 4>& boundary);

    const Grid& grid() const { return grid_; }
    int cell_count() const { return grid_.cell_count(); }
    double h() const { return grid_.h(); }

    const std::vector<InteriorEdge>& interior_edges() const { return interior_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
    const BoundaryCondition& boundary_condition(Side side) const { return bcs_[static_cast<int>(side)]; }

    /// Faces ordered left, right, bottom, top (same order as Side).
    const std::array<CellFace, 4>& faces(int cell) const { return faces_[cell]; }

    /// Corners ordered (lower-left, lower-right, upper-right, upper-left).
    std::array<Vec2, 4> corners(int cell) const;

    /// Cells sharing the grid vertex (vi, vj), vi in [0,nx], vj in [0,ny].
    std::vector<int> cells_at_vertex(int vi, int vj) const;

private:
    Grid grid_;
    std::array<BoundaryCondition, 4> bcs_{};
    std::vector<InteriorEdge> interior_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<std::array<CellFace, 4>> faces_;
};

Mesh build_mesh(const Scenario& scenario, int nx, int ny);

}  // namespace rdfm
