#pragma once

/**
 * @file dg.hpp
 * @brief Q^k spaces on rectangles: orthonormal tensor Legendre basis,
 *        Gauss quadrature, and piecewise-polynomial field storage.
 *
 * On cell T with sizes hx, hy the basis is
 *   phi_{ij}(x, y) = 2/sqrt(hx*hy) * L_i(r) * L_j(s),
 * where (r, s) are reference coordinates in [-1,1]^2 and L_i is the Legendre
 * polynomial normalised to unit L2 norm on [-1,1]. The mass matrix is the
 * identity on every cell. Basis index a = j*(k+1) + i.
 */

#include <functional>
#include <span>
#include <vector>

#include "rdfm/mesh.hpp"

namespace rdfm {

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree <= 2n-1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(nodes.size()); }
};

GaussRule gauss_legendre(int n);

/// Orthonormal Legendre value and derivative, L_i and L_i', at x in [-1,1].
void legendre(int degree, double x, double* values, double* derivatives);

class TensorBasis {
public:
    explicit TensorBasis(int order);

    int order() const { return order_; }
    int size() const { return (order_ + 1) * (order_ + 1); }

    /// Reference basis values psi_a(r).
    void values(const Vec2& ref, double* out) const;
    /// Reference gradient d psi_a / dr and d psi_a / ds.
    void gradients(const Vec2& ref, double* dr, double* ds) const;

private:
    int order_;
};

/// Physical basis values and gradients at one point of one cell.
struct BasisPoint {
    std::vector<double> value;
    std::vector<double> dx;
    std::vector<double> dy;
};

/// Evaluates the physical basis of `grid` cell c at physical point p (no bounds check).
void eval_basis(const TensorBasis& basis, const Grid& grid, int c, const Vec2& p, BasisPoint& out);

/**
 * @brief Piecewise Q^k field with one or two components.
 *
 * Coefficients are stored cell-major: cell, component, basis index.
 */
class DGField {
public:
    DGField() = default;
    DGField(const Grid& grid, int order, int components = 1);

    const Grid& grid() const { return grid_; }
    int order() const { return order_; }
    int components() const { return components_; }
    int dofs_per_cell() const { return (order_ + 1) * (order_ + 1); }
    int cell_count() const { return grid_.cell_count(); }

    std::span<double> coefficients(int cell, int component = 0);
    std::span<const double> coefficients(int cell, int component = 0) const;
    std::vector<double>& data() { return coeffs_; }
    const std::vector<double>& data() const { return coeffs_; }

    /// Value of one component; throws std::out_of_range when p is outside the closed cell.
    double value(int cell, const Vec2& p, int component = 0) const;
    Vec2 vector_value(int cell, const Vec2& p) const;
    Vec2 gradient(int cell, const Vec2& p, int component = 0) const;

    /// Evaluates at p using the cell that contains it (interface ties: larger cell index).
    double value_at(const Vec2& p, int component = 0) const;

private:
    void check_inside(int cell, const Vec2& p) const;

    Grid grid_;
    int order_ = 0;
    int components_ = 1;
    std::vector<double> coeffs_;
};

/// Scalar-field value at a point of a cell.
double eval(const DGField& field, int cell, const Vec2& point);

struct ScalarJumpAverage {
    Vec2 jump;       ///< [v] = v1 n1 + v2 n2
    double average;  ///< {v}
};

struct VectorJumpAverage {
    double jump;   ///< [w] = w1.n1 + w2.n2
    Vec2 average;  ///< {w}
};

ScalarJumpAverage jump_avg(const DGField& field, const InteriorEdge& edge, const Vec2& point);
ScalarJumpAverage jump_avg(const DGField& field, const BoundaryEdge& edge, const Vec2& point);
VectorJumpAverage vector_jump_avg(const DGField& field, const InteriorEdge& edge, const Vec2& point);
VectorJumpAverage vector_jump_avg(const DGField& field, const BoundaryEdge& edge, const Vec2& point);

/// Mean of a scalar field (component `component`) over a cell.
double cell_average(const DGField& field, int cell, int component = 0);

/// Gauss points along a straight piece: points, weights, and the arclength of each point from `a`.
struct LineQuadrature {
    std::vector<Vec2> points;
    std::vector<double> weights;
    std::vector<double> arclength;
};

LineQuadrature segment_quadrature(const Vec2& a, const Vec2& b, int n_points);

/// L2 projection of f onto Q^k, using n_points^2 Gauss points per cell (default k+3).
DGField project(const Grid& grid, int order, const std::function<double(const Vec2&)>& f, int n_points = 0);

/// Componentwise projection of a vector-valued function.
DGField project_vector(const Grid& grid, int order, const std::function<Vec2(const Vec2&)>& f, int n_points = 0);

}  // namespace rdfm
