#include "rdfm/dg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rdfm {

GaussRule gauss_legendre(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double pn = n == 1 ? x : p1;
            const double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double pn = n == 1 ? x : p1;
        const double pnm1 = n == 1 ? 1.0 : p0;
        dp = n * (x * pn - pnm1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

void legendre(int degree, double x, double* values, double* derivatives)
{
    double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
    for (int i = 0; i <= degree; ++i) {
        double p, d;
        if (i == 0) {
            p = 1.0;
            d = 0.0;
        } else if (i == 1) {
            p = x;
            d = 1.0;
        } else {
            p = ((2.0 * i - 1.0) * x * p1 - (i - 1.0) * p0) / i;
            d = d0 + (2.0 * i - 1.0) * p1;  // P_i' = P_{i-2}' + (2i-1) P_{i-1}
            p0 = p1;
            p1 = p;
            d0 = d1;
            d1 = d;
        }
        const double scale = std::sqrt((2.0 * i + 1.0) / 2.0);
        values[i] = scale * p;
        if (derivatives) derivatives[i] = scale * d;
    }
}

TensorBasis::TensorBasis(int order) : order_(order)
{
    if (order < 0) throw std::invalid_argument("TensorBasis: order must be >= 0");
}

void TensorBasis::values(const Vec2& ref, double* out) const
{
    const int m = order_ + 1;
    double lx[16], ly[16];
    legendre(order_, ref.x(), lx, nullptr);
    legendre(order_, ref.y(), ly, nullptr);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) out[j * m + i] = lx[i] * ly[j];
}

void TensorBasis::gradients(const Vec2& ref, double* dr, double* ds) const
{
    const int m = order_ + 1;
    double lx[16], ly[16], dlx[16], dly[16];
    legendre(order_, ref.x(), lx, dlx);
    legendre(order_, ref.y(), ly, dly);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            dr[j * m + i] = dlx[i] * ly[j];
            ds[j * m + i] = lx[i] * dly[j];
        }
}

void eval_basis(const TensorBasis& basis, const Grid& grid, int c, const Vec2& p, BasisPoint& out)
{
    const int n = basis.size();
    out.value.resize(n);
    out.dx.resize(n);
    out.dy.resize(n);
    const Vec2 r = grid.to_reference(c, p);
    basis.values(r, out.value.data());
    basis.gradients(r, out.dx.data(), out.dy.data());
    const double scale = 2.0 / std::sqrt(grid.hx * grid.hy);
    const double sx = scale * 2.0 / grid.hx, sy = scale * 2.0 / grid.hy;
    for (int a = 0; a < n; ++a) {
        out.value[a] *= scale;
        out.dx[a] *= sx;
        out.dy[a] *= sy;
    }
}

DGField::DGField(const Grid& grid, int order, int components)
    : grid_(grid), order_(order), components_(components),
      coeffs_(static_cast<std::size_t>(grid.cell_count()) * components * (order + 1) * (order + 1), 0.0)
{
    if (order < 0 || order > 14) throw std::invalid_argument("DGField: order must lie in [0, 14]");
    if (components < 1) throw std::invalid_argument("DGField: components must be >= 1");
}

std::span<double> DGField::coefficients(int cell, int component)
{
    const int n = dofs_per_cell();
    return {coeffs_.data() + (static_cast<std::size_t>(cell) * components_ + component) * n,
            static_cast<std::size_t>(n)};
}

std::span<const double> DGField::coefficients(int cell, int component) const
{
    const int n = dofs_per_cell();
    return {coeffs_.data() + (static_cast<std::size_t>(cell) * components_ + component) * n,
            static_cast<std::size_t>(n)};
}

void DGField::check_inside(int cell, const Vec2& p) const
{
    if (cell < 0 || cell >= cell_count()) throw std::out_of_range("DGField: cell index out of range");
    if (!grid_.contains(cell, p, 1e-12))
        throw std::out_of_range("DGField: point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                                ") lies outside cell " + std::to_string(cell));
}

double DGField::value(int cell, const Vec2& p, int component) const
{
    check_inside(cell, p);
    const int n = dofs_per_cell();
    double psi[256];
    TensorBasis(order_).values(grid_.to_reference(cell, p), psi);
    const auto c = coefficients(cell, component);
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += c[a] * psi[a];
    return v * 2.0 / std::sqrt(grid_.hx * grid_.hy);
}

Vec2 DGField::vector_value(int cell, const Vec2& p) const
{
    if (components_ < 2) throw std::logic_error("DGField::vector_value on a scalar field");
    return {value(cell, p, 0), value(cell, p, 1)};
}

Vec2 DGField::gradient(int cell, const Vec2& p, int component) const
{
    check_inside(cell, p);
    BasisPoint bp;
    eval_basis(TensorBasis(order_), grid_, cell, p, bp);
    const auto c = coefficients(cell, component);
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < dofs_per_cell(); ++a) g += c[a] * Vec2(bp.dx[a], bp.dy[a]);
    return g;
}

double DGField::value_at(const Vec2& p, int component) const
{
    const auto c = grid_.locate(p);
    if (!c) throw std::out_of_range("DGField::value_at: point outside the domain");
    return value(*c, p, component);
}

double eval(const DGField& field, int cell, const Vec2& point) { return field.value(cell, point); }

ScalarJumpAverage jump_avg(const DGField& field, const InteriorEdge& edge, const Vec2& point)
{
    const double v1 = field.value(edge.minus, point), v2 = field.value(edge.plus, point);
    const Vec2 n1 = edge.normal();
    return {v1 * n1 - v2 * n1, 0.5 * (v1 + v2)};
}

ScalarJumpAverage jump_avg(const DGField& field, const BoundaryEdge& edge, const Vec2& point)
{
    const double v = field.value(edge.cell, point);
    return {v * edge.normal(), v};
}

VectorJumpAverage vector_jump_avg(const DGField& field, const InteriorEdge& edge, const Vec2& point)
{
    const Vec2 w1 = field.vector_value(edge.minus, point), w2 = field.vector_value(edge.plus, point);
    const Vec2 n1 = edge.normal();
    return {w1.dot(n1) - w2.dot(n1), 0.5 * (w1 + w2)};
}

VectorJumpAverage vector_jump_avg(const DGField& field, const BoundaryEdge& edge, const Vec2& point)
{
    const Vec2 w = field.vector_value(edge.cell, point);
    return {w.dot(edge.normal()), w};
}

double cell_average(const DGField& field, int cell, int component)
{
    // Only the constant mode has nonzero mean: phi_0 = 1/sqrt(|T|).
    return field.coefficients(cell, component)[0] / std::sqrt(field.grid().cell_area());
}

LineQuadrature segment_quadrature(const Vec2& a, const Vec2& b, int n_points)
{
    const GaussRule g = gauss_legendre(n_points);
    const double len = (b - a).norm();
    LineQuadrature q;
    for (int i = 0; i < g.size(); ++i) {
        const double t = 0.5 * (g.nodes[i] + 1.0);
        q.points.push_back(a + t * (b - a));
        q.weights.push_back(0.5 * len * g.weights[i]);
        q.arclength.push_back(t * len);
    }
    return q;
}

DGField project(const Grid& grid, int order, const std::function<double(const Vec2&)>& f, int n_points)
{
    DGField out(grid, order, 1);
    const int nq = n_points > 0 ? n_points : order + 3;
    const GaussRule g = gauss_legendre(nq);
    const TensorBasis basis(order);
    const int n = basis.size();
    const double jac = 0.25 * grid.hx * grid.hy;
    const double scale = 2.0 / std::sqrt(grid.hx * grid.hy);
    std::vector<double> psi(n);
    for (int c = 0; c < grid.cell_count(); ++c) {
        auto coef = out.coefficients(c);
        for (int qy = 0; qy < nq; ++qy)
            for (int qx = 0; qx < nq; ++qx) {
                const Vec2 r(g.nodes[qx], g.nodes[qy]);
                const double w = g.weights[qx] * g.weights[qy] * jac;
                const double fv = f(grid.from_reference(c, r));
                basis.values(r, psi.data());
                for (int a = 0; a < n; ++a) coef[a] += w * fv * scale * psi[a];
            }
    }
    return out;
}

DGField project_vector(const Grid& grid, int order, const std::function<Vec2(const Vec2&)>& f, int n_points)
{
    DGField out(grid, order, 2);
    const DGField fx = project(grid, order, [&](const Vec2& p) { return f(p).x(); }, n_points);
    const DGField fy = project(grid, order, [&](const Vec2& p) { return f(p).y(); }, n_points);
    for (int c = 0; c < grid.cell_count(); ++c) {
        auto ox = out.coefficients(c, 0), oy = out.coefficients(c, 1);
        auto sx = fx.coefficients(c), sy = fy.coefficients(c);
        std::copy(sx.begin(), sx.end(), ox.begin());
        std::copy(sy.begin(), sy.end(), oy.begin());
    }
    return out;
}

}  // namespace rdfm
