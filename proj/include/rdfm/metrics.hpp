#pragma once

/**
 * @file metrics.hpp
 * @brief Error norms against exact and reference solutions, slices, and the
 *        one-dimensional series-resistance oracle.
 */

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdfm/darcy.hpp"
#include "rdfm/output.hpp"

namespace rdfm {

enum class ExactCase { SingleFracture, SingleBarrier };

/**
 * @brief Closed-form solutions on [-1,1]^2 with K = I and a line through the
 * origin with tangent (cos theta, sin theta).
 *
 * SingleFracture: p = sin(xi) exp(|eta|), which needs eps*k_f = 2.
 * SingleBarrier: p = (sin - cos) x - (sin + cos) y + H(sin x - cos y), which
 * needs eps/k_eps = 1.
 */
struct ExactSolution {
    ExactCase kind = ExactCase::SingleFracture;
    double theta = 0.0;

    double value(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;
    ScalarFunction trace() const;

    /// Unit normal n and offset d of the line {n.x = d} where p is not smooth.
    Vec2 line_normal() const;

    /// The segment of the case, clipped to [-1,1]^2, with eps = 1e-4.
    Segment segment() const;
    /// Domain, K = I, the segment and Dirichlet data marker (values come from `trace`).
    Scenario scenario() const;
};

enum class Norm { L1, L2 };

/**
 * @brief ||p_h - p|| over the grid with (k+3)-point tensor Gauss rules
 * (or `points` when positive).
 *
 * When `split` = (n, d) is given, cells cut by the line n.x = d are divided
 * along it and each part integrated separately.
 */
double field_error(const DGField& ph, const ScalarFunction& exact, Norm norm,
                   const std::optional<std::pair<Vec2, double>>& split = std::nullopt, int points = 0);

double exact_errors(const DGField& ph, const ExactSolution& exact, Norm norm);

/// Solves the exact-solution problem on each nx = ny = m in `meshes` and measures limited p.
ErrorReport convergence_study(const ExactSolution& exact, const std::vector<int>& meshes, int order,
                              const DarcyOptions& options = {}, const MeshSettings& base = {});

struct Barrier1D {
    double x = 0.0;
    double thickness = 0.0;
    double perm = 0.0;
};

/// Series-resistance solution of u = -k_m p' with pressure drops u*eps/k_eps at barriers.
struct Oracle1D {
    double a = 0.0, b = 1.0;
    double km = 1.0;
    double pa = 1.0, pb = 0.0;
    std::vector<Barrier1D> barriers;
    double u = 0.0;

    /// Pressure at x; at a barrier location the value on the right (x >= x_i counts as past it).
    double pressure(double x) const;
};

Oracle1D oracle_1d(double km, std::vector<Barrier1D> barriers, double pa, double pb, double a, double b);

/// Reference matrix cell: convex polygon and its pressure.
struct ReferenceCell {
    std::vector<Vec2> polygon;
    double value = 0.0;
};

/// Reference 1D element on a fracture or barrier.
struct ReferenceElement {
    Vec2 a, b;
    double value = 0.0;
};

struct ReferenceData {
    std::vector<ReferenceCell> cells;
    std::vector<ReferenceElement> elements;
    std::optional<double> delta_p;  ///< from a `# delta_p=<v>` header line
};

/// Rows `nverts,x1,y1,...,xn,yn,value`; blank lines and `#` comments skipped.
ReferenceData read_reference_matrix(const std::string& path);
/// Rows `x1,y1,x2,y2,value`.
std::vector<ReferenceElement> read_reference_fractures(const std::string& path);

struct BenchmarkErrors {
    double err_m = 0.0;
    double err_f = 0.0;          ///< NaN without reference elements
    double delta_p = 0.0;
    double coverage_gap = 0.0;   ///< |Omega| minus the covered area, relative to |Omega|
    std::vector<std::string> warnings;
};

/**
 * @brief Relative L2 differences on matrix and lines.
 *
 * The matrix term sums overlap areas of reference polygons with grid cells,
 * sampling p_h at each overlap centroid. The line term splits each reference
 * element at grid lines and samples the trace average {p_h} at piece midpoints.
 * `delta_p` <= 0 falls back to the header value, then to max - min of the
 * reference cell values.
 */
BenchmarkErrors benchmark_errors(const DGField& ph, const ReferenceData& reference, double delta_p = 0.0);

/// Convex polygon clipped to an axis-aligned box (Sutherland-Hodgman).
std::vector<Vec2> clip_polygon(const std::vector<Vec2>& polygon, const Vec2& lower, const Vec2& upper);
double polygon_area(const std::vector<Vec2>& polygon);
Vec2 polygon_centroid(const std::vector<Vec2>& polygon);

/**
 * @brief n equispaced samples (arclength, p_h) from p0 to p1.
 *
 * A sample within 1e-12 (relative) of a cell interface is taken from the cell
 * on the p0 side. Throws std::invalid_argument when the line leaves the domain.
 */
std::vector<std::pair<double, double>> slice(const DGField& ph, const Vec2& p0, const Vec2& p1, int n);

}  // namespace rdfm
