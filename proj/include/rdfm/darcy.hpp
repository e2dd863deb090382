#pragma once

/**
 * @file darcy.hpp
 * @brief LDG discretization of hybrid-dimensional Darcy flow with embedded
 *        fractures and barriers.
 *
 * Unknowns per cell, in this order: s_x, s_y, u_x, u_y, p, each a block of
 * (k+1)^2 basis coefficients (s = -grad p, u the Darcy velocity). Equation
 * rows use the same layout: the s rows hold the definition of s, the u rows
 * the Darcy law with line terms, the p rows mass conservation.
 */

#include <functional>
#include <optional>
#include <vector>

#include "rdfm/dg.hpp"
#include "rdfm/geometry.hpp"
#include "rdfm/sparse.hpp"

namespace rdfm {

using ScalarFunction = std::function<double(const Vec2&)>;

struct DarcyOptions {
    ClassifyOptions classify;
    SolveOptions solver;
    std::optional<PenaltySchedule> penalties;  ///< overrides the scenario schedule
    ScalarFunction dirichlet;  ///< overrides the constant p_D on Dirichlet sides
    ScalarFunction source;     ///< overrides the constant scenario source
    bool limit = true;
    bool condense = true;  ///< eliminate cell-local blocks before solving
    bool symmetric_form = true;  ///< with condense: use the quasi-definite path when admissible
    /// Segments lying on a grid line contribute their line terms half to each adjacent cell.
    bool aligned_average = false;
    /// Extra correction solves against the full system residual (costs one solve each).
    int refine_steps = 0;
    std::uint64_t seed = 20240611;
};

/// Geometry and penalties for one mesh.
struct DarcySetup {
    Mesh mesh;
    Clipping clipping;
    EdgeFlags flags;
    int order = 1;
    double alpha = 1.0;
    double beta = 1.0;
    Mat2 perm = Mat2::Identity();
    std::array<BoundaryCondition, 4> boundary{};
    ScalarFunction dirichlet;  ///< p_D(x); empty: constant side values
    ScalarFunction source;     ///< f(x); empty: constant `source_value`
    double source_value = 0.0;
    bool aligned_average = false;

    double pd(Side side, const Vec2& x) const;
    double f(const Vec2& x) const { return source ? source(x) : source_value; }
    /// Whether the cell has any face carrying the [u] penalty.
    bool has_flagged_face(int cell) const;
};

DarcySetup prepare(const Scenario& scenario, const MeshSettings& mesh, const DarcyOptions& options = {});

/// Index of unknown (cell, field, basis a); field 0..4 = s_x, s_y, u_x, u_y, p.
inline int dof_index(int n, int cell, int field, int a) { return (5 * cell + field) * n + a; }

/// True unless some cell holds both barrier and fracture line terms.
bool admits_symmetric_form(const DarcySetup& setup);

/**
 * Assembles the global system. With `symmetric_form` the u rows of each cell
 * are multiplied by the inverse of their (negated) own-s block and the p rows
 * are negated; the solution is unchanged, but eliminating s (and u away from
 * flagged faces) then leaves a symmetric quasi-definite system.
 */
LinearSystem assemble(const DarcySetup& setup, bool symmetric_form = false);

struct LimiterReport {
    std::vector<int> cells;      ///< cells the limiter ran on
    std::vector<double> theta;   ///< per limited cell
};

struct FluxDiagnostics {
    std::vector<double> cell_residual;  ///< |int_T f - int_dT u_hat.n| per cell
    std::vector<double> edge_jump;      ///< int_e |[u]| of the raw field per interior edge
    double max_cell_residual = 0.0;
};

struct SolveStats {
    int unknowns = 0;
    int reduced_unknowns = 0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    SolveMethod method = SolveMethod::Direct;
};

struct DarcySolution {
    DarcySetup setup;
    DGField s;
    DGField u;
    DGField p;
    DGField limited_p;
    LimiterReport limiter;
    FluxDiagnostics diagnostics;
    SolveStats stats;

    const Mesh& mesh() const { return setup.mesh; }

    /// Numerical normal flux u_hat.n on interior edge `edge` at x, n pointing from minus to plus.
    double interior_flux(int edge, const Vec2& x) const;
    /// Numerical outward flux u_hat.n on boundary edge `edge` at x.
    double boundary_flux(int edge, const Vec2& x) const;
};

DarcySolution solve_darcy(const Scenario& scenario, const MeshSettings& mesh, const DarcyOptions& options = {});
inline DarcySolution solve_darcy(const Scenario& scenario, const DarcyOptions& options = {})
{
    return solve_darcy(scenario, scenario.mesh, options);
}

/// Solves a prepared setup (used by callers that alter geometry or penalties directly).
DarcySolution solve_darcy(DarcySetup setup, const DarcyOptions& options = {});

/// Cells containing an active barrier piece whose faces all lack the [p] penalty.
std::vector<int> limiter_cells(const DarcySetup& setup);

/**
 * @brief Scales p toward its cell mean on the listed cells so that vertex
 * values stay within the range of the cell averages around each vertex.
 */
DGField apply_limiter(const DGField& p, const Mesh& mesh, const std::vector<int>& cells,
                      std::vector<double>* theta = nullptr);

FluxDiagnostics flux_diagnostics(const DarcySolution& solution);

}  // namespace rdfm
