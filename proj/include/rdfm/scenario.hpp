#pragma once

/**
 * @file scenario.hpp
 * @brief Problem description for hybrid-dimensional Darcy flow and transport.
 *
 * A scenario is read from a sectioned key-value text file:
 *
 *   [domain]    x0= y0= x1= y1=
 *   [matrix]    kxx= kxy= kyy= source=
 *   [mesh]      nx= ny= order= align_tol= perturb=
 *   [segments]  kind x1 y1 x2 y2 thickness perm priority   (one per line)
 *   [boundary]  left= right= top= bottom=   ("dirichlet <v>" | "neumann <v>")
 *   [penalty]   alpha_coeff= alpha_exp= beta_coeff= beta_exp=
 *   [transport] phi= d0= c_in= c_inject= c0= cfl= end_pvi= snapshots=
 *
 * Lines starting with '#' are comments.
 */

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rdfm {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Raised for any malformed or invalid scenario; the message names the line or field.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SegmentKind { Fracture, Barrier };

std::string_view to_string(SegmentKind kind);

/**
 * @brief One fracture or barrier line.
 *
 * For a fracture `perm` is the tangential permeability k_f; for a barrier it
 * is the normal permeability k_eps. Priority decides which one survives in a
 * cell where a fracture and a barrier intersect.
 */
struct Segment {
    SegmentKind kind = SegmentKind::Fracture;
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();
    double thickness = 0.0;
    double perm = 0.0;
    int priority = 0;

    double length() const { return (b - a).norm(); }

    /// eps*k_f for fractures (conductance), eps/k_eps for barriers (resistance).
    double strength() const
    {
        return kind == SegmentKind::Fracture ? thickness * perm : thickness / perm;
    }

    bool operator==(const Segment&) const = default;
};

enum class Side { Left = 0, Right = 1, Bottom = 2, Top = 3 };

std::string_view to_string(Side side);

enum class BoundaryType { Dirichlet, Neumann };

/// Dirichlet value p_D or Neumann value q_N = u.n (outward normal flux).
struct BoundaryCondition {
    BoundaryType type = BoundaryType::Dirichlet;
    double value = 0.0;

    bool operator==(const BoundaryCondition&) const = default;
};

struct Domain {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains(const Vec2& p, double tol = 1e-12) const;

    bool operator==(const Domain&) const = default;
};

/// alpha = alpha_coeff * h^(-alpha_exp), beta = beta_coeff * h^(-beta_exp).
struct PenaltySchedule {
    double alpha_coeff = 1.0;
    double alpha_exp = 1.0;
    double beta_coeff = 1.0;
    double beta_exp = 1.0;

    double alpha(double h) const;
    double beta(double h) const;

    bool operator==(const PenaltySchedule&) const = default;
};

/**
 * @brief Mesh resolution and geometry tolerances.
 *
 * align_tol and perturb are multiples of the cell size h.
 */
struct MeshSettings {
    int nx = 10;
    int ny = 10;
    int order = 1;
    double align_tol = 1e-9;
    double perturb = 1e-8;

    bool operator==(const MeshSettings&) const = default;
};

struct TransportParams {
    double phi = 0.2;
    double d0 = 0.0;  ///< D = d0 * |u|
    double c_in = 1.0;
    double c_inject = 0.0;
    double c0 = 0.0;
    double cfl = 0.1;
    double end_pvi = 1.0;
    std::vector<double> snapshots;

    bool operator==(const TransportParams&) const = default;
};

struct Scenario {
    Domain domain;
    Mat2 matrix_perm = Mat2::Identity();
    double source = 0.0;
    MeshSettings mesh;
    std::vector<Segment> segments;
    std::array<BoundaryCondition, 4> boundary{};  ///< indexed by Side
    std::optional<PenaltySchedule> penalties;     ///< empty: defaults apply
    std::optional<TransportParams> transport;
    std::vector<std::string> notes;  ///< non-fatal remarks, e.g. pure-Neumann setups

    const BoundaryCondition& bc(Side side) const { return boundary[static_cast<int>(side)]; }
    BoundaryCondition& bc(Side side) { return boundary[static_cast<int>(side)]; }

    bool has_fractures() const;
    bool has_barriers() const;

    /// Explicit schedule, or alpha = h^-3 (any fracture) / h^-1, beta = h^-1.
    PenaltySchedule effective_penalties() const;

    bool operator==(const Scenario& other) const;
};

/// Throws ScenarioError naming the offending field.
void validate(Scenario& scenario);

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& scenario);

}  // namespace rdfm
