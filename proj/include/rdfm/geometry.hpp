#pragma once

/**
 * @file geometry.hpp
 * @brief Segment geometry on the rectangular mesh.
 *
 * Pipeline: local_frame -> clip_segments (alignment perturbation + per-cell
 * split) -> resolve_intersections (fracture/barrier dominance per cell) ->
 * classify_barrier_edges (which interior edges switch their numerical flux
 * penalty from [p] to [u]).
 */

#include <cstdint>
#include <vector>

#include "rdfm/mesh.hpp"
#include "rdfm/scenario.hpp"

namespace rdfm {

/**
 * @brief Tangent/normal frame of a segment.
 *
 * xi = nu . x and eta = sigma . x; the segment is {eta = eta0, xi1 <= xi <= xi2}.
 * theta is canonicalised to (-pi/2, pi/2].
 */
struct LocalFrame {
    double theta = 0.0;
    Vec2 nu = Vec2(1.0, 0.0);
    Vec2 sigma = Vec2(0.0, 1.0);
    double xi1 = 0.0;
    double xi2 = 0.0;
    double eta0 = 0.0;

    double xi(const Vec2& p) const { return nu.dot(p); }
    double eta(const Vec2& p) const { return sigma.dot(p); }
    Vec2 point(double xi_value) const { return xi_value * nu + eta0 * sigma; }
};

/// Throws std::invalid_argument for a zero-length segment.
LocalFrame local_frame(const Segment& segment);

/// A segment after the alignment check, possibly shifted off a grid line.
struct PlacedSegment {
    Segment original;
    Segment placed;
    LocalFrame frame;  ///< frame of the placed segment
    bool aligned = false;
    Axis line_axis = Axis::X;  ///< X: the segment runs along a vertical grid line x = const
    double grid_line = 0.0;
    double shift = 0.0;  ///< signed offset applied normal to the grid line
};

struct ClippedPiece {
    int cell = -1;
    int segment = -1;
    Vec2 a, b;
    bool active = true;

    double length() const { return (b - a).norm(); }
};

struct Clipping {
    std::vector<PlacedSegment> segments;
    std::vector<ClippedPiece> pieces;  ///< ordered by (segment, position along segment)

    SegmentKind kind(const ClippedPiece& p) const { return segments[p.segment].placed.kind; }
};

/**
 * @brief Split every segment at cell boundaries.
 *
 * Segments within align_tol*h of a grid line are first moved off it by
 * perturb*h; the direction is drawn from a generator seeded with `seed` and
 * the segment index, and flipped when it would leave the domain. Pieces
 * shorter than 1e-14*h are dropped.
 */
Clipping clip_segments(const Mesh& mesh, const std::vector<Segment>& segments, double align_tol, double perturb,
                       std::uint64_t seed = 20240611);

/**
 * @brief Deactivate, per cell, the lower-priority piece of every intersecting
 * fracture/barrier pair.
 *
 * Throws std::invalid_argument when such a pair has equal priorities.
 */
void resolve_intersections(Clipping& clipping);

struct ClassifyOptions {
    /// Barriers lying on a grid line penalise [u] only on that line.
    bool aligned_adaptation = true;
};

struct EdgeFlags {
    std::vector<std::uint8_t> barrier_mode;  ///< per interior edge
    std::vector<std::uint8_t> aligned;       ///< per interior edge: an aligned barrier lies on it

    bool flagged(int edge) const { return barrier_mode[edge] != 0; }
    int count() const;
};

EdgeFlags classify_barrier_edges(const Mesh& mesh, const Clipping& clipping, const ClassifyOptions& options = {});

/// Cells holding at least one active piece of the given kind.
std::vector<std::uint8_t> cells_with(const Mesh& mesh, const Clipping& clipping, SegmentKind kind);

}  // namespace rdfm
