#pragma once

#include <utility>
#include <vector>

#include "untrim/trimesh.hpp"

namespace untrim {

enum class VertexConstraint : char {
    Free,     // interior, direction determined by optimization
    Tangent,  // non-corner boundary/crease vertex: direction is +-dir
    Fixed     // corner: direction pinned to one incident feature edge
};

/// Per-vertex alignment constraints derived from the boundary polylines and
/// interior sharp creases. Creases are treated like boundaries for both
/// fields; where a vertex is on both, the boundary wins.
struct FieldConstraints {
    std::vector<VertexConstraint> kind;
    std::vector<Vector3d> dir;          // unit constraint direction (Tangent/Fixed)
    std::vector<char> on_boundary;
    std::vector<char> on_crease;
    std::vector<std::array<int, 2>> curve_segments;    // boundary + crease edges
    std::vector<char> segment_boundary;                // boundary segment (crease otherwise);
                                                       // boundary segments run with the surface on the left
    std::vector<std::vector<int>> vertex_segments;     // per vertex: nearby segment ids
    std::vector<char> near_curve;                      // within graph distance 2 of a constraint curve

    bool constrained(int v) const { return kind[v] != VertexConstraint::Free; }
};

/// Dihedral-angle crease detection on the input triangle mesh: interior edges
/// whose adjacent face normals form an angle above phi.
std::vector<char> detect_sharp_edges_tri(const TriMesh& m, double phi);

/// Boundary corner classification. A boundary vertex is a corner iff the
/// internal surface angle at it lies in (0, pi-theta] or [pi+theta, 2pi).
/// Throws if queried for an interior vertex via internal_angle().
std::vector<char> classify_corners(const TriMesh& m, double theta);
double internal_angle(const TriMesh& m, int v);

FieldConstraints build_field_constraints(const TriMesh& m, double theta,
                                         const std::vector<char>& sharp_edges = {});

struct OrientationState {
    std::vector<Vector3d> o;       // representative directions, unit, in tangent planes
    std::vector<Vector3d> n;       // vertex normals
    std::vector<char> corner_flags;
    double theta = kPi / 4;
    double omega = 1.0;            // uniform edge weight
    FieldConstraints constraints;

    /// Random tangent-plane initialization; constrained vertices prescribed.
    static OrientationState init(const TriMesh& m, const FieldConstraints& c, uint64_t rng_seed);
};

/// o rotated counterclockwise by k*pi/2 about n. Throws if |o.n| > 1e-6.
Vector3d rotate_cross(const Vector3d& o, const Vector3d& n, int k);

/// Integers in {0..3} minimizing the angle between the rotated representatives.
/// Ties pick the smallest k_ji, then the smallest k_ij, which matches a brute
/// force scan in that order.
std::pair<int, int> best_rotation_pair(const Vector3d& oi, const Vector3d& ni,
                                       const Vector3d& oj, const Vector3d& nj);

/// Smoothness energy, summed over both directions of every edge with the
/// per-pair optimal rotations.
double orientation_energy(const TriMesh& m, const OrientationState& s);

/// Local Gauss-Seidel sweeps (boundary vertices first, then interior, both in
/// ascending index order), constraints re-imposed after every update.
/// Stops early when the largest per-vertex angular change drops below
/// exit_change_tol (pass 0 to always run all iters).
OrientationState optimize_orientation(const TriMesh& m, OrientationState state, int iters,
                                      uint64_t rng_seed, double exit_change_tol = 1e-4);

/// Rewrites each representative by a multiple of pi/2 about its normal so
/// adjacent representatives agree except across singularities (breadth-first
/// from vertex 0 of the largest component). Constrained vertices only flip sign.
OrientationState match_fields(const TriMesh& m, OrientationState state);

/// Per-triangle rotational index of the matched field: the mod-4 sum of
/// rotation mismatches around the face. Nonzero entries only.
std::vector<std::pair<int, int>> orientation_singularities(const TriMesh& m,
                                                           const OrientationState& s);

/// Fractional index of a mod-4 face index (1 -> +1/4, 3 -> -1/4, 2 -> 1/2).
double fractional_index(int mod4_index);

}  // namespace untrim
