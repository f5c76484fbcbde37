#pragma once

#include <utility>
#include <vector>

#include "untrim/orientation_field.hpp"
#include "untrim/trimesh.hpp"

namespace untrim {

/// Per-vertex lattice origins plus the grid spacing.
struct LatticeState {
    std::vector<Vector3d> p;   // lattice origins, within rho of their vertex
    double rho = 0;            // grid spacing
    double gamma = 1.4;        // rho / mean input edge length

    /// Origins start at the vertices, perturbed inside the tangent plane;
    /// corner origins are pinned to their vertex.
    static LatticeState init(const TriMesh& m, const OrientationState& orient, double rho,
                             double gamma, uint64_t rng_seed);
};

/// Integer offsets and frame rotations per undirected edge, stored for the
/// canonical direction edges[e][0] -> edges[e][1].
struct EdgeOffsets {
    std::vector<Vector2i> d;
    std::vector<std::pair<int, int>> k;  // (k_uv, k_vu) for the canonical direction

    /// d for the directed edge (from -> to); the reverse offset is
    /// -R2(k_vu, k_uv) * d_uv.
    Vector2i directed(const TriMesh& m, int edge, int from) const;
    Matrix2i transport(const TriMesh& m, int edge, int to_frame_of) const;
};

/// Freeze mask per undirected edge component; frozen components stay zero.
using FreezeMask = std::vector<std::array<char, 2>>;

/// Gamma(p, n, o, t) = p + rho (t0 o + t1 R(n,1) o).
Vector3d lattice_point(const Vector3d& p, const Vector3d& n, const Vector3d& o,
                       const Vector2i& t, double rho);

/// Integer translations minimizing the distance between the matched lattice
/// points, searched over the floor/ceil neighborhood of the real minimizer.
/// Ties pick the lexicographically smallest (t_ij, t_ji).
std::pair<Vector2i, Vector2i> best_translation_pair(const Vector3d& pi, const Vector3d& ni,
                                                    const Vector3d& oi, const Vector3d& pj,
                                                    const Vector3d& nj, const Vector3d& oj,
                                                    double rho);

double position_energy(const TriMesh& m, const OrientationState& orient, const LatticeState& s);

/// Gauss-Seidel sweeps with the lattice rounding step and the two boundary
/// conditions (origins of boundary vertices move along the boundary, corners
/// stay put, near-boundary interior origins may not cross the boundary).
/// Stops early when the largest origin move drops below exit_tol * rho.
LatticeState optimize_position(const TriMesh& m, const OrientationState& orient, LatticeState state,
                               int iters, uint64_t rng_seed, double exit_tol = 1e-9);

/// d_ij = t_ij - R2(k_ij, k_ji) t_ji for every edge of the converged state.
EdgeOffsets compute_integer_offsets(const TriMesh& m, const OrientationState& orient,
                                    const LatticeState& s);

/// Clamp step for offsets of boundary/crease edges whose two components are
/// both nonzero: the component less aligned with the actual origin
/// displacement is zeroed. Returns the number of clamped edges.
int project_boundary_offsets(const TriMesh& m, const OrientationState& orient,
                             const LatticeState& s, EdgeOffsets& off,
                             const std::vector<char>& sharp_edges = {});

/// Freeze rule for offsets on boundary (and crease) edges: (0,0) freezes both
/// components, (m,0) freezes the second, (0,n) the first. Throws if such an
/// offset has two nonzero components.
FreezeMask freeze_boundary_offsets(const TriMesh& m, const EdgeOffsets& off,
                                   const std::vector<char>& sharp_edges = {});

Vector2i face_cycle_sum(const TriMesh& m, const EdgeOffsets& off, int f);
bool face_consistent(const TriMesh& m, const EdgeOffsets& off, int f);  // det >= 0

/// Greedy minimal-change repair: triangles ordered by violation, one free
/// component changed by +-1 at a time (defect units routed along dual paths
/// to a cancelling face or an absorbing boundary edge), until every triangle
/// satisfies the zero-cycle and non-fold-over constraints. Throws when an
/// infeasible triangle is met or the step budget (50 |F|) runs out.
EdgeOffsets enforce_offset_constraints(const TriMesh& m, EdgeOffsets off, const FreezeMask& mask);

/// Gauge cleanup: re-anchors each vertex's lattice origin by whole steps to
/// minimize the total |d|. Cycle sums are invariant and frozen components are
/// never touched; clustering becomes geometrically sane after heavy routing.
/// Returns the number of vertex moves applied.
int normalize_offsets(const TriMesh& m, EdgeOffsets& off, const FreezeMask& mask);

/// Triangles whose rotated cycle sum is nonzero.
std::vector<int> position_singularities(const TriMesh& m, const EdgeOffsets& off);

/// Re-solves the origins with the integer structure implied by d held fixed;
/// boundary conditions re-imposed, no rounding.
LatticeState recompute_positions(const TriMesh& m, const OrientationState& orient,
                                 LatticeState state, const EdgeOffsets& d_star, int iters = 30);

}  // namespace untrim
