#pragma once

#include "untrim/orientation_field.hpp"
#include "untrim/position_field.hpp"

namespace untrim {

/// Vertex-clustering multiresolution used to seed both field solvers. The
/// coarse levels smooth out the metastable states plain sweeps can lock into
/// (wrong lattice column counts, stuck 45-degree orientation saddles);
/// per-level solves then only do local cleanup.
struct SolverHierarchy {
    struct Level {
        std::vector<Vector3d> pos, normal;
        std::vector<VertexConstraint> kind;
        std::vector<Vector3d> dir;
        std::vector<int> nbr_off, nbr;  // CSR adjacency
        std::vector<int> to_coarse;     // vertex -> coarser-level vertex (empty at the top)
        int n() const { return int(pos.size()); }
    };
    std::vector<Level> levels;  // [0] is the mesh itself

    static SolverHierarchy build(const TriMesh& m, const OrientationState& seed_state,
                                 int min_vertices = 48);
};

struct FieldSolveOptions {
    bool use_hierarchy = true;
    int iters = 60;           // sweeps at the mesh level
    int coarse_iters = 120;   // sweeps per coarse level
    double exit_tol = 1e-10;  // early-exit threshold at the mesh level
};

/// Orientation solve: random seeded init, coarse-to-fine when enabled,
/// followed by mesh-level optimize_orientation and field matching.
OrientationState solve_orientation(const TriMesh& m, const FieldConstraints& fc, uint64_t seed,
                                   const FieldSolveOptions& opts = {});

/// Position solve seeded the same way; ends with the mesh-level
/// optimize_position (rounding sweeps plus consensus).
LatticeState solve_position(const TriMesh& m, const OrientationState& orient, double rho,
                            double gamma, uint64_t seed, const FieldSolveOptions& opts = {});

}  // namespace untrim
