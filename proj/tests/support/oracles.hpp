#pragma once

#include <utility>
#include <vector>

#include "untrim/orientation_field.hpp"
#include "untrim/position_field.hpp"
#include "untrim/trimesh.hpp"

namespace untrim {
struct QuadMesh;
}

namespace oracle {

using namespace untrim;

/// Brute force over all 16 (k_ij, k_ji) pairs, scanning k_ji before k_ij so
/// ties resolve exactly like the library.
std::pair<int, int> best_rotation_pair_bruteforce(const Vector3d& oi, const Vector3d& ni,
                                                  const Vector3d& oj, const Vector3d& nj);

/// Brute force over t in {-range..range}^2 for both translations.
std::pair<Vector2i, Vector2i> best_translation_bruteforce(const Vector3d& pi, const Vector3d& ni,
                                                          const Vector3d& oi, const Vector3d& pj,
                                                          const Vector3d& nj, const Vector3d& oj,
                                                          double rho, int range = 2);

/// Connected components of the boundary-edge graph (loop count oracle).
int boundary_component_count(const TriMesh& m);

/// Sum of fractional orientation singularity indices expected from the
/// discrete Gauss-Bonnet / Poincare-Hopf identity: chi minus the quarter-turn
/// content of the boundary corners.
double expected_index_sum(const TriMesh& m);

/// Number of quad patches found by flood fill that does not cross separatrix
/// edges; used to cross-check extract_patches and the simplification claims.
int flood_fill_patch_count(const QuadMesh& q, const std::vector<char>& separatrix_edge);

/// Exhaustive minimal-L1 repair of the offset constraints for tiny meshes;
/// returns the optimal corrected offsets or throws if none exists within
/// the search radius.
EdgeOffsets enforce_constraints_bruteforce(const TriMesh& m, const EdgeOffsets& off,
                                           const FreezeMask& mask, int radius = 1);

}  // namespace oracle
