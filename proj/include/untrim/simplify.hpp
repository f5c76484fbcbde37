#pragma once

#include <optional>
#include <string>

#include "untrim/layout.hpp"
#include "untrim/quadmesh.hpp"
#include "untrim/trimesh.hpp"

namespace untrim {

class AabbTree;

enum class EpPattern : char { ThreeFive, FiveFive, ThreeThreeFive, ThreeFiveFive, ThreeThree, Other };

struct ClusteredEp {
    int face;
    EpPattern pattern;
    int slot_a, slot_b;  // the adjacent EP pair chosen for collapsing (3-5 first when present)
};

/// Faces whose corners hold more than one adjacent interior EP. Diagonal
/// pairs are excluded (zip-patch territory).
std::vector<ClusteredEp> find_clustered_eps(const QuadMesh& q);

struct CollapseResult {
    bool ok = false;
    std::string reason;   // why it was refused
    QuadMesh mesh;        // valid when ok
    int removed_faces = 0;
};

/// Collapses the edge at `slot` of `face` together with its whole
/// perpendicular quad strip, merging every parallel edge pair; valences
/// follow alpha+beta-4. Refuses collapses that would produce an invalid
/// vertex or move corners/sharp features off their lines.
CollapseResult collapse_adjacent(const QuadMesh& q, int face, int slot);

/// Case 3-3-5 / 3-5-5: collapses the adjacent 3-5 pair; the strip's opposite
/// pair absorbs the remaining EP per the alpha+beta-4 rule.
CollapseResult collapse_triple(const QuadMesh& q, const ClusteredEp& c);

/// Patches whose diagonally opposite corners are interior EPs not joined by
/// a separatrix.
std::vector<int> find_zip_patches(const QuadMesh& q, const PatchLayout& layout);

/// Removes a zip patch by collapsing its short side (and the propagated
/// strip) toward the diagonal; EP valences stay unchanged. Refused when the
/// long side is sharp or lies on the boundary.
CollapseResult collapse_zip(const QuadMesh& q, const PatchLayout& layout, int patch);

struct SimplifyConfig {
    int max_iters = 20;
    double sharp_phi = kPi / 3;
    const TriMesh* reproject = nullptr;  // optional input surface for repositioning
};

struct SimplifyReport {
    int patches_before = 0;
    int patches_after = 0;
    int eps_before = 0;
    int eps_after = 0;
    int cluster_collapses = 0;
    int zip_collapses = 0;
    std::vector<std::string> refused;  // unhandled patterns, reported and left intact
    bool hit_iteration_cap = false;
};

std::pair<QuadMesh, PatchLayout> simplify(QuadMesh q, const SimplifyConfig& config,
                                          SimplifyReport* report = nullptr);

}  // namespace untrim
