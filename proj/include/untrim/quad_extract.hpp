#pragma once

#include "untrim/position_field.hpp"
#include "untrim/quadmesh.hpp"

namespace untrim {

class AabbTree;

/// Union-find clustering of mesh vertices over zero-offset edges. Each
/// cluster is one quad-mesh vertex.
struct ClusterMap {
    std::vector<int> vertex_cluster;  // mesh vertex -> cluster id
    std::vector<Vector3d> position;   // mean of member origins
    std::vector<Vector3d> normal;     // unit mean of member normals
    std::vector<char> boundary;       // any member on the boundary
    std::vector<char> corner;         // contains a corner member
    std::vector<int> anchor;          // lowest member vertex id

    int n_clusters() const { return int(position.size()); }
};

/// Clusters vertices whose connecting edges carry d = (0,0).
/// Throws if a cluster captures two distinct corners (rho too coarse).
ClusterMap cluster_vertices(const TriMesh& m, const OrientationState& orient,
                            const LatticeState& lattice, const EdgeOffsets& offsets);

/// Assembles the all-quad mesh: clusters become vertices, unit offsets become
/// edges, quads are the length-4 faces of the angular rotation system.
/// Cluster positions are reprojected onto the input surface (boundary
/// clusters onto the boundary polyline, corners pinned exactly).
/// Throws on non-quad interior cycles, fold-overs, or coarse-resolution
/// failures (offsets beyond one lattice step).
QuadMesh build_quads(const TriMesh& m, const OrientationState& orient, const LatticeState& lattice,
                     const EdgeOffsets& offsets, const ClusterMap& clusters);

}  // namespace untrim
