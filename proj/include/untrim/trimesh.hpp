#pragma once

#include <array>
#include <string>
#include <vector>

#include "untrim/math.hpp"

namespace untrim {

/// One closed loop of the mesh boundary, oriented with the surface on the left.
struct BoundaryLoop {
    std::vector<int> vertices;        // cyclic order
    std::vector<Vector3d> tangents;   // unit, per vertex, along the loop direction
    std::vector<char> corner;         // filled by corner classification (theta-dependent)
};

/// Indexed triangle mesh with directed-edge (halfedge) adjacency.
/// Halfedge h = 3*f + c runs from faces[f][c] to faces[f][(c+1)%3].
/// Immutable after build(); all repair/remesh operations return a new mesh.
struct TriMesh {
    std::vector<Vector3d> positions;
    std::vector<std::array<int, 3>> faces;

    // adjacency, filled by build()
    std::vector<int> twin;            // opposite halfedge, -1 on boundary
    std::vector<int> v2h;             // an outgoing halfedge per vertex (boundary one if any), -1 isolated
    std::vector<char> vert_boundary;  // vertex lies on a boundary edge
    std::vector<int> he_edge;         // halfedge -> undirected edge id
    std::vector<std::array<int, 2>> edges;  // undirected edges as (min,max) vertex pairs

    int n_vertices() const { return int(positions.size()); }
    int n_faces() const { return int(faces.size()); }
    int n_halfedges() const { return int(faces.size()) * 3; }
    int n_edges() const { return int(edges.size()); }

    int he_face(int h) const { return h / 3; }
    int he_from(int h) const { return faces[h / 3][h % 3]; }
    int he_to(int h) const { return faces[h / 3][(h % 3 + 1) % 3]; }
    int he_next(int h) const { return h - h % 3 + (h % 3 + 1) % 3; }
    int he_prev(int h) const { return h - h % 3 + (h % 3 + 2) % 3; }
    bool he_boundary(int h) const { return twin[h] < 0; }

    /// Builds twin/v2h/edge tables. Throws on non-manifold or inconsistently
    /// oriented input (an ordered edge used twice, or an edge with >2 faces).
    void build();

    /// One-ring neighbor vertices of v, in fan order (boundary fans start at
    /// the boundary halfedge). Requires build().
    std::vector<int> vertex_ring(int v) const;

    /// Every halfedge of the outgoing fan of v, fan-ordered like vertex_ring.
    std::vector<int> outgoing_halfedges(int v) const;

    bool has_bowtie(int v) const;

    Vector3d face_normal(int f) const;
    double face_area(int f) const;
    double mean_edge_length() const;
    Eigen::AlignedBox3d bounding_box() const;
};

int euler_characteristic(const TriMesh& m);

/// Angle-weighted vertex normals, unit length.
/// Throws if a vertex is isolated or all its incident faces are degenerate.
std::vector<Vector3d> vertex_normals(const TriMesh& m);

/// Extracts all boundary loops, oriented with the surface on the left.
/// Non-corner tangents are the normalized sum of the two incident boundary
/// edge directions weighted by inverse edge length. Corner flags are left
/// false here; classify_corners() fills them.
std::vector<BoundaryLoop> boundary_loops(const TriMesh& m);

/// Uniform 1:4 midpoint subdivision (no smoothing).
TriMesh subdivide_midpoint(const TriMesh& m, int levels);

}  // namespace untrim
