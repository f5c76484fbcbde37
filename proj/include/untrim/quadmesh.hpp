#pragma once

#include <array>
#include <vector>

#include "untrim/math.hpp"

namespace untrim {

enum class QuadVertexTag : char { InteriorRegular, InteriorEP, BoundaryRegular, Corner, BoundaryEP };

/// Indexed all-quad mesh. Halfedge h = 4*f + c runs from faces[f][c] to
/// faces[f][(c+1)%4]. Immutable after build(); collapses produce new meshes.
struct QuadMesh {
    std::vector<Vector3d> positions;
    std::vector<std::array<int, 4>> faces;

    std::vector<int> twin;
    std::vector<int> v2h;
    std::vector<char> vert_boundary;
    std::vector<int> valence;
    std::vector<int> he_edge;
    std::vector<std::array<int, 2>> edges;
    std::vector<char> edge_sharp;  // per undirected edge, set by detect_sharp_edges
    std::vector<QuadVertexTag> tag;

    int n_vertices() const { return int(positions.size()); }
    int n_faces() const { return int(faces.size()); }
    int n_halfedges() const { return int(faces.size()) * 4; }
    int n_edges() const { return int(edges.size()); }

    int he_face(int h) const { return h / 4; }
    int he_from(int h) const { return faces[h / 4][h % 4]; }
    int he_to(int h) const { return faces[h / 4][(h % 4 + 1) % 4]; }
    int he_next(int h) const { return h - h % 4 + (h % 4 + 1) % 4; }
    int he_prev(int h) const { return h - h % 4 + (h % 4 + 3) % 4; }
    bool he_boundary(int h) const { return twin[h] < 0; }

    void build();

    /// Classifies vertices; corner_theta is the boundary turn threshold.
    void compute_tags(double corner_theta = kPi / 4);

    /// Outgoing halfedges around v in fan order (boundary fans start at the
    /// boundary halfedge).
    std::vector<int> outgoing_halfedges(int v) const;
    std::vector<int> vertex_ring(int v) const;

    bool is_extraordinary(int v) const {
        return tag[v] == QuadVertexTag::InteriorEP || tag[v] == QuadVertexTag::BoundaryEP;
    }

    Vector3d face_normal(int f) const;
    double mean_edge_length() const;

    /// Sum over vertices of (4 - valence) for interior, (3 - valence)?  No:
    /// plain closed-mesh identity sum, Σ_v (4 - valence(v)).
    int index_sum_closed() const;

    /// Boundary-adjusted index: Σ_interior (4 - val) + Σ_boundary (3 - val)
    /// minus corner defects is handled by callers; this returns the two parts.
    void index_sums(int& interior, int& boundary) const;
};

int euler_characteristic(const QuadMesh& m);

/// Per-quad scaled Jacobian (min over the four corners of the normalized
/// corner cross product against the face normal).
double scaled_jacobian(const QuadMesh& m, int f);

struct QuadQualityReport {
    double min_scaled_jacobian = 0;
    double mean_scaled_jacobian = 0;
    double min_edge_ratio = 0;  // edge length / rho
    double max_edge_ratio = 0;
    double mean_edge_ratio = 0;
    int ep_count = 0;
    std::vector<std::pair<int, int>> valence_histogram;  // (valence, count), interior vertices
};

QuadQualityReport quad_quality_report(const QuadMesh& m, double rho);

}  // namespace untrim
