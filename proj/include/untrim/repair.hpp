#pragma once

#include <vector>

#include "untrim/trimesh.hpp"

namespace untrim {

struct RepairReport {
    int merged_vertex_pairs = 0;
    int split_edges = 0;
    int filled_gaps = 0;
    int gap_fill_triangles = 0;
    double tolerance_used = 0;
    int skipped_merges = 0;                       // pairs refused to keep the mesh manifold
    std::vector<int> unfilled_loops;              // loop sizes left open (true boundaries or bad holes)

    RepairReport& operator+=(const RepairReport& o) {
        merged_vertex_pairs += o.merged_vertex_pairs;
        split_edges += o.split_edges;
        filled_gaps += o.filled_gaps;
        gap_fill_triangles += o.gap_fill_triangles;
        skipped_merges += o.skipped_merges;
        tolerance_used = std::max(tolerance_used, o.tolerance_used);
        return *this;
    }
    int total_actions() const { return merged_vertex_pairs + split_edges + filled_gaps; }
};

/// Merges boundary vertices closer than tol (survivor = lower index, positions
/// untouched). tol <= 0 selects the per-vertex default, one fifth of the
/// shortest incident edge. Pairs whose merge would break manifoldness are
/// skipped and counted.
std::pair<TriMesh, RepairReport> merge_duplicate_vertices(const TriMesh& m, double tol);

/// Splits boundary edges that pass within tol of a non-incident boundary
/// vertex; the edge's face is split in two and the vertex fuses with the
/// split point. Projections within tol of an endpoint are left to the merge
/// pass. tol <= 0 selects the per-vertex default.
std::pair<TriMesh, RepairReport> split_vertex_on_edge(const TriMesh& m, double tol);

/// Ear-clips closed boundary loops of diameter <= max_gap on their best-fit
/// plane. No new vertices are introduced. max_gap <= 0 selects the default,
/// three times the median boundary edge length.
std::pair<TriMesh, RepairReport> fill_gaps(const TriMesh& m, double max_gap);

/// Full pass: merge, then split, then fill. Idempotent.
std::pair<TriMesh, RepairReport> repair(const TriMesh& m, double tol = 0, double max_gap = 0);

}  // namespace untrim
