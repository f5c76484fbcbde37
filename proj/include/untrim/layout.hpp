#pragma once

#include <vector>

#include "untrim/quadmesh.hpp"

namespace untrim {

/// A chain of quad edges from one terminator (EP, corner, boundary) to
/// another; closed loops keep closed = true.
struct Separatrix {
    std::vector<int> vertices;  // ordered, first/last are terminators unless closed
    bool closed = false;
    bool on_boundary = false;
    bool sharp = false;
};

/// One four-sided regular patch: rows x cols of quad-mesh vertex ids,
/// row-major; grid(0,0), grid(0,cols-1), grid(rows-1,cols-1), grid(rows-1,0)
/// are the patch corners.
struct Patch {
    int rows = 0, cols = 0;       // vertex counts per side
    std::vector<int> grid;        // rows*cols vertex ids
    std::vector<int> faces;       // quad faces covered

    int at(int r, int c) const { return grid[r * cols + c]; }
    std::vector<int> side(int s) const;  // 0: bottom row, 1: right col, 2: top row, 3: left col
};

struct PatchInterface {
    int patch_a, side_a;
    int patch_b, side_b;
    bool reversed;  // side_b runs against side_a's direction
};

struct PatchLayout {
    std::vector<Patch> patches;
    std::vector<Separatrix> separatrices;
    std::vector<PatchInterface> interfaces;
    std::vector<char> separatrix_edge;  // per quad-mesh undirected edge
};

/// Interior edges whose adjacent face normals exceed phi, chained into
/// feature polylines. Marks edge_sharp on the mesh copy it returns.
std::vector<char> detect_sharp_edges(const QuadMesh& q, double phi = kPi / 3);

/// Traces from every EP (valence-many), every corner (two), plus the sharp
/// polylines and the boundary chains; straight through regular vertices.
std::vector<Separatrix> trace_separatrices(const QuadMesh& q);

/// Flood fill bounded by separatrices; every region must be a combinatorial
/// rectangle. Throws otherwise.
PatchLayout extract_patches(const QuadMesh& q);
PatchLayout extract_patches(const QuadMesh& q, const std::vector<Separatrix>& separatrices);

}  // namespace untrim
