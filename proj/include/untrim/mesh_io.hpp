#pragma once

#include <string>
#include <vector>

#include "untrim/trimesh.hpp"

namespace untrim {

struct QuadMesh;

enum class MeshFormat { Obj, Ply };

MeshFormat format_from_path(const std::string& path);

/// Loads an indexed triangle mesh. OBJ and PLY (ascii or binary_little_endian).
/// Preserves the file's vertex order. Throws on parse failure, non-triangle
/// faces, out-of-range indices, repeated indices, or zero-area faces.
TriMesh load_mesh(const std::string& path, MeshFormat format);
TriMesh load_mesh(const std::string& path);

/// Writes OBJ with 17 significant digits so positions round-trip exactly.
void save_mesh(const TriMesh& m, const std::string& path);
void save_mesh(const QuadMesh& m, const std::string& path);

QuadMesh load_quad_obj(const std::string& path);

/// Debug export: oriented point cloud as ascii PLY (position, normal, direction).
void save_field_ply(const std::string& path, const std::vector<Vector3d>& points,
                    const std::vector<Vector3d>& normals, const std::vector<Vector3d>& dirs);

}  // namespace untrim
