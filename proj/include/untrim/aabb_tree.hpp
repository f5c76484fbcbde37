#pragma once

#include <vector>

#include "untrim/trimesh.hpp"

namespace untrim {

/// Static BVH over the triangles of a mesh for closest-point queries.
class AabbTree {
public:
    explicit AabbTree(const TriMesh& mesh);

    /// Closest point on the surface to q; optionally reports the triangle.
    Vector3d closest_point(const Vector3d& q, int* face = nullptr) const;
    double distance(const Vector3d& q) const { return (closest_point(q) - q).norm(); }

private:
    struct Node {
        Eigen::AlignedBox3d box;
        int left = -1, right = -1;  // children, or
        int begin = 0, end = 0;     // triangle range for leaves
        bool leaf() const { return left < 0; }
    };

    const TriMesh& mesh_;
    std::vector<Node> nodes_;
    std::vector<int> tris_;

    int build(int begin, int end);
    void query(int node, const Vector3d& q, double& best_d2, Vector3d& best_p, int& best_f) const;
};

Vector3d closest_point_on_triangle(const Vector3d& p, const Vector3d& a, const Vector3d& b,
                                   const Vector3d& c);

}  // namespace untrim
