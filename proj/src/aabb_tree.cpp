#include "untrim/aabb_tree.hpp"

#include <algorithm>
#include <numeric>

namespace untrim {

Vector3d closest_point_on_triangle(const Vector3d& p, const Vector3d& a, const Vector3d& b,
                                   const Vector3d& c) {
    // Ericson, Real-Time Collision Detection 5.1.5
    Vector3d ab = b - a, ac = c - a, ap = p - a;
    double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;

    Vector3d bp = p - b;
    double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

    Vector3d cp = p - c;
    double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

AabbTree::AabbTree(const TriMesh& mesh) : mesh_(mesh) {
    tris_.resize(mesh.n_faces());
    std::iota(tris_.begin(), tris_.end(), 0);
    nodes_.reserve(mesh.n_faces() * 2);
    if (!tris_.empty()) build(0, int(tris_.size()));
}

int AabbTree::build(int begin, int end) {
    int id = int(nodes_.size());
    nodes_.push_back({});
    Eigen::AlignedBox3d box;
    for (int i = begin; i < end; ++i)
        for (int c = 0; c < 3; ++c) box.extend(mesh_.positions[mesh_.faces[tris_[i]][c]]);
    nodes_[id].box = box;
    if (end - begin <= 4) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    int axis;
    box.sizes().maxCoeff(&axis);
    int mid = (begin + end) / 2;
    std::nth_element(tris_.begin() + begin, tris_.begin() + mid, tris_.begin() + end,
                     [&](int f1, int f2) {
                         auto centroid = [&](int f) {
                             return (mesh_.positions[mesh_.faces[f][0]][axis] +
                                     mesh_.positions[mesh_.faces[f][1]][axis] +
                                     mesh_.positions[mesh_.faces[f][2]][axis]);
                         };
                         return centroid(f1) < centroid(f2);
                     });
    int l = build(begin, mid);
    int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
}

void AabbTree::query(int node, const Vector3d& q, double& best_d2, Vector3d& best_p,
                     int& best_f) const {
    const Node& n = nodes_[node];
    if (n.box.squaredExteriorDistance(q) >= best_d2) return;
    if (n.leaf()) {
        for (int i = n.begin; i < n.end; ++i) {
            int f = tris_[i];
            Vector3d cp = closest_point_on_triangle(q, mesh_.positions[mesh_.faces[f][0]],
                                                    mesh_.positions[mesh_.faces[f][1]],
                                                    mesh_.positions[mesh_.faces[f][2]]);
            double d2 = (cp - q).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best_p = cp;
                best_f = f;
            }
        }
        return;
    }
    double dl = nodes_[n.left].box.squaredExteriorDistance(q);
    double dr = nodes_[n.right].box.squaredExteriorDistance(q);
    if (dl < dr) {
        query(n.left, q, best_d2, best_p, best_f);
        query(n.right, q, best_d2, best_p, best_f);
    } else {
        query(n.right, q, best_d2, best_p, best_f);
        query(n.left, q, best_d2, best_p, best_f);
    }
}

Vector3d AabbTree::closest_point(const Vector3d& q, int* face) const {
    double best_d2 = 1e300;
    Vector3d best_p = q;
    int best_f = -1;
    if (!nodes_.empty()) query(0, q, best_d2, best_p, best_f);
    if (face) *face = best_f;
    return best_p;
}

}  // namespace untrim
