#include "untrim/trimesh.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace untrim {

void TriMesh::build() {
    const int nv = n_vertices();
    const int nh = n_halfedges();
    twin.assign(nh, -1);
    v2h.assign(nv, -1);
    vert_boundary.assign(nv, 0);
    he_edge.assign(nh, -1);
    edges.clear();

    for (int f = 0; f < n_faces(); ++f) {
        for (int c = 0; c < 3; ++c) {
            int v = faces[f][c];
            if (v < 0 || v >= nv) throw std::runtime_error("face references out-of-range vertex");
        }
        if (faces[f][0] == faces[f][1] || faces[f][1] == faces[f][2] || faces[f][0] == faces[f][2])
            throw std::runtime_error("degenerate face with repeated vertex index, face " + std::to_string(f));
    }

    std::map<std::pair<int, int>, int> dir;  // directed edge -> halfedge
    for (int h = 0; h < nh; ++h) {
        auto key = std::make_pair(he_from(h), he_to(h));
        if (!dir.emplace(key, h).second)
            throw std::runtime_error("non-manifold or inconsistently oriented edge (" +
                                     std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    }
    std::map<std::pair<int, int>, int> und;  // undirected edge -> edge id
    for (int h = 0; h < nh; ++h) {
        int a = he_from(h), b = he_to(h);
        auto it = dir.find(std::make_pair(b, a));
        twin[h] = (it == dir.end()) ? -1 : it->second;
        auto key = std::minmax(a, b);
        auto ins = und.emplace(std::make_pair(key.first, key.second), int(edges.size()));
        if (ins.second) edges.push_back({key.first, key.second});
        he_edge[h] = ins.first->second;
    }
    for (int h = 0; h < nh; ++h) {
        int v = he_from(h);
        if (twin[h] < 0) {
            v2h[v] = h;  // boundary halfedge wins so fans start at the boundary
            vert_boundary[v] = 1;
            vert_boundary[he_to(h)] = 1;
        } else if (v2h[v] < 0) {
            v2h[v] = h;
        }
    }
}

std::vector<int> TriMesh::outgoing_halfedges(int v) const {
    std::vector<int> out;
    int h0 = v2h[v];
    if (h0 < 0) return out;
    int h = h0;
    // walk clockwise: next outgoing = twin(prev(h))
    do {
        out.push_back(h);
        int hp = he_prev(h);
        if (twin[hp] < 0) break;  // open fan ends
        h = twin[hp];
    } while (h != h0);
    return out;
}

std::vector<int> TriMesh::vertex_ring(int v) const {
    std::vector<int> ring;
    auto hs = outgoing_halfedges(v);
    for (int h : hs) ring.push_back(he_to(h));
    // open fan: the last incoming neighbor is missed by outgoing walk
    if (!hs.empty()) {
        int last = hs.back();
        int hp = he_prev(last);
        if (twin[hp] < 0) ring.push_back(he_from(hp));
    }
    return ring;
}

bool TriMesh::has_bowtie(int v) const {
    int reached = int(outgoing_halfedges(v).size());
    int incident = 0;
    for (int f = 0; f < n_faces(); ++f)
        for (int c = 0; c < 3; ++c)
            if (faces[f][c] == v) ++incident;
    return reached != incident;
}

Vector3d TriMesh::face_normal(int f) const {
    const Vector3d& a = positions[faces[f][0]];
    const Vector3d& b = positions[faces[f][1]];
    const Vector3d& c = positions[faces[f][2]];
    Vector3d n = (b - a).cross(c - a);
    double len = n.norm();
    if (len <= 0) return Vector3d::Zero();
    return n / len;
}

double TriMesh::face_area(int f) const {
    const Vector3d& a = positions[faces[f][0]];
    const Vector3d& b = positions[faces[f][1]];
    const Vector3d& c = positions[faces[f][2]];
    return 0.5 * (b - a).cross(c - a).norm();
}

double TriMesh::mean_edge_length() const {
    double sum = 0;
    for (auto& e : edges) sum += (positions[e[0]] - positions[e[1]]).norm();
    return edges.empty() ? 0.0 : sum / double(edges.size());
}

Eigen::AlignedBox3d TriMesh::bounding_box() const {
    Eigen::AlignedBox3d box;
    for (auto& p : positions) box.extend(p);
    return box;
}

int euler_characteristic(const TriMesh& m) {
    return m.n_vertices() - m.n_edges() + m.n_faces();
}

std::vector<Vector3d> vertex_normals(const TriMesh& m) {
    std::vector<Vector3d> normals(m.n_vertices(), Vector3d::Zero());
    std::vector<char> touched(m.n_vertices(), 0);
    for (int f = 0; f < m.n_faces(); ++f) {
        Vector3d fn = m.face_normal(f);
        if (fn.isZero()) continue;  // zero-area contributions are skipped
        for (int c = 0; c < 3; ++c) {
            int v = m.faces[f][c];
            const Vector3d& p = m.positions[v];
            Vector3d e1 = m.positions[m.faces[f][(c + 1) % 3]] - p;
            Vector3d e2 = m.positions[m.faces[f][(c + 2) % 3]] - p;
            normals[v] += angle_between(e1, e2) * fn;
            touched[v] = 1;
        }
    }
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (m.v2h[v] < 0) throw std::runtime_error("isolated vertex " + std::to_string(v));
        double len = normals[v].norm();
        if (!touched[v] || len <= 0)
            throw std::runtime_error("all faces incident to vertex " + std::to_string(v) + " are degenerate");
        normals[v] /= len;
    }
    return normals;
}

std::vector<BoundaryLoop> boundary_loops(const TriMesh& m) {
    // next boundary halfedge around a loop: the boundary halfedge leaving he_to(h)
    std::vector<BoundaryLoop> loops;
    std::vector<char> used(m.n_halfedges(), 0);
    for (int h0 = 0; h0 < m.n_halfedges(); ++h0) {
        if (m.twin[h0] >= 0 || used[h0]) continue;
        BoundaryLoop loop;
        int h = h0;
        do {
            if (used[h]) throw std::runtime_error("non-manifold boundary at halfedge " + std::to_string(h));
            used[h] = 1;
            loop.vertices.push_back(m.he_from(h));
            // continue along the boundary: rotate the fan at he_to(h) starting
            // from the arriving side, so bowtie vertices stay on their own loop
            int hn = m.he_next(h);
            int guard = 0;
            while (m.twin[hn] >= 0) {
                hn = m.he_next(m.twin[hn]);
                if (++guard > m.n_halfedges())
                    throw std::runtime_error("non-manifold boundary at vertex " + std::to_string(m.he_to(h)));
            }
            h = hn;
        } while (h != h0);

        int n = int(loop.vertices.size());
        loop.tangents.resize(n);
        loop.corner.assign(n, 0);
        for (int i = 0; i < n; ++i) {
            const Vector3d& prev = m.positions[loop.vertices[(i + n - 1) % n]];
            const Vector3d& cur = m.positions[loop.vertices[i]];
            const Vector3d& next = m.positions[loop.vertices[(i + 1) % n]];
            Vector3d din = cur - prev, dout = next - cur;
            double lin = din.norm(), lout = dout.norm();
            Vector3d t = din / (lin * lin) + dout / (lout * lout);  // unit dirs weighted by 1/len
            double tl = t.norm();
            loop.tangents[i] = tl > 0 ? Vector3d(t / tl) : dout / lout;
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

TriMesh subdivide_midpoint(const TriMesh& m, int levels) {
    TriMesh cur = m;
    for (int l = 0; l < levels; ++l) {
        TriMesh next;
        next.positions = cur.positions;
        std::vector<int> mid(cur.n_edges());
        for (int e = 0; e < cur.n_edges(); ++e) {
            mid[e] = int(next.positions.size());
            next.positions.push_back(0.5 * (cur.positions[cur.edges[e][0]] + cur.positions[cur.edges[e][1]]));
        }
        next.faces.reserve(cur.n_faces() * 4);
        for (int f = 0; f < cur.n_faces(); ++f) {
            int a = cur.faces[f][0], b = cur.faces[f][1], c = cur.faces[f][2];
            int ab = mid[cur.he_edge[3 * f + 0]];
            int bc = mid[cur.he_edge[3 * f + 1]];
            int ca = mid[cur.he_edge[3 * f + 2]];
            next.faces.push_back({a, ab, ca});
            next.faces.push_back({ab, b, bc});
            next.faces.push_back({ca, bc, c});
            next.faces.push_back({ab, bc, ca});
        }
        next.build();
        cur = std::move(next);
    }
    return cur;
}

}  // namespace untrim
