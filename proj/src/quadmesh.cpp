#include "untrim/quadmesh.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace untrim {

void QuadMesh::build() {
    const int nv = n_vertices();
    const int nh = n_halfedges();
    twin.assign(nh, -1);
    v2h.assign(nv, -1);
    vert_boundary.assign(nv, 0);
    valence.assign(nv, 0);
    he_edge.assign(nh, -1);
    edges.clear();

    for (auto& f : faces)
        for (int c = 0; c < 4; ++c) {
            if (f[c] < 0 || f[c] >= nv) throw std::runtime_error("quad references out-of-range vertex");
            if (f[c] == f[(c + 1) % 4] || f[c] == f[(c + 2) % 4])
                throw std::runtime_error("degenerate quad with repeated vertex");
        }

    std::map<std::pair<int, int>, int> dir;
    for (int h = 0; h < nh; ++h) {
        auto key = std::make_pair(he_from(h), he_to(h));
        if (!dir.emplace(key, h).second)
            throw std::runtime_error("non-manifold or inconsistently oriented quad edge (" +
                                     std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    }
    std::map<std::pair<int, int>, int> und;
    for (int h = 0; h < nh; ++h) {
        int a = he_from(h), b = he_to(h);
        auto it = dir.find(std::make_pair(b, a));
        twin[h] = it == dir.end() ? -1 : it->second;
        auto key = std::minmax(a, b);
        auto ins = und.emplace(std::make_pair(key.first, key.second), int(edges.size()));
        if (ins.second) edges.push_back({key.first, key.second});
        he_edge[h] = ins.first->second;
    }
    for (auto& e : edges) {
        ++valence[e[0]];
        ++valence[e[1]];
    }
    for (int h = 0; h < nh; ++h) {
        int v = he_from(h);
        if (twin[h] < 0) {
            v2h[v] = h;
            vert_boundary[v] = 1;
            vert_boundary[he_to(h)] = 1;
        } else if (v2h[v] < 0) {
            v2h[v] = h;
        }
    }
    edge_sharp.assign(edges.size(), 0);
    compute_tags();
}

void QuadMesh::compute_tags(double corner_theta) {
    tag.assign(n_vertices(), QuadVertexTag::InteriorRegular);
    for (int v = 0; v < n_vertices(); ++v) {
        if (!vert_boundary[v]) {
            tag[v] = valence[v] == 4 ? QuadVertexTag::InteriorRegular : QuadVertexTag::InteriorEP;
            continue;
        }
        // boundary: find the two incident boundary edges
        auto hs = outgoing_halfedges(v);
        int h_out = -1, h_in = -1;
        for (int h : hs) {
            if (twin[h] < 0) h_out = h;
            int hp = he_prev(h);
            if (twin[hp] < 0) h_in = hp;
        }
        bool corner = false;
        if (valence[v] == 2) {
            corner = true;  // a boundary point shared by two edges
        } else if (h_out >= 0 && h_in >= 0) {
            Vector3d din = (positions[v] - positions[he_from(h_in)]).normalized();
            Vector3d dout = (positions[he_to(h_out)] - positions[v]).normalized();
            if (angle_between(din, dout) > corner_theta) corner = true;
        }
        if (corner)
            tag[v] = QuadVertexTag::Corner;
        else
            tag[v] = valence[v] > 3 ? QuadVertexTag::BoundaryEP : QuadVertexTag::BoundaryRegular;
    }
}

std::vector<int> QuadMesh::outgoing_halfedges(int v) const {
    std::vector<int> out;
    int h0 = v2h[v];
    if (h0 < 0) return out;
    int h = h0;
    do {
        out.push_back(h);
        int hp = he_prev(h);
        if (twin[hp] < 0) break;
        h = twin[hp];
    } while (h != h0);
    return out;
}

std::vector<int> QuadMesh::vertex_ring(int v) const {
    std::vector<int> ring;
    auto hs = outgoing_halfedges(v);
    for (int h : hs) ring.push_back(he_to(h));
    if (!hs.empty()) {
        int hp = he_prev(hs.back());
        if (twin[hp] < 0) ring.push_back(he_from(hp));
    }
    return ring;
}

Vector3d QuadMesh::face_normal(int f) const {
    // Newell's rule, stable for mildly non-planar quads
    Vector3d n = Vector3d::Zero();
    for (int c = 0; c < 4; ++c) {
        const Vector3d& a = positions[faces[f][c]];
        const Vector3d& b = positions[faces[f][(c + 1) % 4]];
        n[0] += (a.y() - b.y()) * (a.z() + b.z());
        n[1] += (a.z() - b.z()) * (a.x() + b.x());
        n[2] += (a.x() - b.x()) * (a.y() + b.y());
    }
    double len = n.norm();
    return len > 0 ? Vector3d(n / len) : Vector3d::Zero();
}

double QuadMesh::mean_edge_length() const {
    double s = 0;
    for (auto& e : edges) s += (positions[e[0]] - positions[e[1]]).norm();
    return edges.empty() ? 0.0 : s / double(edges.size());
}

int QuadMesh::index_sum_closed() const {
    int s = 0;
    for (int v = 0; v < n_vertices(); ++v) s += 4 - valence[v];
    return s;
}

void QuadMesh::index_sums(int& interior, int& boundary) const {
    interior = 0;
    boundary = 0;
    for (int v = 0; v < n_vertices(); ++v) {
        if (vert_boundary[v])
            boundary += 3 - valence[v];
        else
            interior += 4 - valence[v];
    }
}

int euler_characteristic(const QuadMesh& m) {
    return m.n_vertices() - m.n_edges() + m.n_faces();
}

double scaled_jacobian(const QuadMesh& m, int f) {
    Vector3d n = m.face_normal(f);
    double worst = 1.0;
    for (int c = 0; c < 4; ++c) {
        const Vector3d& p = m.positions[m.faces[f][c]];
        Vector3d e1 = m.positions[m.faces[f][(c + 1) % 4]] - p;
        Vector3d e2 = m.positions[m.faces[f][(c + 3) % 4]] - p;
        double denom = e1.norm() * e2.norm();
        if (denom <= 0) return 0.0;
        worst = std::min(worst, e1.cross(e2).dot(n) / denom);
    }
    return worst;
}

QuadQualityReport quad_quality_report(const QuadMesh& m, double rho) {
    QuadQualityReport r;
    if (m.n_faces() == 0) return r;
    double jac_sum = 0;
    r.min_scaled_jacobian = 1.0;
    for (int f = 0; f < m.n_faces(); ++f) {
        double j = scaled_jacobian(m, f);
        jac_sum += j;
        r.min_scaled_jacobian = std::min(r.min_scaled_jacobian, j);
    }
    r.mean_scaled_jacobian = jac_sum / m.n_faces();

    double rsum = 0, rmin = 1e300, rmax = 0;
    for (auto& e : m.edges) {
        double ratio = (m.positions[e[0]] - m.positions[e[1]]).norm() / rho;
        rsum += ratio;
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
    }
    r.min_edge_ratio = rmin;
    r.max_edge_ratio = rmax;
    r.mean_edge_ratio = rsum / double(m.n_edges());

    std::map<int, int> hist;
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (m.is_extraordinary(v)) ++r.ep_count;
        if (!m.vert_boundary[v]) ++hist[m.valence[v]];
    }
    for (auto& kv : hist) r.valence_histogram.push_back(kv);
    return r;
}

}  // namespace untrim
