#include "untrim/orientation_field.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace untrim {

std::vector<char> detect_sharp_edges_tri(const TriMesh& m, double phi) {
    std::vector<char> sharp(m.n_edges(), 0);
    std::vector<Vector3d> fnorm(m.n_faces());
    for (int f = 0; f < m.n_faces(); ++f) fnorm[f] = m.face_normal(f);
    for (int h = 0; h < m.n_halfedges(); ++h) {
        int t = m.twin[h];
        if (t < 0 || t < h) continue;
        if (angle_between(fnorm[m.he_face(h)], fnorm[m.he_face(t)]) > phi) sharp[m.he_edge[h]] = 1;
    }
    return sharp;
}

double internal_angle(const TriMesh& m, int v) {
    if (!m.vert_boundary[v]) throw std::runtime_error("internal_angle: vertex is not on the boundary");
    double sum = 0;
    for (int h : m.outgoing_halfedges(v)) {
        int f = m.he_face(h);
        int c = h % 3;
        Vector3d e1 = m.positions[m.faces[f][(c + 1) % 3]] - m.positions[v];
        Vector3d e2 = m.positions[m.faces[f][(c + 2) % 3]] - m.positions[v];
        sum += angle_between(e1, e2);
    }
    return sum;
}

std::vector<char> classify_corners(const TriMesh& m, double theta) {
    std::vector<char> corner(m.n_vertices(), 0);
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (!m.vert_boundary[v]) continue;
        double a = internal_angle(m, v);
        if ((a > 0 && a <= kPi - theta) || (a >= kPi + theta && a < 2 * kPi)) corner[v] = 1;
    }
    return corner;
}

namespace {

// constraint-curve graph helpers: boundary edges plus sharp crease edges
struct CurveGraph {
    std::vector<std::array<int, 2>> segments;
    std::vector<char> segment_boundary;
    std::vector<std::vector<int>> vsegs;  // vertex -> incident segment ids
};

CurveGraph build_curves(const TriMesh& m, const std::vector<char>& sharp) {
    CurveGraph g;
    g.vsegs.resize(m.n_vertices());
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!sharp.empty() && sharp[e]) {
            int id = int(g.segments.size());
            g.segments.push_back(m.edges[e]);
            g.segment_boundary.push_back(0);
            g.vsegs[m.edges[e][0]].push_back(id);
            g.vsegs[m.edges[e][1]].push_back(id);
        }
    }
    for (int h = 0; h < m.n_halfedges(); ++h) {
        if (m.twin[h] >= 0) continue;
        int id = int(g.segments.size());
        g.segments.push_back({m.he_from(h), m.he_to(h)});
        g.segment_boundary.push_back(1);
        g.vsegs[m.he_from(h)].push_back(id);
        g.vsegs[m.he_to(h)].push_back(id);
    }
    return g;
}

}  // namespace

FieldConstraints build_field_constraints(const TriMesh& m, double theta,
                                         const std::vector<char>& sharp_edges) {
    FieldConstraints fc;
    const int nv = m.n_vertices();
    fc.kind.assign(nv, VertexConstraint::Free);
    fc.dir.assign(nv, Vector3d::Zero());
    fc.on_boundary.assign(nv, 0);
    fc.on_crease.assign(nv, 0);

    auto loops = boundary_loops(m);
    auto corner = classify_corners(m, theta);

    for (auto& loop : loops) {
        int n = int(loop.vertices.size());
        for (int i = 0; i < n; ++i) {
            int v = loop.vertices[i];
            fc.on_boundary[v] = 1;
            if (corner[v]) {
                // pin to the incident boundary edge whose far endpoint has the smaller index
                int prev = loop.vertices[(i + n - 1) % n];
                int next = loop.vertices[(i + 1) % n];
                int other = std::min(prev, next);
                fc.kind[v] = VertexConstraint::Fixed;
                fc.dir[v] = (m.positions[other] - m.positions[v]).normalized();
            } else {
                fc.kind[v] = VertexConstraint::Tangent;
                fc.dir[v] = loop.tangents[i];
            }
        }
    }

    // interior creases behave like boundaries for both fields
    if (!sharp_edges.empty()) {
        std::vector<std::vector<int>> crease_nbrs(nv);
        for (int e = 0; e < m.n_edges(); ++e) {
            if (!sharp_edges[e]) continue;
            crease_nbrs[m.edges[e][0]].push_back(m.edges[e][1]);
            crease_nbrs[m.edges[e][1]].push_back(m.edges[e][0]);
            fc.on_crease[m.edges[e][0]] = 1;
            fc.on_crease[m.edges[e][1]] = 1;
        }
        for (int v = 0; v < nv; ++v) {
            if (!fc.on_crease[v] || fc.on_boundary[v]) continue;  // boundary wins
            auto& nb = crease_nbrs[v];
            if (nb.size() == 2) {
                Vector3d d0 = (m.positions[v] - m.positions[nb[0]]).normalized();
                Vector3d d1 = (m.positions[nb[1]] - m.positions[v]).normalized();
                if (angle_between(d0, d1) > theta) {
                    fc.kind[v] = VertexConstraint::Fixed;
                    fc.dir[v] = (m.positions[std::min(nb[0], nb[1])] - m.positions[v]).normalized();
                } else {
                    double l0 = (m.positions[v] - m.positions[nb[0]]).norm();
                    double l1 = (m.positions[nb[1]] - m.positions[v]).norm();
                    Vector3d t = d0 / l0 + d1 / l1;
                    fc.kind[v] = VertexConstraint::Tangent;
                    fc.dir[v] = t.normalized();
                }
            } else {
                // crease endpoint or junction: pin to the lowest-index crease edge
                fc.kind[v] = VertexConstraint::Fixed;
                fc.dir[v] = (m.positions[nb[0]] - m.positions[v]).normalized();
            }
        }
    }

    auto curves = build_curves(m, sharp_edges);
    fc.curve_segments = curves.segments;
    fc.segment_boundary = curves.segment_boundary;

    // per-vertex candidate segments: every constraint segment within two hops
    fc.vertex_segments.assign(nv, {});
    for (int v = 0; v < nv; ++v) {
        if (fc.kind[v] == VertexConstraint::Free) continue;
        std::vector<int> segs = curves.vsegs[v];
        for (int s : curves.vsegs[v])
            for (int w : curves.segments[s])
                for (int s2 : curves.vsegs[w]) segs.push_back(s2);
        std::sort(segs.begin(), segs.end());
        segs.erase(std::unique(segs.begin(), segs.end()), segs.end());
        fc.vertex_segments[v] = std::move(segs);
    }

    // interior vertices near a constraint curve (graph distance <= 2)
    fc.near_curve.assign(nv, 0);
    std::deque<std::pair<int, int>> q;
    std::vector<int> dist(nv, -1);
    for (int v = 0; v < nv; ++v)
        if (fc.constrained(v)) {
            dist[v] = 0;
            q.emplace_back(v, 0);
        }
    while (!q.empty()) {
        auto [v, d] = q.front();
        q.pop_front();
        if (d >= 2) continue;
        for (int w : m.vertex_ring(v))
            if (dist[w] < 0) {
                dist[w] = d + 1;
                fc.near_curve[w] = 1;
                // candidate segments for near-curve vertices inherit from the source
                q.emplace_back(w, d + 1);
            }
    }
    for (int v = 0; v < nv; ++v) {
        if (!fc.near_curve[v] || fc.constrained(v)) continue;
        std::vector<int> segs;
        for (int w : m.vertex_ring(v)) {
            if (w < int(fc.vertex_segments.size()) && fc.constrained(w))
                segs.insert(segs.end(), fc.vertex_segments[w].begin(), fc.vertex_segments[w].end());
            for (int u : m.vertex_ring(w))
                if (fc.constrained(u))
                    segs.insert(segs.end(), fc.vertex_segments[u].begin(), fc.vertex_segments[u].end());
        }
        std::sort(segs.begin(), segs.end());
        segs.erase(std::unique(segs.begin(), segs.end()), segs.end());
        fc.vertex_segments[v] = std::move(segs);
    }
    return fc;
}

OrientationState OrientationState::init(const TriMesh& m, const FieldConstraints& c,
                                        uint64_t rng_seed) {
    OrientationState s;
    s.constraints = c;
    s.n = vertex_normals(m);
    s.o.resize(m.n_vertices());
    s.corner_flags.assign(m.n_vertices(), 0);
    Rng rng(rng_seed);
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (c.kind[v] == VertexConstraint::Free) {
            double a = rng.uniform(0, 2 * kPi);
            Vector3d ref = std::abs(s.n[v][0]) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
            Vector3d u = project_to_tangent(ref, s.n[v]).normalized();
            Vector3d w = s.n[v].cross(u);
            s.o[v] = std::cos(a) * u + std::sin(a) * w;
        } else {
            s.o[v] = project_to_tangent(c.dir[v], s.n[v]).normalized();
            if (c.kind[v] == VertexConstraint::Fixed) s.corner_flags[v] = 1;
        }
    }
    return s;
}

Vector3d rotate_cross(const Vector3d& o, const Vector3d& n, int k) {
    if (std::abs(o.dot(n)) > 1e-6)
        throw std::runtime_error("rotate_cross: direction not orthogonal to normal");
    return rotate90_about(o, n, k);
}

std::pair<int, int> best_rotation_pair(const Vector3d& oi, const Vector3d& ni,
                                       const Vector3d& oj, const Vector3d& nj) {
    const Vector3d ti = ni.cross(oi), tj = nj.cross(oj);
    const double d[2][2] = {{oi.dot(oj), oi.dot(tj)}, {ti.dot(oj), ti.dot(tj)}};
    double best = -1e300;
    int bi = 0, bj = 0;
    for (int kj = 0; kj < 4; ++kj) {
        double sj = kj < 2 ? 1.0 : -1.0;
        for (int ki = 0; ki < 4; ++ki) {
            double si = ki < 2 ? 1.0 : -1.0;
            double dot = si * sj * d[ki % 2][kj % 2];
            if (dot > best) {
                best = dot;
                bi = ki;
                bj = kj;
            }
        }
    }
    return {bi, bj};
}

double orientation_energy(const TriMesh& m, const OrientationState& s) {
    double e = 0;
    for (int ei = 0; ei < m.n_edges(); ++ei) {
        int a = m.edges[ei][0], b = m.edges[ei][1];
        auto [ka, kb] = best_rotation_pair(s.o[a], s.n[a], s.o[b], s.n[b]);
        double ang = angle_between(rotate90_about(s.o[a], s.n[a], ka),
                                   rotate90_about(s.o[b], s.n[b], kb));
        e += 2.0 * ang * ang;  // both directed pairs of the edge
    }
    return e;
}

namespace {

void impose_orientation_constraint(OrientationState& s, int v) {
    const auto& c = s.constraints;
    if (c.kind[v] == VertexConstraint::Tangent) {
        Vector3d d = project_to_tangent(c.dir[v], s.n[v]).normalized();
        s.o[v] = s.o[v].dot(d) >= 0 ? d : Vector3d(-d);
    } else if (c.kind[v] == VertexConstraint::Fixed) {
        s.o[v] = project_to_tangent(c.dir[v], s.n[v]).normalized();
    }
}

void update_vertex(const TriMesh& m, OrientationState& s, int v,
                   const std::vector<int>& ring) {
    if (s.constraints.kind[v] == VertexConstraint::Fixed) return;
    // running blend: each neighbor is matched against the accumulated sum so
    // near-45-degree ties commit to a branch instead of cancelling
    Vector3d sum = s.o[v];
    double weight = 0;
    for (int w : ring) {
        auto [kv, kw] = best_rotation_pair(sum, s.n[v], s.o[w], s.n[w]);
        Vector3d a = rotate90_about(sum, s.n[v], kv);
        Vector3d b = rotate90_about(s.o[w], s.n[w], kw);
        sum = a * weight + b * s.omega;
        weight += s.omega;
        sum = project_to_tangent(sum, s.n[v]);
        double len = sum.norm();
        if (len > 1e-14)
            sum /= len;
        else
            sum = s.o[v];
    }
    s.o[v] = sum;
    impose_orientation_constraint(s, v);
    (void)m;
}

}  // namespace

OrientationState optimize_orientation(const TriMesh& m, OrientationState state, int iters,
                                      uint64_t rng_seed, double exit_change_tol) {
    (void)rng_seed;  // the state carries its initialization; kept for interface symmetry
    std::vector<int> boundary, interior;
    for (int v = 0; v < m.n_vertices(); ++v)
        (state.constraints.constrained(v) ? boundary : interior).push_back(v);
    std::vector<std::vector<int>> rings(m.n_vertices());
    for (int v = 0; v < m.n_vertices(); ++v) rings[v] = m.vertex_ring(v);

    for (int it = 0; it < iters; ++it) {
        double max_change = 0;
        for (int v : boundary) {
            Vector3d before = state.o[v];
            update_vertex(m, state, v, rings[v]);
            max_change = std::max(max_change, angle_between(before, state.o[v]));
        }
        for (int v : interior) {
            Vector3d before = state.o[v];
            update_vertex(m, state, v, rings[v]);
            max_change = std::max(max_change, angle_between(before, state.o[v]));
        }
        if (max_change < exit_change_tol) break;
    }
    return state;
}

OrientationState match_fields(const TriMesh& m, OrientationState state) {
    const int nv = m.n_vertices();
    // largest connected component, seed = its lowest vertex index
    std::vector<int> comp(nv, -1);
    int ncomp = 0;
    for (int v0 = 0; v0 < nv; ++v0) {
        if (comp[v0] >= 0) continue;
        std::deque<int> q{v0};
        comp[v0] = ncomp;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : m.vertex_ring(v))
                if (comp[w] < 0) {
                    comp[w] = ncomp;
                    q.push_back(w);
                }
        }
        ++ncomp;
    }
    std::vector<int> size(ncomp, 0), seed(ncomp, -1);
    for (int v = 0; v < nv; ++v) {
        ++size[comp[v]];
        if (seed[comp[v]] < 0) seed[comp[v]] = v;
    }

    std::vector<char> done(nv, 0);
    for (int c = 0; c < ncomp; ++c) {
        // visit every component; matching within each
        std::deque<int> q{seed[c]};
        done[seed[c]] = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : m.vertex_ring(v)) {
                if (done[w]) continue;
                done[w] = 1;
                // any quarter turn keeps the cross (and so the constraints) intact
                int best_k = 0;
                double best = -1e300;
                for (int k = 0; k < 4; ++k) {
                    double dot = state.o[v].dot(rotate90_about(state.o[w], state.n[w], k));
                    if (dot > best) {
                        best = dot;
                        best_k = k;
                    }
                }
                state.o[w] = rotate90_about(state.o[w], state.n[w], best_k);
                q.push_back(w);
            }
        }
    }
    return state;
}

std::vector<std::pair<int, int>> orientation_singularities(const TriMesh& m,
                                                           const OrientationState& s) {
    std::vector<std::pair<int, int>> sing;
    for (int f = 0; f < m.n_faces(); ++f) {
        int index = 0;
        for (int c = 0; c < 3; ++c) {
            int u = m.faces[f][c], v = m.faces[f][(c + 1) % 3];
            auto [ku, kv] = best_rotation_pair(s.o[u], s.n[u], s.o[v], s.n[v]);
            index += kv - ku;
        }
        index = ((index % 4) + 4) % 4;
        if (index != 0) sing.emplace_back(f, index);
    }
    return sing;
}

double fractional_index(int mod4_index) {
    switch (((mod4_index % 4) + 4) % 4) {
        case 1: return 0.25;
        case 3: return -0.25;
        case 2: return 0.5;
        default: return 0.0;
    }
}

}  // namespace untrim
