#include "untrim/repair.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace untrim {

namespace {

// one fifth of the shortest incident edge, per vertex
std::vector<double> default_tolerances(const TriMesh& m) {
    std::vector<double> tol(m.n_vertices(), 1e300);
    for (auto& e : m.edges) {
        double len = (m.positions[e[0]] - m.positions[e[1]]).norm();
        tol[e[0]] = std::min(tol[e[0]], len);
        tol[e[1]] = std::min(tol[e[1]], len);
    }
    for (auto& t : tol) t *= 0.2;
    return tol;
}

struct SpatialHash {
    double cell;
    std::unordered_map<uint64_t, std::vector<int>> cells;

    explicit SpatialHash(double cell_size) : cell(cell_size) {}

    static uint64_t key(int64_t x, int64_t y, int64_t z) {
        uint64_t h = uint64_t(x) * 73856093ull ^ uint64_t(y) * 19349663ull ^ uint64_t(z) * 83492791ull;
        return h;
    }
    void insert(int id, const Vector3d& p) {
        cells[key(int64_t(std::floor(p[0] / cell)), int64_t(std::floor(p[1] / cell)),
                  int64_t(std::floor(p[2] / cell)))]
            .push_back(id);
    }
    template <class F>
    void neighborhood(const Vector3d& p, F&& fn) const {
        int64_t cx = int64_t(std::floor(p[0] / cell));
        int64_t cy = int64_t(std::floor(p[1] / cell));
        int64_t cz = int64_t(std::floor(p[2] / cell));
        for (int64_t dx = -1; dx <= 1; ++dx)
            for (int64_t dy = -1; dy <= 1; ++dy)
                for (int64_t dz = -1; dz <= 1; ++dz) {
                    auto it = cells.find(key(cx + dx, cy + dy, cz + dz));
                    if (it == cells.end()) continue;
                    for (int id : it->second) fn(id);
                }
    }
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
};

TriMesh compact(const TriMesh& m, std::vector<int>& vmap, std::vector<std::array<int, 3>> faces) {
    // vmap maps old vertex id -> representative old id; renumber referenced ids
    TriMesh out;
    std::vector<int> newid(m.n_vertices(), -1);
    for (auto& f : faces)
        for (int c = 0; c < 3; ++c) {
            int v = vmap[f[c]];
            if (newid[v] < 0) {
                newid[v] = -2;  // referenced
            }
        }
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (newid[v] == -2) {
            newid[v] = int(out.positions.size());
            out.positions.push_back(m.positions[v]);
        }
    }
    for (auto& f : faces) {
        std::array<int, 3> g = {newid[vmap[f[0]]], newid[vmap[f[1]]], newid[vmap[f[2]]]};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;  // collapsed by the merge
        out.faces.push_back(g);
    }
    out.build();
    return out;
}

}  // namespace

std::pair<TriMesh, RepairReport> merge_duplicate_vertices(const TriMesh& m, double tol) {
    RepairReport rep;
    std::vector<double> vtol;
    if (tol > 0) {
        vtol.assign(m.n_vertices(), tol);
        rep.tolerance_used = tol;
    } else {
        vtol = default_tolerances(m);
        rep.tolerance_used = 0;
        for (int v = 0; v < m.n_vertices(); ++v)
            if (m.vert_boundary[v]) rep.tolerance_used = std::max(rep.tolerance_used, vtol[v]);
    }

    double cell = rep.tolerance_used;
    if (cell <= 0) return {m, rep};
    SpatialHash hash(cell);
    for (int v = 0; v < m.n_vertices(); ++v)
        if (m.vert_boundary[v]) hash.insert(v, m.positions[v]);

    std::vector<std::pair<int, int>> candidates;
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (!m.vert_boundary[v]) continue;
        hash.neighborhood(m.positions[v], [&](int w) {
            if (w <= v) return;
            double d = (m.positions[v] - m.positions[w]).norm();
            if (d < std::min(vtol[v], vtol[w])) candidates.emplace_back(v, w);
        });
    }
    std::sort(candidates.begin(), candidates.end());

    // vertex -> incident faces, merged as clusters grow
    std::vector<std::vector<int>> vfaces(m.n_vertices());
    for (int f = 0; f < m.n_faces(); ++f)
        for (int c = 0; c < 3; ++c) vfaces[m.faces[f][c]].push_back(f);

    UnionFind uf(m.n_vertices());
    auto cluster_valid = [&](int root) {
        // the merged vertex must not produce a duplicated directed edge
        std::set<std::pair<int, int>> seen;
        for (int f : vfaces[root]) {
            std::array<int, 3> g = {uf.find(m.faces[f][0]), uf.find(m.faces[f][1]),
                                    uf.find(m.faces[f][2])};
            if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;  // face dissolves
            for (int c = 0; c < 3; ++c) {
                if (g[c] != root && g[(c + 1) % 3] != root) continue;
                if (!seen.emplace(g[c], g[(c + 1) % 3]).second) return false;
            }
        }
        return true;
    };

    for (auto& [a, b] : candidates) {
        int ra = uf.find(a), rb = uf.find(b);
        if (ra == rb) continue;
        int keep = std::min(ra, rb), drop = std::max(ra, rb);
        uf.parent[drop] = keep;
        std::vector<int> backup = vfaces[keep];
        vfaces[keep].insert(vfaces[keep].end(), vfaces[drop].begin(), vfaces[drop].end());
        if (cluster_valid(keep)) {
            ++rep.merged_vertex_pairs;
        } else {
            uf.parent[drop] = drop;
            vfaces[keep] = std::move(backup);
            ++rep.skipped_merges;
        }
    }
    if (rep.merged_vertex_pairs == 0) return {m, rep};

    std::vector<int> vmap(m.n_vertices());
    for (int v = 0; v < m.n_vertices(); ++v) vmap[v] = uf.find(v);
    return {compact(m, vmap, m.faces), rep};
}

std::pair<TriMesh, RepairReport> split_vertex_on_edge(const TriMesh& m, double tol) {
    RepairReport rep;
    std::vector<double> vtol;
    if (tol > 0) {
        vtol.assign(m.n_vertices(), tol);
        rep.tolerance_used = tol;
    } else {
        vtol = default_tolerances(m);
        for (int v = 0; v < m.n_vertices(); ++v)
            if (m.vert_boundary[v]) rep.tolerance_used = std::max(rep.tolerance_used, vtol[v]);
    }
    if (rep.tolerance_used <= 0) return {m, rep};

    TriMesh cur = m;
    bool changed = true;
    int guard = 0;
    while (changed && guard++ < 64) {
        changed = false;
        // boundary halfedges of the current mesh
        std::vector<int> bhe;
        double mean_blen = 0;
        for (int h = 0; h < cur.n_halfedges(); ++h)
            if (cur.twin[h] < 0) {
                bhe.push_back(h);
                mean_blen += (cur.positions[cur.he_from(h)] - cur.positions[cur.he_to(h)]).norm();
            }
        if (bhe.empty()) break;
        mean_blen /= double(bhe.size());

        // cell size at the boundary edge scale keeps the per-edge walk short
        SpatialHash hash(std::max(rep.tolerance_used, mean_blen));
        for (int v = 0; v < cur.n_vertices(); ++v)
            if (cur.vert_boundary[v]) hash.insert(v, cur.positions[v]);

        // each face may be split once per pass; vertices applied lowest-first
        struct Split {
            int vertex, halfedge;
            double t;
        };
        std::vector<Split> splits;
        std::vector<char> face_used(cur.n_faces(), 0);
        for (int h : bhe) {
            int a = cur.he_from(h), b = cur.he_to(h);
            const Vector3d& pa = cur.positions[a];
            const Vector3d& pb = cur.positions[b];
            int best_v = -1;
            double best_d = 1e300, best_t = 0;
            Vector3d mid = 0.5 * (pa + pb);
            double reach = 0.5 * (pa - pb).norm() + rep.tolerance_used;
            // gather candidates from hash cells along the edge
            std::set<int> cand;
            int steps = std::max(1, int(std::ceil((pa - pb).norm() / hash.cell)));
            for (int s = 0; s <= steps; ++s)
                hash.neighborhood(pa + (pb - pa) * (double(s) / steps), [&](int v) { cand.insert(v); });
            for (int v : cand) {
                if (!cur.vert_boundary[v] || v == a || v == b) continue;
                const Vector3d& p = cur.positions[v];
                if ((p - mid).norm() > reach) continue;
                double t;
                Vector3d q = closest_on_segment(p, pa, pb, &t);
                double d = (q - p).norm();
                if (d >= std::min(vtol[v] < 1e300 ? vtol[v] : rep.tolerance_used, rep.tolerance_used))
                    continue;
                // endpoint-proximal cases belong to the merge pass
                if ((p - pa).norm() < vtol[v] || (p - pb).norm() < vtol[v]) continue;
                if (t <= 0.0 || t >= 1.0) continue;
                if (d < best_d) {
                    best_d = d;
                    best_t = t;
                    best_v = v;
                }
            }
            if (best_v >= 0 && !face_used[cur.he_face(h)]) {
                face_used[cur.he_face(h)] = 1;
                splits.push_back({best_v, h, best_t});
            }
        }
        if (splits.empty()) break;

        // apply by rebuilding the face list
        std::vector<std::array<int, 3>> faces = cur.faces;
        std::vector<char> face_drop(cur.n_faces(), 0);
        std::vector<std::array<int, 3>> added;
        for (auto& s : splits) {
            int f = cur.he_face(s.halfedge);
            int c = s.halfedge % 3;
            int a = cur.faces[f][c];
            int b = cur.faces[f][(c + 1) % 3];
            int opp = cur.faces[f][(c + 2) % 3];
            face_drop[f] = 1;
            added.push_back({a, s.vertex, opp});
            added.push_back({s.vertex, b, opp});
        }
        TriMesh next;
        next.positions = cur.positions;
        for (int f = 0; f < int(faces.size()); ++f)
            if (!face_drop[f]) next.faces.push_back(faces[f]);
        for (auto& f : added) next.faces.push_back(f);
        next.build();
        cur = std::move(next);
        rep.split_edges += int(splits.size());
        changed = true;
    }
    return {cur, rep};
}

namespace {

// ear clipping of a 2D polygon; returns triangle index triples into the loop,
// or empty if no valid ear decomposition was found
std::vector<std::array<int, 3>> ear_clip(const std::vector<Vector2d>& poly) {
    int n = int(poly.size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    // make the polygon counterclockwise
    double area2 = 0;
    for (int i = 0; i < n; ++i) {
        const Vector2d& p = poly[i];
        const Vector2d& q = poly[(i + 1) % n];
        area2 += p.x() * q.y() - q.x() * p.y();
    }
    bool flipped = area2 < 0;
    if (flipped) std::reverse(idx.begin(), idx.end());

    auto cross2 = [](const Vector2d& o, const Vector2d& a, const Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<std::array<int, 3>> tris;
    std::vector<int> work = idx;
    int guard = 0;
    while (work.size() > 3 && guard++ < 4 * n * n) {
        bool clipped = false;
        int m2 = int(work.size());
        for (int i = 0; i < m2; ++i) {
            int ia = work[(i + m2 - 1) % m2], ib = work[i], ic = work[(i + 1) % m2];
            double cr = cross2(poly[ia], poly[ib], poly[ic]);
            if (cr <= 1e-14) continue;  // reflex or degenerate
            bool empty = true;
            for (int j : work) {
                if (j == ia || j == ib || j == ic) continue;
                if (cross2(poly[ia], poly[ib], poly[j]) >= 0 &&
                    cross2(poly[ib], poly[ic], poly[j]) >= 0 &&
                    cross2(poly[ic], poly[ia], poly[j]) >= 0) {
                    empty = false;
                    break;
                }
            }
            if (!empty) continue;
            tris.push_back({ia, ib, ic});
            work.erase(work.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped) return {};  // self-intersecting or otherwise unclippable
    }
    if (work.size() == 3) tris.push_back({work[0], work[1], work[2]});
    if (flipped)
        for (auto& t : tris) std::swap(t[0], t[2]);
    return tris;
}

}  // namespace

std::pair<TriMesh, RepairReport> fill_gaps(const TriMesh& m, double max_gap) {
    RepairReport rep;
    auto loops = boundary_loops(m);
    if (max_gap <= 0) {
        std::vector<double> lens;
        for (auto& l : loops) {
            int n = int(l.vertices.size());
            for (int i = 0; i < n; ++i)
                lens.push_back((m.positions[l.vertices[i]] - m.positions[l.vertices[(i + 1) % n]]).norm());
        }
        if (lens.empty()) return {m, rep};
        std::nth_element(lens.begin(), lens.begin() + lens.size() / 2, lens.end());
        max_gap = 3.0 * lens[lens.size() / 2];
    }
    rep.tolerance_used = max_gap;

    TriMesh out = m;
    std::vector<std::array<int, 3>> added;
    for (auto& loop : loops) {
        int n = int(loop.vertices.size());
        double diam = 0;
        for (int i = 0; i < n && diam <= max_gap; ++i)
            for (int j = i + 1; j < n; ++j)
                diam = std::max(diam, (m.positions[loop.vertices[i]] - m.positions[loop.vertices[j]]).norm());
        if (diam > max_gap) {
            rep.unfilled_loops.push_back(n);
            continue;
        }
        // best-fit plane via the Newell normal of the loop polygon
        Vector3d nrm = Vector3d::Zero(), centroid = Vector3d::Zero();
        for (int i = 0; i < n; ++i) {
            const Vector3d& a = m.positions[loop.vertices[i]];
            const Vector3d& b = m.positions[loop.vertices[(i + 1) % n]];
            nrm[0] += (a.y() - b.y()) * (a.z() + b.z());
            nrm[1] += (a.z() - b.z()) * (a.x() + b.x());
            nrm[2] += (a.x() - b.x()) * (a.y() + b.y());
            centroid += a;
        }
        centroid /= n;
        if (nrm.norm() <= 0) {
            rep.unfilled_loops.push_back(n);
            continue;
        }
        nrm.normalize();
        Vector3d u = project_to_tangent(std::abs(nrm[0]) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY(), nrm).normalized();
        Vector3d v = nrm.cross(u);
        // fill triangles must wind against the loop so shared edges twin up
        std::vector<Vector2d> poly(n);
        for (int i = 0; i < n; ++i) {
            Vector3d d = m.positions[loop.vertices[n - 1 - i]] - centroid;
            poly[i] = Vector2d(d.dot(u), d.dot(v));
        }
        auto tris = ear_clip(poly);
        if (tris.empty() && n > 3) {
            rep.unfilled_loops.push_back(n);
            continue;
        }
        if (n == 3) tris = {{0, 1, 2}};
        for (auto& t : tris)
            added.push_back({loop.vertices[n - 1 - t[0]], loop.vertices[n - 1 - t[1]],
                             loop.vertices[n - 1 - t[2]]});
        ++rep.filled_gaps;
        rep.gap_fill_triangles += int(tris.size());
    }
    if (added.empty()) return {out, rep};
    for (auto& f : added) out.faces.push_back(f);
    out.build();
    return {out, rep};
}

std::pair<TriMesh, RepairReport> repair(const TriMesh& m, double tol, double max_gap) {
    auto [m1, r1] = merge_duplicate_vertices(m, tol);
    auto [m2, r2] = split_vertex_on_edge(m1, tol);
    auto [m3, r3] = fill_gaps(m2, max_gap);
    RepairReport rep = r1;
    rep += r2;
    rep += r3;
    rep.unfilled_loops = r3.unfilled_loops;
    return {m3, rep};
}

}  // namespace untrim
