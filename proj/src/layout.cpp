#include "untrim/layout.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace untrim {

std::vector<int> Patch::side(int s) const {
    std::vector<int> out;
    switch (s) {
        case 0:
            for (int c = 0; c < cols; ++c) out.push_back(at(0, c));
            break;
        case 1:
            for (int r = 0; r < rows; ++r) out.push_back(at(r, cols - 1));
            break;
        case 2:
            for (int c = 0; c < cols; ++c) out.push_back(at(rows - 1, c));
            break;
        default:
            for (int r = 0; r < rows; ++r) out.push_back(at(r, 0));
            break;
    }
    return out;
}

std::vector<char> detect_sharp_edges(const QuadMesh& q, double phi) {
    std::vector<char> sharp(q.n_edges(), 0);
    std::vector<Vector3d> fn(q.n_faces());
    for (int f = 0; f < q.n_faces(); ++f) fn[f] = q.face_normal(f);
    for (int h = 0; h < q.n_halfedges(); ++h) {
        int t = q.twin[h];
        if (t < 0 || t < h) continue;
        if (angle_between(fn[q.he_face(h)], fn[q.he_face(t)]) > phi) sharp[q.he_edge[h]] = 1;
    }
    return sharp;
}

namespace {

bool is_terminator(const QuadMesh& q, int v) {
    return q.is_extraordinary(v) || q.tag[v] == QuadVertexTag::Corner || q.vert_boundary[v];
}

// straight exit: the outgoing halfedge opposite the incoming one in the fan
int straight_exit(const QuadMesh& q, int h_in) {
    int w = q.he_to(h_in);
    auto fan = q.outgoing_halfedges(w);
    int back = q.twin[h_in];
    if (back < 0) return -1;
    int n = int(fan.size());
    for (int i = 0; i < n; ++i)
        if (fan[i] == back) return fan[(i + n / 2) % n];
    return -1;
}

}  // namespace

std::vector<Separatrix> trace_separatrices(const QuadMesh& q) {
    std::vector<Separatrix> out;
    std::set<std::pair<int, int>> traced;  // directed quad edges already owned by a trace
    auto own = [&](int a, int b) {
        traced.insert({a, b});
        traced.insert({b, a});
    };
    auto already = [&](int a, int b) { return traced.count({a, b}) > 0; };

    // interior straight traces from EPs, corners and boundary EPs
    auto trace_from = [&](int h0) {
        int v0 = q.he_from(h0);
        if (already(v0, q.he_to(h0))) return;
        Separatrix s;
        s.vertices.push_back(v0);
        int h = h0;
        long guard = 0;
        while (true) {
            int w = q.he_to(h);
            own(q.he_from(h), w);
            s.vertices.push_back(w);
            if (is_terminator(q, w)) break;
            int nxt = straight_exit(q, h);
            if (nxt < 0) break;  // ran into an open fan
            h = nxt;
            if (++guard > q.n_edges()) {
                s.closed = true;  // cycle without a terminator
                break;
            }
        }
        out.push_back(std::move(s));
    };

    for (int v = 0; v < q.n_vertices(); ++v) {
        bool source = q.is_extraordinary(v) || q.tag[v] == QuadVertexTag::Corner;
        if (!source) continue;
        for (int h : q.outgoing_halfedges(v)) {
            if (q.twin[h] < 0 || q.twin[q.he_prev(h)] < 0) continue;  // boundary edges are chained below
            bool hb = q.vert_boundary[q.he_from(h)] && q.vert_boundary[q.he_to(h)] &&
                      (q.twin[h] < 0);
            if (hb) continue;
            trace_from(h);
        }
        // open fans miss the last incoming edge; its reverse is an outgoing trace from v
        auto fan = q.outgoing_halfedges(v);
        if (!fan.empty()) {
            int hp = q.he_prev(fan.back());
            if (q.twin[hp] < 0 && !already(v, q.he_from(hp))) {
                // boundary edge handled by the chain pass
            }
        }
    }

    // boundary chains: from corners and boundary EPs along the boundary
    std::vector<char> bdone(q.n_halfedges(), 0);
    auto next_boundary = [&](int h) {
        int nh = q.he_next(h);
        int guard = 0;
        while (q.twin[nh] >= 0) {
            nh = q.he_next(q.twin[nh]);
            if (++guard > q.n_halfedges()) throw std::runtime_error("broken boundary chain");
        }
        return nh;
    };
    for (int h0 = 0; h0 < q.n_halfedges(); ++h0) {
        if (q.twin[h0] >= 0 || bdone[h0]) continue;
        int v0 = q.he_from(h0);
        bool v0_stop = q.tag[v0] == QuadVertexTag::Corner || q.is_extraordinary(v0);
        if (!v0_stop) continue;
        // chain from this stop to the next
        Separatrix s;
        s.on_boundary = true;
        s.vertices.push_back(v0);
        int h = h0;
        while (true) {
            bdone[h] = 1;
            int w = q.he_to(h);
            own(q.he_from(h), w);
            s.vertices.push_back(w);
            if (q.tag[w] == QuadVertexTag::Corner || q.is_extraordinary(w)) break;
            h = next_boundary(h);
        }
        out.push_back(std::move(s));
    }
    // boundary loops with no stop vertex at all become closed separatrices
    for (int h0 = 0; h0 < q.n_halfedges(); ++h0) {
        if (q.twin[h0] >= 0 || bdone[h0]) continue;
        Separatrix s;
        s.on_boundary = true;
        s.closed = true;
        int h = h0;
        do {
            bdone[h] = 1;
            s.vertices.push_back(q.he_from(h));
            own(q.he_from(h), q.he_to(h));
            h = next_boundary(h);
        } while (h != h0);
        out.push_back(std::move(s));
    }

    // sharp polylines are separatrices of their own
    if (!q.edge_sharp.empty()) {
        std::vector<std::vector<int>> sharp_nbr(q.n_vertices());
        for (int e = 0; e < q.n_edges(); ++e)
            if (q.edge_sharp[e]) {
                sharp_nbr[q.edges[e][0]].push_back(q.edges[e][1]);
                sharp_nbr[q.edges[e][1]].push_back(q.edges[e][0]);
            }
        std::set<std::pair<int, int>> sdone;
        for (int v = 0; v < q.n_vertices(); ++v) {
            if (sharp_nbr[v].size() == 2) continue;  // chain interior
            for (int w0 : sharp_nbr[v]) {
                if (sdone.count({v, w0})) continue;
                Separatrix s;
                s.sharp = true;
                s.vertices.push_back(v);
                int prev = v, cur = w0;
                sdone.insert({v, w0});
                sdone.insert({w0, v});
                while (true) {
                    s.vertices.push_back(cur);
                    own(prev, cur);
                    if (sharp_nbr[cur].size() != 2) break;
                    int nxt = sharp_nbr[cur][0] == prev ? sharp_nbr[cur][1] : sharp_nbr[cur][0];
                    sdone.insert({cur, nxt});
                    sdone.insert({nxt, cur});
                    prev = cur;
                    cur = nxt;
                }
                out.push_back(std::move(s));
            }
        }
        // sharp loops (every vertex has chain degree 2)
        for (int e = 0; e < q.n_edges(); ++e) {
            if (!q.edge_sharp[e] || sdone.count({q.edges[e][0], q.edges[e][1]})) continue;
            Separatrix s;
            s.sharp = true;
            s.closed = true;
            int prev = q.edges[e][0], cur = q.edges[e][1], first = prev;
            s.vertices.push_back(prev);
            sdone.insert({prev, cur});
            sdone.insert({cur, prev});
            while (cur != first) {
                s.vertices.push_back(cur);
                own(prev, cur);
                int nxt = sharp_nbr[cur][0] == prev ? sharp_nbr[cur][1] : sharp_nbr[cur][0];
                sdone.insert({cur, nxt});
                sdone.insert({nxt, cur});
                prev = cur;
                cur = nxt;
            }
            own(prev, cur);
            out.push_back(std::move(s));
        }
    }
    return out;
}

PatchLayout extract_patches(const QuadMesh& q) { return extract_patches(q, trace_separatrices(q)); }

PatchLayout extract_patches(const QuadMesh& q, const std::vector<Separatrix>& separatrices) {
    PatchLayout layout;
    layout.separatrices = separatrices;
    layout.separatrix_edge.assign(q.n_edges(), 0);
    std::map<std::pair<int, int>, int> edge_of;
    for (int h = 0; h < q.n_halfedges(); ++h) edge_of[{q.he_from(h), q.he_to(h)}] = q.he_edge[h];
    for (auto& s : separatrices) {
        int n = int(s.vertices.size());
        for (int i = 0; i + 1 < n; ++i) {
            auto it = edge_of.find({s.vertices[i], s.vertices[i + 1]});
            if (it != edge_of.end()) layout.separatrix_edge[it->second] = 1;
        }
        if (s.closed && n > 1) {
            auto it = edge_of.find({s.vertices[n - 1], s.vertices[0]});
            if (it != edge_of.end()) layout.separatrix_edge[it->second] = 1;
        }
    }

    // regions = flood fill not crossing separatrix edges
    std::vector<int> region(q.n_faces(), -1);
    int nregions = 0;
    for (int f0 = 0; f0 < q.n_faces(); ++f0) {
        if (region[f0] >= 0) continue;
        std::deque<int> qu{f0};
        region[f0] = nregions;
        while (!qu.empty()) {
            int f = qu.front();
            qu.pop_front();
            for (int c = 0; c < 4; ++c) {
                int h = 4 * f + c;
                if (layout.separatrix_edge[q.he_edge[h]]) continue;
                int t = q.twin[h];
                if (t < 0) continue;
                int g = q.he_face(t);
                if (region[g] < 0) {
                    region[g] = nregions;
                    qu.push_back(g);
                }
            }
        }
        ++nregions;
    }

    // verify every region is a combinatorial rectangle and build its grid by
    // propagating integer coordinates face by face
    for (int r = 0; r < nregions; ++r) {
        std::vector<int> faces;
        for (int f = 0; f < q.n_faces(); ++f)
            if (region[f] == r) faces.push_back(f);

        // a convex corner of the region: a vertex whose single region face
        // contains both its region-boundary edges
        std::map<int, int> incident;  // vertex -> #region faces
        for (int f : faces)
            for (int c = 0; c < 4; ++c) ++incident[q.faces[f][c]];
        int corner_face = -1, corner_slot = -1;
        for (int f : faces) {
            for (int c = 0; c < 4; ++c) {
                int v = q.faces[f][c];
                if (incident[v] != 1) continue;
                // both edges of f at v must be region borders
                int h_out = 4 * f + c;
                int h_in = 4 * f + (c + 3) % 4;
                auto border = [&](int h) {
                    int t = q.twin[h];
                    return layout.separatrix_edge[q.he_edge[h]] || t < 0 ||
                           region[q.he_face(t)] != r;
                };
                if (border(h_out) && border(h_in)) {
                    corner_face = f;
                    corner_slot = c;
                    break;
                }
            }
            if (corner_face >= 0) break;
        }
        if (corner_face < 0)
            throw std::runtime_error("region " + std::to_string(r) +
                                     " has no convex corner; not a rectangular patch");

        // integer coordinates per vertex, seeded at the corner face
        std::map<int, std::pair<int, int>> coord;
        auto set_coord = [&](int v, int x, int y) {
            auto it = coord.find(v);
            if (it == coord.end()) {
                coord[v] = {x, y};
                return true;
            }
            return it->second == std::make_pair(x, y);
        };
        int f0 = corner_face, c0 = corner_slot;
        set_coord(q.faces[f0][c0], 0, 0);
        set_coord(q.faces[f0][(c0 + 1) % 4], 1, 0);
        set_coord(q.faces[f0][(c0 + 2) % 4], 1, 1);
        set_coord(q.faces[f0][(c0 + 3) % 4], 0, 1);
        std::deque<int> qu{f0};
        std::set<int> seen{f0};
        while (!qu.empty()) {
            int f = qu.front();
            qu.pop_front();
            // infer missing corners of adjacent region faces
            for (int c = 0; c < 4; ++c) {
                int t = q.twin[4 * f + c];
                if (t < 0) continue;
                int g = q.he_face(t);
                if (region[g] != r || seen.count(g)) continue;
                // find an assigned consecutive pair and walk the quad cycle:
                // each corner is the previous one turned left by 90 degrees
                int start = -1;
                for (int cc = 0; cc < 4; ++cc)
                    if (coord.count(q.faces[g][cc]) && coord.count(q.faces[g][(cc + 1) % 4])) {
                        start = cc;
                        break;
                    }
                if (start < 0) continue;
                bool consistent = true;
                for (int step = 1; step <= 2; ++step) {
                    int prev = q.faces[g][(start + step - 1) % 4];
                    int curv = q.faces[g][(start + step) % 4];
                    int nxtv = q.faces[g][(start + step + 1) % 4];
                    auto [px, py] = coord[prev];
                    auto [cx2, cy2] = coord[curv];
                    int dx = cx2 - px, dy = cy2 - py;
                    if (!set_coord(nxtv, cx2 - dy, cy2 + dx)) consistent = false;
                }
                if (!consistent)
                    throw std::runtime_error("region " + std::to_string(r) +
                                             " is not a single coordinate-consistent rectangle");
                seen.insert(g);
                qu.push_back(g);
            }
        }
        if (int(seen.size()) != int(faces.size()))
            throw std::runtime_error("region " + std::to_string(r) +
                                     " is not a single coordinate-consistent rectangle");

        int minx = 0, maxx = 0, miny = 0, maxy = 0;
        for (int f : faces)
            for (int c = 0; c < 4; ++c) {
                auto it = coord.find(q.faces[f][c]);
                if (it == coord.end())
                    throw std::runtime_error("region " + std::to_string(r) + " has unassigned vertices");
                minx = std::min(minx, it->second.first);
                maxx = std::max(maxx, it->second.first);
                miny = std::min(miny, it->second.second);
                maxy = std::max(maxy, it->second.second);
            }
        int cols = maxx - minx + 1, rows = maxy - miny + 1;
        if (int(faces.size()) != (cols - 1) * (rows - 1))
            throw std::runtime_error("region " + std::to_string(r) + " is not a full rectangle (" +
                                     std::to_string(faces.size()) + " faces vs " +
                                     std::to_string((cols - 1) * (rows - 1)) + " cells)");
        Patch p;
        p.rows = rows;
        p.cols = cols;
        p.grid.assign(rows * cols, -1);
        for (int f : faces)
            for (int c = 0; c < 4; ++c) {
                auto [x, y] = coord[q.faces[f][c]];
                p.grid[(y - miny) * cols + (x - minx)] = q.faces[f][c];
            }
        for (int id : p.grid)
            if (id < 0)
                throw std::runtime_error("region " + std::to_string(r) + " has holes in its grid");
        p.faces = faces;
        layout.patches.push_back(std::move(p));
    }

    // interface map: sides sharing the same vertex chain
    std::map<std::vector<int>, std::pair<int, int>> side_map;
    for (int pi = 0; pi < int(layout.patches.size()); ++pi) {
        for (int s = 0; s < 4; ++s) {
            std::vector<int> side = layout.patches[pi].side(s);
            std::vector<int> rev(side.rbegin(), side.rend());
            bool reversed = rev < side;
            std::vector<int> key = reversed ? rev : side;
            auto it = side_map.find(key);
            if (it == side_map.end()) {
                side_map[key] = {pi, s};
            } else {
                auto [pj, sj] = it->second;
                std::vector<int> other = layout.patches[pj].side(sj);
                layout.interfaces.push_back({pj, sj, pi, s, other != side});
            }
        }
    }
    return layout;
}

}  // namespace untrim
