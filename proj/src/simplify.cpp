#include "untrim/simplify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "untrim/aabb_tree.hpp"

namespace untrim {

namespace {

bool interior_ep(const QuadMesh& q, int v) { return q.tag[v] == QuadVertexTag::InteriorEP; }

}  // namespace

std::vector<ClusteredEp> find_clustered_eps(const QuadMesh& q) {
    std::vector<ClusteredEp> out;
    for (int f = 0; f < q.n_faces(); ++f) {
        int eps = 0;
        bool boundary_ep = false;
        std::vector<int> slots;
        for (int c = 0; c < 4; ++c) {
            int v = q.faces[f][c];
            if (interior_ep(q, v)) {
                ++eps;
                slots.push_back(c);
            }
            if (q.tag[v] == QuadVertexTag::BoundaryEP) boundary_ep = true;
        }
        if (eps < 2) continue;
        auto val = [&](int slot) { return q.valence[q.faces[f][slot]]; };
        auto in_band = [&](int slot) { return val(slot) == 3 || val(slot) == 5; };

        ClusteredEp ce{f, EpPattern::Other, -1, -1};
        if (boundary_ep || eps > 3 || !std::all_of(slots.begin(), slots.end(), in_band)) {
            out.push_back(ce);
            continue;
        }
        if (eps == 2) {
            bool adjacent = (slots[1] - slots[0]) % 2 == 1;
            if (!adjacent) continue;  // diagonal pair: handled as a zip patch
            int a = val(slots[0]), b = val(slots[1]);
            ce.slot_a = slots[0];
            ce.slot_b = slots[1];
            if (a + b == 8)
                ce.pattern = EpPattern::ThreeFive;
            else if (a == 5)
                ce.pattern = EpPattern::FiveFive;
            else
                ce.pattern = EpPattern::ThreeThree;
            if (a == 5 && b == 3) std::swap(ce.slot_a, ce.slot_b);  // 3 first
            out.push_back(ce);
            continue;
        }
        // three EPs: classify and pick an adjacent 3-5 pair
        int threes = 0, fives = 0;
        for (int s : slots) (val(s) == 3 ? threes : fives)++;
        ce.pattern = threes == 2 ? EpPattern::ThreeThreeFive : EpPattern::ThreeFiveFive;
        for (size_t i = 0; i < slots.size() && ce.slot_a < 0; ++i)
            for (size_t j = 0; j < slots.size(); ++j) {
                if (i == j) continue;
                if ((slots[j] - slots[i] + 4) % 4 == 1 && val(slots[i]) == 3 && val(slots[j]) == 5) {
                    ce.slot_a = slots[i];
                    ce.slot_b = slots[j];
                    break;
                }
                if ((slots[i] - slots[j] + 4) % 4 == 1 && val(slots[i]) == 3 && val(slots[j]) == 5) {
                    ce.slot_a = slots[i];
                    ce.slot_b = slots[j];
                    break;
                }
            }
        if (ce.slot_a < 0) ce.pattern = EpPattern::Other;
        out.push_back(ce);
    }
    return out;
}

namespace {

// the whole perpendicular strip through one edge: every "parallel" edge
// collapses, every strip face dissolves, the side edges of each face fuse
struct Strip {
    std::vector<std::array<int, 2>> pairs;  // vertex pairs to merge
    std::vector<int> faces;                 // faces removed
    bool closed = false;
    bool ok = false;
    std::string reason;
};

int opposite_halfedge(const QuadMesh& q, int h) { return q.he_next(q.he_next(h)); }

Strip collect_strip(const QuadMesh& q, int h0) {
    Strip s;
    std::set<int> face_seen;
    std::set<int> edge_seen;
    edge_seen.insert(q.he_edge[h0]);
    s.pairs.push_back({q.he_from(h0), q.he_to(h0)});

    // walk one direction: the entering edge is already recorded; each face
    // contributes its opposite edge and the walk continues across it
    auto expand = [&](int h) {
        while (h >= 0) {
            int f = q.he_face(h);
            if (face_seen.count(f)) {
                s.closed = true;
                return;
            }
            face_seen.insert(f);
            s.faces.push_back(f);
            int opp = opposite_halfedge(q, h);
            int e2 = q.he_edge[opp];
            if (edge_seen.count(e2)) {
                s.closed = true;
                return;
            }
            edge_seen.insert(e2);
            s.pairs.push_back({q.he_from(opp), q.he_to(opp)});
            h = q.twin[opp];
        }
    };
    expand(h0);
    if (!s.closed && q.twin[h0] >= 0) expand(q.twin[h0]);

    // dedupe merge pairs (the same undirected edge may be listed twice)
    std::set<std::pair<int, int>> uniq;
    std::vector<std::array<int, 2>> pairs;
    for (auto& p : s.pairs) {
        auto key = std::make_pair(std::min(p[0], p[1]), std::max(p[0], p[1]));
        if (uniq.insert(key).second) pairs.push_back({key.first, key.second});
    }
    s.pairs = std::move(pairs);
    s.ok = true;
    return s;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
};

// vertex priority for the merged position: corner > sharp > EP > plain
int position_rank(const QuadMesh& q, const std::vector<char>& on_sharp, int v) {
    if (q.tag[v] == QuadVertexTag::Corner) return 3;
    if (on_sharp[v]) return 2;
    if (q.is_extraordinary(v)) return 1;
    return 0;
}

CollapseResult apply_strip(const QuadMesh& q, const Strip& strip) {
    CollapseResult res;
    std::vector<char> on_sharp(q.n_vertices(), 0);
    for (int e = 0; e < q.n_edges(); ++e)
        if (!q.edge_sharp.empty() && q.edge_sharp[e]) {
            on_sharp[q.edges[e][0]] = 1;
            on_sharp[q.edges[e][1]] = 1;
        }
    std::map<std::pair<int, int>, char> edge_sharp_map, edge_boundary_map;
    for (int h = 0; h < q.n_halfedges(); ++h) {
        auto key = std::make_pair(std::min(q.he_from(h), q.he_to(h)), std::max(q.he_from(h), q.he_to(h)));
        if (!q.edge_sharp.empty() && q.edge_sharp[q.he_edge[h]]) edge_sharp_map[key] = 1;
        if (q.twin[h] < 0) edge_boundary_map[key] = 1;
    }

    // legality of each merge pair
    for (auto& p : strip.pairs) {
        int a = p[0], b = p[1];
        bool a_corner = q.tag[a] == QuadVertexTag::Corner;
        bool b_corner = q.tag[b] == QuadVertexTag::Corner;
        if (a_corner && b_corner) {
            res.reason = "strip would merge two corners";
            return res;
        }
        auto key = std::make_pair(std::min(a, b), std::max(a, b));
        bool edge_boundary = edge_boundary_map.count(key) > 0;
        bool edge_sharp = edge_sharp_map.count(key) > 0;
        if (q.vert_boundary[a] && q.vert_boundary[b] && !edge_boundary) {
            res.reason = "strip would pinch the boundary";
            return res;
        }
        if (on_sharp[a] && on_sharp[b] && !edge_sharp) {
            res.reason = "strip would merge distinct sharp features";
            return res;
        }
        if ((a_corner || b_corner) && !edge_boundary && !edge_sharp &&
            (q.vert_boundary[a] && q.vert_boundary[b])) {
            res.reason = "corner collapse off its features";
            return res;
        }
        int adjacent_quads = edge_boundary ? 1 : 2;
        int merged = q.valence[a] + q.valence[b] - 2 - adjacent_quads;
        int min_val = q.vert_boundary[a] || q.vert_boundary[b] ? 2 : 3;
        if (merged < min_val) {
            res.reason = "collapse would create an invalid valence-" + std::to_string(merged) +
                         " vertex";
            return res;
        }
    }

    UnionFind uf(q.n_vertices());
    for (auto& p : strip.pairs) {
        int ra = uf.find(p[0]), rb = uf.find(p[1]);
        if (ra != rb) uf.parent[std::max(ra, rb)] = std::min(ra, rb);
    }

    // merged positions by priority, then survivors re-anchored
    std::vector<Vector3d> pos = q.positions;
    for (auto& p : strip.pairs) {
        int a = p[0], b = p[1];
        int ra = position_rank(q, on_sharp, a), rb = position_rank(q, on_sharp, b);
        Vector3d target;
        if (ra == rb)
            target = 0.5 * (q.positions[a] + q.positions[b]);
        else
            target = ra > rb ? q.positions[a] : q.positions[b];
        pos[uf.find(a)] = target;
    }

    std::set<int> removed(strip.faces.begin(), strip.faces.end());
    QuadMesh out;
    std::vector<int> newid(q.n_vertices(), -1);
    for (int f = 0; f < q.n_faces(); ++f) {
        if (removed.count(f)) continue;
        std::array<int, 4> g;
        for (int c = 0; c < 4; ++c) g[c] = uf.find(q.faces[f][c]);
        bool degenerate = false;
        for (int c = 0; c < 4; ++c)
            for (int cc = c + 1; cc < 4; ++cc)
                if (g[c] == g[cc]) degenerate = true;
        if (degenerate) {
            res.reason = "collapse degenerates an off-strip quad";
            return res;
        }
        for (int c = 0; c < 4; ++c)
            if (newid[g[c]] < 0) {
                newid[g[c]] = out.n_vertices();
                out.positions.push_back(pos[g[c]]);
            }
        out.faces.push_back({newid[g[0]], newid[g[1]], newid[g[2]], newid[g[3]]});
    }
    if (out.faces.empty()) {
        res.reason = "collapse would remove the whole mesh";
        return res;
    }
    try {
        out.build();
    } catch (const std::exception& e) {
        res.reason = std::string("collapse breaks manifoldness: ") + e.what();
        return res;
    }
    // carry sharp flags through the merge
    out.edge_sharp.assign(out.n_edges(), 0);
    std::map<std::pair<int, int>, int> out_edge;
    for (int e = 0; e < out.n_edges(); ++e) out_edge[{out.edges[e][0], out.edges[e][1]}] = e;
    for (auto& [key, flag] : edge_sharp_map) {
        (void)flag;
        int a = newid[uf.find(key.first)], b = newid[uf.find(key.second)];
        if (a < 0 || b < 0 || a == b) continue;
        auto it = out_edge.find({std::min(a, b), std::max(a, b)});
        if (it != out_edge.end()) out.edge_sharp[it->second] = 1;
    }
    res.ok = true;
    res.mesh = std::move(out);
    res.removed_faces = int(removed.size());
    return res;
}

}  // namespace

CollapseResult collapse_adjacent(const QuadMesh& q, int face, int slot) {
    Strip strip = collect_strip(q, 4 * face + slot);
    if (!strip.ok) {
        CollapseResult r;
        r.reason = strip.reason;
        return r;
    }
    return apply_strip(q, strip);
}

CollapseResult collapse_triple(const QuadMesh& q, const ClusteredEp& c) {
    if (c.pattern != EpPattern::ThreeThreeFive && c.pattern != EpPattern::ThreeFiveFive) {
        CollapseResult r;
        r.reason = "not a triple cluster";
        return r;
    }
    // all adjacent 3-5 pairs of the face are candidates; prefer the shortest
    // legal propagation strip
    std::vector<int> slots;
    for (int s = 0; s < 4; ++s) {
        int a = q.faces[c.face][s], b = q.faces[c.face][(s + 1) % 4];
        if (!interior_ep(q, a) || !interior_ep(q, b)) continue;
        if (q.valence[a] + q.valence[b] == 8) slots.push_back(s);
    }
    if (slots.empty()) {
        CollapseResult r;
        r.reason = "triple cluster without an adjacent 3-5 pair";
        return r;
    }
    std::sort(slots.begin(), slots.end(), [&](int sa, int sb) {
        return collect_strip(q, 4 * c.face + sa).faces.size() <
               collect_strip(q, 4 * c.face + sb).faces.size();
    });
    CollapseResult last;
    for (int s : slots) {
        last = collapse_adjacent(q, c.face, s);
        if (last.ok) return last;
    }
    return last;
}

std::vector<int> find_zip_patches(const QuadMesh& q, const PatchLayout& layout) {
    std::vector<int> out;
    // separatrix endpoint pairs
    std::set<std::pair<int, int>> joined;
    for (auto& s : layout.separatrices) {
        if (s.vertices.size() < 2 || s.closed) continue;
        int a = s.vertices.front(), b = s.vertices.back();
        joined.insert({std::min(a, b), std::max(a, b)});
    }
    for (int pi = 0; pi < int(layout.patches.size()); ++pi) {
        const Patch& p = layout.patches[pi];
        int c00 = p.at(0, 0), c01 = p.at(0, p.cols - 1);
        int c11 = p.at(p.rows - 1, p.cols - 1), c10 = p.at(p.rows - 1, 0);
        auto zip_pair = [&](int a, int b) {
            return interior_ep(q, a) && interior_ep(q, b) &&
                   !joined.count({std::min(a, b), std::max(a, b)});
        };
        if (zip_pair(c00, c11) || zip_pair(c01, c10)) out.push_back(pi);
    }
    return out;
}

CollapseResult collapse_zip(const QuadMesh& q, const PatchLayout& layout, int patch) {
    CollapseResult res;
    const Patch& p = layout.patches[patch];
    bool rows_short = p.rows <= p.cols;
    // the long sides must be free to merge: not sharp, not on the boundary
    auto side_blocked = [&](int s) {
        auto side = p.side(s);
        for (size_t i = 0; i + 1 < side.size(); ++i) {
            for (int h = 0; h < q.n_halfedges(); ++h) {
                if (q.he_from(h) != side[i] || q.he_to(h) != side[i + 1]) continue;
                if (q.twin[h] < 0) return true;
                if (!q.edge_sharp.empty() && q.edge_sharp[q.he_edge[h]]) return true;
            }
        }
        return false;
    };
    int long_a = rows_short ? 0 : 3, long_b = rows_short ? 2 : 1;
    if (side_blocked(long_a) || side_blocked(long_b)) {
        res.reason = "zip long side is a sharp feature or boundary";
        return res;
    }
    // collapse the short-side edge at the EP corner; the strip propagates
    int v0, v1;
    if (rows_short) {
        v0 = p.at(0, 0);
        v1 = p.at(1, 0);
    } else {
        v0 = p.at(0, 0);
        v1 = p.at(0, 1);
    }
    for (int h = 0; h < q.n_halfedges(); ++h)
        if ((q.he_from(h) == v0 && q.he_to(h) == v1) || (q.he_from(h) == v1 && q.he_to(h) == v0)) {
            Strip strip = collect_strip(q, h);
            if (!strip.ok) {
                res.reason = strip.reason;
                return res;
            }
            return apply_strip(q, strip);
        }
    res.reason = "zip short-side edge not found";
    return res;
}

namespace {

int count_eps(const QuadMesh& q) {
    int n = 0;
    for (int v = 0; v < q.n_vertices(); ++v)
        if (q.is_extraordinary(v)) ++n;
    return n;
}

void reproject_positions(QuadMesh& q, const TriMesh& surface) {
    AabbTree tree(surface);
    std::vector<std::array<int, 2>> bsegs;
    for (int h = 0; h < surface.n_halfedges(); ++h)
        if (surface.twin[h] < 0) bsegs.push_back({surface.he_from(h), surface.he_to(h)});
    std::vector<char> on_sharp(q.n_vertices(), 0);
    for (int e = 0; e < q.n_edges(); ++e)
        if (!q.edge_sharp.empty() && q.edge_sharp[e]) {
            on_sharp[q.edges[e][0]] = 1;
            on_sharp[q.edges[e][1]] = 1;
        }
    for (int v = 0; v < q.n_vertices(); ++v) {
        if (q.tag[v] == QuadVertexTag::Corner || on_sharp[v]) continue;
        if (q.vert_boundary[v]) {
            double best = 1e300;
            Vector3d bp = q.positions[v];
            for (auto& sg : bsegs) {
                Vector3d c = closest_on_segment(q.positions[v], surface.positions[sg[0]],
                                                surface.positions[sg[1]]);
                double d2 = (c - q.positions[v]).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    bp = c;
                }
            }
            q.positions[v] = bp;
        } else {
            q.positions[v] = tree.closest_point(q.positions[v]);
        }
    }
}

}  // namespace

std::pair<QuadMesh, PatchLayout> simplify(QuadMesh q, const SimplifyConfig& config,
                                          SimplifyReport* report) {
    SimplifyReport rep;
    q.edge_sharp = detect_sharp_edges(q, config.sharp_phi);
    PatchLayout layout = extract_patches(q);
    rep.patches_before = int(layout.patches.size());
    rep.eps_before = count_eps(q);

    int patch_count = rep.patches_before;
    for (int iter = 0; iter < config.max_iters; ++iter) {
        bool progress = false;

        // cluster collapses first: they create the misalignments zips handle
        bool collapsed = true;
        while (collapsed) {
            collapsed = false;
            auto clusters = find_clustered_eps(q);
            for (auto& ce : clusters) {
                if (ce.pattern == EpPattern::Other) continue;
                if (ce.pattern == EpPattern::ThreeThree) {
                    rep.refused.push_back("3-3 cluster at face " + std::to_string(ce.face) +
                                          " postponed (would need a valence-2 vertex)");
                    continue;
                }
                int pair_slot = (ce.slot_b - ce.slot_a + 4) % 4 == 1 ? ce.slot_a : ce.slot_b;
                CollapseResult r = (ce.pattern == EpPattern::ThreeThreeFive ||
                                    ce.pattern == EpPattern::ThreeFiveFive)
                                       ? collapse_triple(q, ce)
                                       : collapse_adjacent(q, ce.face, pair_slot);
                if (!r.ok) {
                    rep.refused.push_back("cluster at face " + std::to_string(ce.face) + ": " +
                                          r.reason);
                    continue;
                }
                if (count_eps(r.mesh) > count_eps(q)) continue;  // no EP regression
                PatchLayout nl;
                try {
                    nl = extract_patches(r.mesh);
                } catch (const std::exception&) {
                    continue;
                }
                if (int(nl.patches.size()) > patch_count) continue;
                q = std::move(r.mesh);
                layout = std::move(nl);
                patch_count = int(layout.patches.size());
                ++rep.cluster_collapses;
                progress = true;
                collapsed = true;
                break;  // connectivity changed: re-detect
            }
        }

        // zip patches
        auto zips = find_zip_patches(q, layout);
        for (int z : zips) {
            CollapseResult r = collapse_zip(q, layout, z);
            if (!r.ok) {
                rep.refused.push_back("zip patch " + std::to_string(z) + ": " + r.reason);
                continue;
            }
            PatchLayout nl;
            try {
                nl = extract_patches(r.mesh);
            } catch (const std::exception&) {
                continue;
            }
            if (int(nl.patches.size()) > patch_count) continue;
            q = std::move(r.mesh);
            layout = std::move(nl);
            patch_count = int(layout.patches.size());
            ++rep.zip_collapses;
            progress = true;
            break;  // re-extract before the next zip
        }

        if (!progress) break;
        if (iter == config.max_iters - 1) rep.hit_iteration_cap = true;
    }

    if (config.reproject) reproject_positions(q, *config.reproject);
    rep.patches_after = int(layout.patches.size());
    rep.eps_after = count_eps(q);
    if (report) *report = rep;
    return {std::move(q), std::move(layout)};
}

}  // namespace untrim
