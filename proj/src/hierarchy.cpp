#include "untrim/hierarchy.hpp"

#include <algorithm>
#include <numeric>

namespace untrim {

namespace {

SolverHierarchy::Level mesh_level(const TriMesh& m, const OrientationState& st) {
    SolverHierarchy::Level l;
    l.pos = m.positions;
    l.normal = st.n;
    l.kind = st.constraints.kind;
    l.dir = st.constraints.dir;
    l.nbr_off.assign(m.n_vertices() + 1, 0);
    std::vector<std::vector<int>> rings(m.n_vertices());
    for (int v = 0; v < m.n_vertices(); ++v) rings[v] = m.vertex_ring(v);
    for (int v = 0; v < m.n_vertices(); ++v) l.nbr_off[v + 1] = l.nbr_off[v] + int(rings[v].size());
    l.nbr.resize(l.nbr_off.back());
    for (int v = 0; v < m.n_vertices(); ++v)
        std::copy(rings[v].begin(), rings[v].end(), l.nbr.begin() + l.nbr_off[v]);
    return l;
}

int stronger(VertexConstraint a, VertexConstraint b) {
    auto rank = [](VertexConstraint k) {
        return k == VertexConstraint::Fixed ? 2 : (k == VertexConstraint::Tangent ? 1 : 0);
    };
    return rank(a) >= rank(b) ? 0 : 1;
}

SolverHierarchy::Level coarsen(SolverHierarchy::Level& fine) {
    const int n = fine.n();
    std::vector<int> match(n, -1);
    // greedy maximal matching in ascending order; pinned vertices stay singletons
    for (int v = 0; v < n; ++v) {
        if (match[v] >= 0 || fine.kind[v] == VertexConstraint::Fixed) continue;
        for (int k = fine.nbr_off[v]; k < fine.nbr_off[v + 1]; ++k) {
            int w = fine.nbr[k];
            if (w <= v || match[w] >= 0 || fine.kind[w] == VertexConstraint::Fixed) continue;
            // keep boundary/crease chains separate from the interior
            if ((fine.kind[v] == VertexConstraint::Tangent) !=
                (fine.kind[w] == VertexConstraint::Tangent))
                continue;
            match[v] = w;
            match[w] = v;
            break;
        }
    }
    SolverHierarchy::Level coarse;
    fine.to_coarse.assign(n, -1);
    for (int v = 0; v < n; ++v) {
        if (fine.to_coarse[v] >= 0) continue;
        int id = coarse.n();
        if (match[v] >= 0) {
            int w = match[v];
            fine.to_coarse[v] = fine.to_coarse[w] = id;
            int keep = stronger(fine.kind[v], fine.kind[w]) == 0 ? v : w;
            coarse.kind.push_back(fine.kind[keep]);
            coarse.dir.push_back(fine.dir[keep]);
            if (fine.kind[keep] == VertexConstraint::Free)
                coarse.pos.push_back(0.5 * (fine.pos[v] + fine.pos[w]));
            else
                coarse.pos.push_back(fine.pos[keep]);
            Vector3d nsum = fine.normal[v] + fine.normal[w];
            coarse.normal.push_back(nsum.norm() > 1e-12 ? Vector3d(nsum.normalized())
                                                        : fine.normal[v]);
        } else {
            fine.to_coarse[v] = id;
            coarse.kind.push_back(fine.kind[v]);
            coarse.dir.push_back(fine.dir[v]);
            coarse.pos.push_back(fine.pos[v]);
            coarse.normal.push_back(fine.normal[v]);
        }
    }
    // coarse adjacency = union of mapped fine edges
    std::vector<std::vector<int>> adj(coarse.n());
    for (int v = 0; v < n; ++v)
        for (int k = fine.nbr_off[v]; k < fine.nbr_off[v + 1]; ++k) {
            int a = fine.to_coarse[v], b = fine.to_coarse[fine.nbr[k]];
            if (a != b) adj[a].push_back(b);
        }
    coarse.nbr_off.assign(coarse.n() + 1, 0);
    for (int v = 0; v < coarse.n(); ++v) {
        auto& av = adj[v];
        std::sort(av.begin(), av.end());
        av.erase(std::unique(av.begin(), av.end()), av.end());
        coarse.nbr_off[v + 1] = coarse.nbr_off[v] + int(av.size());
    }
    coarse.nbr.resize(coarse.nbr_off.back());
    for (int v = 0; v < coarse.n(); ++v)
        std::copy(adj[v].begin(), adj[v].end(), coarse.nbr.begin() + coarse.nbr_off[v]);
    return coarse;
}

}  // namespace

SolverHierarchy SolverHierarchy::build(const TriMesh& m, const OrientationState& seed_state,
                                       int min_vertices) {
    SolverHierarchy h;
    h.levels.push_back(mesh_level(m, seed_state));
    while (h.levels.back().n() > min_vertices) {
        Level next = coarsen(h.levels.back());
        if (next.n() >= h.levels.back().n()) break;  // no further reduction possible
        h.levels.push_back(std::move(next));
    }
    return h;
}

namespace {

void level_orientation_sweeps(const SolverHierarchy::Level& l, std::vector<Vector3d>& o,
                              int iters) {
    std::vector<int> order(l.n());
    std::iota(order.begin(), order.end(), 0);
    std::stable_partition(order.begin(), order.end(),
                          [&](int v) { return l.kind[v] != VertexConstraint::Free; });
    for (int it = 0; it < iters; ++it) {
        double max_change = 0;
        for (int v : order) {
            if (l.kind[v] == VertexConstraint::Fixed) continue;
            Vector3d before = o[v];
            Vector3d sum = o[v];
            double weight = 0;
            for (int k = l.nbr_off[v]; k < l.nbr_off[v + 1]; ++k) {
                int w = l.nbr[k];
                auto [kv, kw] = best_rotation_pair(sum, l.normal[v], o[w], l.normal[w]);
                sum = rotate90_about(sum, l.normal[v], kv) * weight +
                      rotate90_about(o[w], l.normal[w], kw);
                weight += 1;
                sum = project_to_tangent(sum, l.normal[v]);
                double len = sum.norm();
                if (len > 1e-14)
                    sum /= len;
                else
                    sum = o[v];
            }
            o[v] = sum;
            if (l.kind[v] == VertexConstraint::Tangent) {
                Vector3d d = project_to_tangent(l.dir[v], l.normal[v]).normalized();
                o[v] = o[v].dot(d) >= 0 ? d : Vector3d(-d);
            }
            max_change = std::max(max_change, angle_between(before, o[v]));
        }
        if (max_change < 1e-7) break;
    }
}

void level_position_sweeps(const SolverHierarchy::Level& l, const std::vector<Vector3d>& o,
                           std::vector<Vector3d>& p, double rho, int iters) {
    for (int it = 0; it < iters; ++it) {
        double max_change = 0;
        for (int v = 0; v < l.n(); ++v) {
            if (l.kind[v] == VertexConstraint::Fixed) {
                p[v] = l.pos[v];
                continue;
            }
            const Vector3d& nv = l.normal[v];
            const Vector3d& ov = o[v];
            Vector3d before = p[v];
            Vector3d sum = p[v];
            double weight = 0;
            for (int k = l.nbr_off[v]; k < l.nbr_off[v + 1]; ++k) {
                int w = l.nbr[k];
                auto [tv, tw] = best_translation_pair(sum, nv, ov, p[w], l.normal[w], o[w], rho);
                Vector3d xv = lattice_point(sum, nv, ov, tv, rho);
                Vector3d xw = lattice_point(p[w], l.normal[w], o[w], tw, rho);
                sum = xv * weight + xw;
                weight += 1;
                sum /= weight;
                sum -= nv * nv.dot(sum - l.pos[v]);
            }
            if (weight <= 0) continue;
            Vector3d tv2 = nv.cross(ov);
            Vector3d dv = l.pos[v] - sum;
            sum += rho * (std::round(dv.dot(ov) / rho) * ov + std::round(dv.dot(tv2) / rho) * tv2);
            if (l.kind[v] == VertexConstraint::Tangent) {
                // move along the local constraint line only
                sum = l.pos[v] + (sum - l.pos[v]).dot(l.dir[v]) * l.dir[v];
            }
            p[v] = sum;
            max_change = std::max(max_change, (before - p[v]).norm());
        }
        if (max_change < 1e-9 * rho) break;
    }
}

}  // namespace

OrientationState solve_orientation(const TriMesh& m, const FieldConstraints& fc, uint64_t seed,
                                   const FieldSolveOptions& opts) {
    OrientationState st = OrientationState::init(m, fc, seed);
    if (opts.use_hierarchy) {
        SolverHierarchy h = SolverHierarchy::build(m, st);
        int top = int(h.levels.size()) - 1;
        // seed the coarsest level from the state's (random) field
        std::vector<std::vector<Vector3d>> o(h.levels.size());
        o[0] = st.o;
        for (int l = 1; l <= top; ++l) {
            o[l].assign(h.levels[l].n(), Vector3d::Zero());
            for (int v = 0; v < h.levels[l - 1].n(); ++v)
                o[l][h.levels[l - 1].to_coarse[v]] = o[l - 1][v];
            for (int v = 0; v < h.levels[l].n(); ++v) {
                Vector3d t = project_to_tangent(o[l][v], h.levels[l].normal[v]);
                o[l][v] = t.norm() > 1e-12 ? Vector3d(t.normalized())
                                           : project_to_tangent(Vector3d::UnitX(), h.levels[l].normal[v]).normalized();
                if (h.levels[l].kind[v] != VertexConstraint::Free) {
                    Vector3d d = project_to_tangent(h.levels[l].dir[v], h.levels[l].normal[v]);
                    if (d.norm() > 1e-12) o[l][v] = d.normalized();
                }
            }
        }
        for (int l = top; l >= 1; --l) {
            level_orientation_sweeps(h.levels[l], o[l], opts.coarse_iters);
            // prolong to the finer level
            for (int v = 0; v < h.levels[l - 1].n(); ++v) {
                Vector3d t = project_to_tangent(o[l][h.levels[l - 1].to_coarse[v]],
                                                h.levels[l - 1].normal[v]);
                if (t.norm() > 1e-12) o[l - 1][v] = t.normalized();
            }
        }
        st.o = o[0];
        for (int v = 0; v < m.n_vertices(); ++v)
            if (fc.kind[v] != VertexConstraint::Free) {
                Vector3d d = project_to_tangent(fc.dir[v], st.n[v]).normalized();
                st.o[v] = st.o[v].dot(d) >= 0 ? d : Vector3d(-d);
            }
    }
    st = optimize_orientation(m, st, opts.iters, seed, opts.exit_tol);
    return match_fields(m, st);
}

LatticeState solve_position(const TriMesh& m, const OrientationState& orient, double rho,
                            double gamma, uint64_t seed, const FieldSolveOptions& opts) {
    LatticeState st = LatticeState::init(m, orient, rho, gamma, seed);
    if (opts.use_hierarchy) {
        SolverHierarchy h = SolverHierarchy::build(m, orient);
        int top = int(h.levels.size()) - 1;
        std::vector<std::vector<Vector3d>> o(h.levels.size()), p(h.levels.size());
        o[0] = orient.o;
        p[0] = st.p;
        for (int l = 1; l <= top; ++l) {
            auto& lev = h.levels[l];
            auto& fine = h.levels[l - 1];
            o[l].assign(lev.n(), Vector3d::Zero());
            p[l].assign(lev.n(), Vector3d::Zero());
            for (int v = 0; v < fine.n(); ++v) o[l][fine.to_coarse[v]] = o[l - 1][v];
            for (int v = 0; v < lev.n(); ++v) {
                Vector3d t = project_to_tangent(o[l][v], lev.normal[v]);
                o[l][v] = t.norm() > 1e-12
                              ? Vector3d(t.normalized())
                              : project_to_tangent(Vector3d::UnitX(), lev.normal[v]).normalized();
                p[l][v] = lev.pos[v];
            }
        }
        for (int l = top; l >= 1; --l) {
            level_position_sweeps(h.levels[l], o[l], p[l], rho, opts.coarse_iters);
            for (int v = 0; v < h.levels[l - 1].n(); ++v) {
                auto& fine = h.levels[l - 1];
                Vector3d q = p[l][fine.to_coarse[v]];
                q -= fine.normal[v] * fine.normal[v].dot(q - fine.pos[v]);
                p[l - 1][v] = q;
            }
        }
        st.p = p[0];
        for (int v = 0; v < m.n_vertices(); ++v)
            if (orient.constraints.kind[v] == VertexConstraint::Fixed) st.p[v] = m.positions[v];
    }
    st = optimize_position(m, orient, st, opts.iters, seed, 0.0);
    // real-valued agreement pass: origin relabelings across zero-cycle seams
    // are a gauge choice; re-solving with the integer structure fixed removes
    // them so cluster members land on identical points
    EdgeOffsets d = compute_integer_offsets(m, orient, st);
    int consensus_iters = std::max(opts.iters, 4 * (int(std::sqrt(double(m.n_vertices()))) + 1));
    return recompute_positions(m, orient, st, d, consensus_iters);
}

}  // namespace untrim
