#include "untrim/position_field.hpp"

#include <algorithm>
#include <queue>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace untrim {

Vector3d lattice_point(const Vector3d& p, const Vector3d& n, const Vector3d& o,
                       const Vector2i& t, double rho) {
    return p + rho * (double(t[0]) * o + double(t[1]) * n.cross(o));
}

std::pair<Vector2i, Vector2i> best_translation_pair(const Vector3d& pi, const Vector3d& ni,
                                                    const Vector3d& oi, const Vector3d& pj,
                                                    const Vector3d& nj, const Vector3d& oj,
                                                    double rho) {
    const Vector3d ti = ni.cross(oi), tj = nj.cross(oj);
    const Vector3d mid = 0.5 * (pi + pj);
    const Vector3d di = mid - pi, dj = mid - pj;
    const int ai0 = int(std::floor(di.dot(oi) / rho)), ai1 = int(std::floor(di.dot(ti) / rho));
    const int aj0 = int(std::floor(dj.dot(oj) / rho)), aj1 = int(std::floor(dj.dot(tj) / rho));

    // the frames are orthonormal, so given one lattice point the other side's
    // conditional optimum is an exact componentwise round
    auto nearest_i = [&](const Vector3d& x) {
        Vector3d d = x - pi;
        return Vector2i(int(std::lround(d.dot(oi) / rho)), int(std::lround(d.dot(ti) / rho)));
    };
    auto nearest_j = [&](const Vector3d& x) {
        Vector3d d = x - pj;
        return Vector2i(int(std::lround(d.dot(oj) / rho)), int(std::lround(d.dot(tj) / rho)));
    };
    auto point_i = [&](const Vector2i& t) { return pi + rho * (double(t[0]) * oi + double(t[1]) * ti); };
    auto point_j = [&](const Vector2i& t) { return pj + rho * (double(t[0]) * oj + double(t[1]) * tj); };

    double best = 1e300;
    long best_mag = 0;
    Vector2i bi(0, 0), bj(0, 0);
    // ties prefer the smallest translations, then lexicographic order
    auto consider = [&](const Vector2i& ci, const Vector2i& cj) {
        double d2 = (point_i(ci) - point_j(cj)).squaredNorm();
        long mag = std::abs(ci[0]) + std::abs(ci[1]) + std::abs(cj[0]) + std::abs(cj[1]);
        bool better = d2 < best - 1e-14;
        if (!better && d2 < best + 1e-14) {
            better = mag < best_mag ||
                     (mag == best_mag &&
                      std::tie(ci[0], ci[1], cj[0], cj[1]) < std::tie(bi[0], bi[1], bj[0], bj[1]));
        }
        if (better) {
            best = d2;
            best_mag = mag;
            bi = ci;
            bj = cj;
        }
    };
    for (int da = -1; da <= 2; ++da)
        for (int db = -1; db <= 2; ++db) {
            Vector2i ci(ai0 + da, ai1 + db);
            consider(ci, nearest_j(point_i(ci)));
            Vector2i cj(aj0 + da, aj1 + db);
            consider(nearest_i(point_j(cj)), cj);
        }
    return {bi, bj};
}

LatticeState LatticeState::init(const TriMesh& m, const OrientationState& orient, double rho,
                                double gamma, uint64_t rng_seed) {
    if (rho <= 0) throw std::runtime_error("grid spacing rho must be positive");
    LatticeState s;
    s.rho = rho;
    s.gamma = gamma;
    s.p.resize(m.n_vertices());
    Rng rng(rng_seed);
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (orient.constraints.kind[v] == VertexConstraint::Fixed) {
            s.p[v] = m.positions[v];
            continue;
        }
        Vector3d u = orient.o[v];
        Vector3d w = orient.n[v].cross(u);
        double r = 0.25 * rho * rng.next_double();
        double a = rng.uniform(0, 2 * kPi);
        Vector3d p = m.positions[v] + r * (std::cos(a) * u + std::sin(a) * w);
        if (orient.constraints.kind[v] == VertexConstraint::Tangent) {
            // stay on the constraint polyline from the start
            const Vector3d& dir = orient.constraints.dir[v];
            p = m.positions[v] + (p - m.positions[v]).dot(dir) * dir;
        }
        s.p[v] = p;
    }
    return s;
}

namespace {

struct Csr {
    std::vector<int> off, nbr, edge;
};

Csr build_adjacency(const TriMesh& m) {
    Csr a;
    a.off.assign(m.n_vertices() + 1, 0);
    std::vector<std::vector<std::pair<int, int>>> rings(m.n_vertices());
    for (int v = 0; v < m.n_vertices(); ++v) {
        auto hs = m.outgoing_halfedges(v);
        for (int h : hs) rings[v].emplace_back(m.he_to(h), m.he_edge[h]);
        if (!hs.empty()) {
            int hp = m.he_prev(hs.back());
            if (m.twin[hp] < 0) rings[v].emplace_back(m.he_from(hp), m.he_edge[hp]);
        }
    }
    for (int v = 0; v < m.n_vertices(); ++v) a.off[v + 1] = a.off[v] + int(rings[v].size());
    a.nbr.resize(a.off.back());
    a.edge.resize(a.off.back());
    for (int v = 0; v < m.n_vertices(); ++v)
        for (size_t i = 0; i < rings[v].size(); ++i) {
            a.nbr[a.off[v] + i] = rings[v][i].first;
            a.edge[a.off[v] + i] = rings[v][i].second;
        }
    return a;
}

// closest point over a vertex's candidate constraint segments
Vector3d project_to_curve(const TriMesh& m, const FieldConstraints& fc, int v, const Vector3d& p,
                          int* seg_out = nullptr) {
    double best = 1e300;
    Vector3d bp = p;
    int bs = -1;
    for (int s : fc.vertex_segments[v]) {
        auto& seg = fc.curve_segments[s];
        Vector3d q = closest_on_segment(p, m.positions[seg[0]], m.positions[seg[1]]);
        double d2 = (q - p).squaredNorm();
        if (d2 < best) {
            best = d2;
            bp = q;
            bs = s;
        }
    }
    if (seg_out) *seg_out = bs;
    return bp;
}

void impose_position_constraint(const TriMesh& m, const OrientationState& orient,
                                LatticeState& s, int v, bool reanchor) {
    const auto& fc = orient.constraints;
    if (fc.kind[v] == VertexConstraint::Fixed) {
        s.p[v] = m.positions[v];
        return;
    }
    if (fc.kind[v] == VertexConstraint::Tangent) {
        Vector3d q = project_to_curve(m, fc, v, s.p[v]);
        if (reanchor) {
            // step along the curve tangent by whole cells toward the vertex
            const Vector3d& dir = fc.dir[v];
            double slide = (m.positions[v] - q).dot(dir) / s.rho;
            q += s.rho * std::round(slide) * dir;
            q = project_to_curve(m, fc, v, q);
        }
        s.p[v] = q;
        return;
    }
    if (fc.near_curve[v] && !fc.vertex_segments[v].empty()) {
        // condition 2: an interior origin may not cross the boundary
        int seg = -1;
        Vector3d q = project_to_curve(m, fc, v, s.p[v], &seg);
        if (seg >= 0 && fc.segment_boundary[seg]) {
            auto& sg = fc.curve_segments[seg];
            Vector3d t = (m.positions[sg[1]] - m.positions[sg[0]]).normalized();
            Vector3d inward = orient.n[v].cross(t);
            if ((s.p[v] - q).dot(inward) < 0) s.p[v] = q;
        }
    }
}

}  // namespace

namespace {

// linear Gauss-Seidel consensus with the integer structure held fixed;
// collapses the real-valued residue the rounding sweeps leave behind
void consensus_solve(const TriMesh& m, const OrientationState& orient, LatticeState& state,
                     const EdgeOffsets& d, const Csr& adj, int iters) {
    for (int it = 0; it < iters; ++it) {
        double max_change = 0;
        for (int v = 0; v < m.n_vertices(); ++v) {
            if (orient.constraints.kind[v] == VertexConstraint::Fixed) {
                state.p[v] = m.positions[v];
                continue;
            }
            Vector3d acc = Vector3d::Zero();
            double wsum = 0;
            Vector3d tv = orient.n[v].cross(orient.o[v]);
            for (int k = adj.off[v]; k < adj.off[v + 1]; ++k) {
                int w = adj.nbr[k];
                Vector2i dvw = d.directed(m, adj.edge[k], v);
                acc += state.p[w] - state.rho * (double(dvw[0]) * orient.o[v] + double(dvw[1]) * tv);
                wsum += 1;
            }
            if (wsum <= 0) continue;
            Vector3d before = state.p[v];
            Vector3d p = acc / wsum;
            p -= orient.n[v] * orient.n[v].dot(p - m.positions[v]);
            state.p[v] = p;
            impose_position_constraint(m, orient, state, v, false);
            max_change = std::max(max_change, (before - state.p[v]).norm());
        }
        if (max_change < 1e-12 * state.rho) break;
    }
}

}  // namespace

double position_energy(const TriMesh& m, const OrientationState& orient, const LatticeState& s) {
    double e = 0;
    for (auto& edge : m.edges) {
        int a = edge[0], b = edge[1];
        auto [ta, tb] = best_translation_pair(s.p[a], orient.n[a], orient.o[a], s.p[b],
                                              orient.n[b], orient.o[b], s.rho);
        e += 2.0 * (lattice_point(s.p[a], orient.n[a], orient.o[a], ta, s.rho) -
                    lattice_point(s.p[b], orient.n[b], orient.o[b], tb, s.rho))
                       .squaredNorm();
    }
    return e;
}

LatticeState optimize_position(const TriMesh& m, const OrientationState& orient, LatticeState state,
                               int iters, uint64_t rng_seed, double exit_tol) {
    (void)rng_seed;
    if (state.rho <= 0) throw std::runtime_error("grid spacing rho must be positive");
    Csr adj = build_adjacency(m);
    std::vector<int> boundary, interior;
    for (int v = 0; v < m.n_vertices(); ++v)
        (orient.constraints.constrained(v) ? boundary : interior).push_back(v);
    std::vector<int> order = boundary;
    order.insert(order.end(), interior.begin(), interior.end());

    const double rho = state.rho;
    for (int it = 0; it < iters; ++it) {
        double max_change = 0;
        for (int v : order) {
            if (orient.constraints.kind[v] == VertexConstraint::Fixed) continue;
            const Vector3d& nv = orient.n[v];
            const Vector3d& ov = orient.o[v];
            Vector3d before = state.p[v];
            // running blend of matched lattice points; translation invariance of
            // the lattice lets the blended point stand in for the origin
            Vector3d sum = state.p[v];
            double weight = 0;
            for (int k = adj.off[v]; k < adj.off[v + 1]; ++k) {
                int w = adj.nbr[k];
                auto [tv, tw] = best_translation_pair(sum, nv, ov, state.p[w],
                                                      orient.n[w], orient.o[w], rho);
                Vector3d xv = lattice_point(sum, nv, ov, tv, rho);
                Vector3d xw = lattice_point(state.p[w], orient.n[w], orient.o[w], tw, rho);
                sum = xv * weight + xw * orient.omega;
                weight += orient.omega;
                sum /= weight;
                sum -= nv * nv.dot(sum - m.positions[v]);  // tangent plane through the vertex
            }
            if (weight <= 0) continue;
            // rounding: re-anchor the origin at the lattice point nearest the vertex
            Vector3d tv2 = nv.cross(ov);
            Vector3d dv = m.positions[v] - sum;
            sum += rho * (std::round(dv.dot(ov) / rho) * ov + std::round(dv.dot(tv2) / rho) * tv2);
            state.p[v] = sum;
            impose_position_constraint(m, orient, state, v, true);
            max_change = std::max(max_change, (before - state.p[v]).norm());
        }
        if (max_change < exit_tol * rho) break;
    }
    return state;
}

Vector2i EdgeOffsets::directed(const TriMesh& m, int edge, int from) const {
    if (m.edges[edge][0] == from) return d[edge];
    return -(rot2i(k[edge].second, k[edge].first) * d[edge]);
}

Matrix2i EdgeOffsets::transport(const TriMesh& m, int edge, int to_frame_of) const {
    // maps 2D integer coordinates from the far frame into to_frame_of's frame
    if (m.edges[edge][0] == to_frame_of) return rot2i(k[edge].first, k[edge].second);
    return rot2i(k[edge].second, k[edge].first);
}

EdgeOffsets compute_integer_offsets(const TriMesh& m, const OrientationState& orient,
                                    const LatticeState& s) {
    EdgeOffsets off;
    off.d.resize(m.n_edges());
    off.k.resize(m.n_edges());
    for (int e = 0; e < m.n_edges(); ++e) {
        int u = m.edges[e][0], v = m.edges[e][1];
        auto kp = best_rotation_pair(orient.o[u], orient.n[u], orient.o[v], orient.n[v]);
        auto [tu, tv] = best_translation_pair(s.p[u], orient.n[u], orient.o[u], s.p[v],
                                              orient.n[v], orient.o[v], s.rho);
        off.k[e] = kp;
        off.d[e] = tu - rot2i(kp.first, kp.second) * tv;
    }
    return off;
}

namespace {

std::vector<char> curve_edge_flags(const TriMesh& m, const std::vector<char>& sharp_edges) {
    std::vector<char> flag(m.n_edges(), 0);
    for (int h = 0; h < m.n_halfedges(); ++h)
        if (m.twin[h] < 0) flag[m.he_edge[h]] = 1;
    if (!sharp_edges.empty())
        for (int e = 0; e < m.n_edges(); ++e)
            if (sharp_edges[e]) flag[e] = 1;
    return flag;
}

}  // namespace

int project_boundary_offsets(const TriMesh& m, const OrientationState& orient,
                             const LatticeState& s, EdgeOffsets& off,
                             const std::vector<char>& sharp_edges) {
    auto flag = curve_edge_flags(m, sharp_edges);
    int clamped = 0;
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!flag[e] || off.d[e][0] == 0 || off.d[e][1] == 0) continue;
        int u = m.edges[e][0], v = m.edges[e][1];
        Vector3d dvec = s.p[v] - s.p[u];
        Vector3d axis0 = orient.o[u];
        Vector3d axis1 = orient.n[u].cross(axis0);
        if (std::abs(dvec.dot(axis0)) > std::abs(dvec.dot(axis1)))
            off.d[e][1] = 0;
        else
            off.d[e][0] = 0;
        ++clamped;
    }
    return clamped;
}

FreezeMask freeze_boundary_offsets(const TriMesh& m, const EdgeOffsets& off,
                                   const std::vector<char>& sharp_edges) {
    auto flag = curve_edge_flags(m, sharp_edges);
    FreezeMask mask(m.n_edges(), {0, 0});
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!flag[e]) continue;
        const Vector2i& d = off.d[e];
        if (d[0] != 0 && d[1] != 0)
            throw std::runtime_error("boundary offset with two nonzero components on edge " +
                                     std::to_string(e) + "; boundary frame alignment failed upstream");
        if (d[0] == 0) mask[e][0] = 1;
        if (d[1] == 0) mask[e][1] = 1;
    }
    return mask;
}

Vector2i face_cycle_sum(const TriMesh& m, const EdgeOffsets& off, int f) {
    // d_01 + R(0<-1) d_12 + R(0<-2) d_20, everything in v0's frame
    int v0 = m.faces[f][0], v1 = m.faces[f][1], v2 = m.faces[f][2];
    int e01 = m.he_edge[3 * f + 0], e12 = m.he_edge[3 * f + 1], e20 = m.he_edge[3 * f + 2];
    Vector2i sum = off.directed(m, e01, v0);
    sum += off.transport(m, e01, v0) * off.directed(m, e12, v1);
    sum += off.transport(m, e20, v0) * off.directed(m, e20, v2);
    return sum;
}

bool face_consistent(const TriMesh& m, const EdgeOffsets& off, int f) {
    // non-fold-over: the two offsets leaving v0 keep the face's winding
    int v0 = m.faces[f][0];
    Vector2i a = off.directed(m, m.he_edge[3 * f + 0], v0);
    Vector2i b = off.directed(m, m.he_edge[3 * f + 2], v0);
    return a[0] * b[1] - a[1] * b[0] >= 0;
}

namespace {

int face_violation(const TriMesh& m, const EdgeOffsets& off, int f) {
    Vector2i s = face_cycle_sum(m, off, f);
    return std::abs(s[0]) + std::abs(s[1]) + (face_consistent(m, off, f) ? 0 : 1);
}

}  // namespace

EdgeOffsets enforce_offset_constraints(const TriMesh& m, EdgeOffsets off, const FreezeMask& mask) {
    // faces adjacent to each undirected edge
    std::vector<std::array<int, 2>> efaces(m.n_edges(), {-1, -1});
    for (int h = 0; h < m.n_halfedges(); ++h) {
        auto& ef = efaces[m.he_edge[h]];
        if (ef[0] < 0)
            ef[0] = m.he_face(h);
        else if (ef[0] != m.he_face(h))
            ef[1] = m.he_face(h);
    }
    const long budget = 50l * std::max(1, m.n_faces());
    long steps = 0;

    // d(S_f)/d(d[edge][comp]): always a signed unit vector, so defect units
    // travel along typed channels that rotate with the frame transports
    auto jacobian = [&](int f, int slot) -> Matrix2i {
        int h = 3 * f + slot;
        int e = m.he_edge[h];
        Matrix2i D = m.edges[e][0] == m.he_from(h)
                         ? Matrix2i(Matrix2i::Identity())
                         : Matrix2i(-(rot2i(off.k[e].second, off.k[e].first)));
        if (slot == 0) return D;
        if (slot == 1) return off.transport(m, m.he_edge[3 * f + 0], m.faces[f][0]) * D;
        return off.transport(m, m.he_edge[3 * f + 2], m.faces[f][0]) * D;
    };
    auto dir_code = [](const Vector2i& u) {
        if (u == Vector2i(1, 0)) return 0;
        if (u == Vector2i(0, 1)) return 1;
        if (u == Vector2i(-1, 0)) return 2;
        return 3;
    };
    auto code_dir = [](int c) {
        static const int table[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return Vector2i(table[c][0], table[c][1]);
    };

    struct Move {
        int edge, comp, delta;
    };
    auto apply = [&](const Move& mv) { off.d[mv.edge][mv.comp] += mv.delta; };
    auto revert = [&](std::vector<Move>& log) {
        for (auto it = log.rbegin(); it != log.rend(); ++it) off.d[it->edge][it->comp] -= it->delta;
        log.clear();
    };

    std::vector<Vector2i> cycles(m.n_faces());
    auto recompute_cycles = [&]() {
        for (int f = 0; f < m.n_faces(); ++f) cycles[f] = face_cycle_sum(m, off, f);
    };

    // Routes one defect unit u out of face f by a breadth-first search over
    // (face, pending unit) states; returns the applied moves, empty on failure.
    auto route_unit = [&](int f0, const Vector2i& u0,
                          const std::array<int, 3>& forbidden = {-1, -1, -1}) -> std::vector<Move> {
        const int nstates = 4 * m.n_faces();
        std::vector<int> parent_state(nstates, -2);
        std::vector<Move> parent_move(nstates, {-1, 0, 0});
        auto sid = [&](int f, int c) { return 4 * f + c; };
        std::deque<int> qu;
        int start = sid(f0, dir_code(u0));
        parent_state[start] = -1;
        qu.push_back(start);
        int final_state = -1;
        Move final_move{-1, 0, 0};
        while (!qu.empty() && final_state < 0) {
            int s = qu.front();
            qu.pop_front();
            int f = s / 4;
            Vector2i w = code_dir(s % 4);
            for (int slot = 0; slot < 3 && final_state < 0; ++slot) {
                int e = m.he_edge[3 * f + slot];
                if (e == forbidden[0] || e == forbidden[1] || e == forbidden[2]) continue;
                Matrix2i J = jacobian(f, slot);
                for (int comp = 0; comp < 2; ++comp) {
                    if (mask[e][comp]) continue;
                    Vector2i col(J(0, comp), J(1, comp));
                    int delta;
                    if (col == -w)
                        delta = 1;
                    else if (col == w)
                        delta = -1;
                    else
                        continue;
                    int g = efaces[e][0] == f ? efaces[e][1] : efaces[e][0];
                    if (g < 0) {  // boundary edge absorbs the unit
                        final_state = s;
                        final_move = {e, comp, delta};
                        break;
                    }
                    // the same move adds w_in to the neighbor's cycle
                    int gslot = 0;
                    while (m.he_edge[3 * g + gslot] != e) ++gslot;
                    Matrix2i Jg = jacobian(g, gslot);
                    Vector2i w_in = Vector2i(Jg(0, comp), Jg(1, comp)) * delta;
                    if ((cycles[g] + w_in).cwiseAbs().sum() < cycles[g].cwiseAbs().sum()) {
                        final_state = s;  // cancels against a defect in g
                        final_move = {e, comp, delta};
                        break;
                    }
                    int ns = sid(g, dir_code(w_in));
                    if (parent_state[ns] == -2) {
                        parent_state[ns] = s;
                        parent_move[ns] = {e, comp, delta};
                        qu.push_back(ns);
                    }
                }
            }
        }
        std::vector<Move> log;
        if (final_state < 0) return log;
        for (int s = final_state; parent_state[s] >= 0; s = parent_state[s])
            log.push_back(parent_move[s]);
        std::reverse(log.begin(), log.end());
        log.push_back(final_move);
        for (auto& mv : log) apply(mv);
        return log;
    };

    // phase 1: zero every cycle sum
    recompute_cycles();
    while (true) {
        int f = -1;
        long worst = 0;
        for (int g = 0; g < m.n_faces(); ++g) {
            long v = cycles[g].cwiseAbs().sum();
            if (v > worst) {
                worst = v;
                f = g;
            }
        }
        if (f < 0) break;
        bool free_somewhere = false;
        for (int slot = 0; slot < 3; ++slot) {
            int e = m.he_edge[3 * f + slot];
            if (!mask[e][0] || !mask[e][1]) free_somewhere = true;
        }
        if (!free_somewhere)
            throw std::runtime_error("offset constraints infeasible: triangle " + std::to_string(f) +
                                     " violates them with every component frozen");
        Vector2i u = cycles[f][0] != 0 ? Vector2i((cycles[f][0] > 0) - (cycles[f][0] < 0), 0)
                                       : Vector2i(0, (cycles[f][1] > 0) - (cycles[f][1] < 0));
        auto log = route_unit(f, u);
        if (log.empty())
            throw std::runtime_error("offset constraint repair could not route a defect out of triangle " +
                                     std::to_string(f));
        steps += long(log.size());
        if (steps > budget) throw std::runtime_error("offset constraint repair exceeded its step budget");
        recompute_cycles();
    }

    // phase 2: fix fold-overs with zero-cycle-preserving move pairs whose side
    // effects are routed away like phase-1 defects; deep folds improve one
    // integer step at a time, and routing can disturb earlier faces, so scan
    // in passes until clean
    auto face_det = [&](int f) {
        int v0 = m.faces[f][0];
        Vector2i a = off.directed(m, m.he_edge[3 * f + 0], v0);
        Vector2i b = off.directed(m, m.he_edge[3 * f + 2], v0);
        return a[0] * b[1] - a[1] * b[0];
    };
    // routing may fold other faces back; a fix only counts when the global
    // negative-determinant depth strictly improves, which rules out two folds
    // endlessly trading places
    auto fold_depth = [&]() {
        long depth = 0;
        for (int f = 0; f < m.n_faces(); ++f) depth += std::min(face_det(f), 0);
        return depth;
    };
    for (int pass = 0; pass < 32; ++pass) {
    bool any_fold = false;
    bool progress = false;
    for (int f = 0; f < m.n_faces(); ++f) {
        if (face_consistent(m, off, f)) continue;
        any_fold = true;
        bool fixed = false;
        for (int s1 = 0; s1 < 3 && !fixed; ++s1)
            for (int c1 = 0; c1 < 2 && !fixed; ++c1)
                for (int d1 = -1; d1 <= 1 && !fixed; d1 += 2)
                    for (int s2 = 0; s2 < 3 && !fixed; ++s2)
                        for (int c2 = 0; c2 < 2 && !fixed; ++c2)
                            for (int d2 = -1; d2 <= 1 && !fixed; d2 += 2) {
                                int e1 = m.he_edge[3 * f + s1], e2 = m.he_edge[3 * f + s2];
                                int det_before = face_det(f);
                                long depth_before = fold_depth();
                                if (mask[e1][c1] || mask[e2][c2]) continue;
                                if (e1 == e2 && c1 == c2) continue;
                                Matrix2i J1 = jacobian(f, s1), J2 = jacobian(f, s2);
                                Vector2i eff = Vector2i(J1(0, c1), J1(1, c1)) * d1 +
                                               Vector2i(J2(0, c2), J2(1, c2)) * d2;
                                if (eff != Vector2i::Zero()) continue;
                                std::vector<Move> log{{e1, c1, d1}, {e2, c2, d2}};
                                for (auto& mv : log) apply(mv);
                                if (face_det(f) <= det_before) {
                                    revert(log);
                                    continue;
                                }
                                // route the units pushed into the two neighbors,
                                // keeping the routes off this face's own edges
                                recompute_cycles();
                                std::array<int, 3> fedges = {m.he_edge[3 * f + 0],
                                                             m.he_edge[3 * f + 1],
                                                             m.he_edge[3 * f + 2]};
                                std::vector<Move> routed;
                                bool ok = true;
                                for (int g = 0; g < m.n_faces() && ok; ++g) {
                                    while (cycles[g] != Vector2i::Zero()) {
                                        Vector2i u = cycles[g][0] != 0
                                                         ? Vector2i((cycles[g][0] > 0) - (cycles[g][0] < 0), 0)
                                                         : Vector2i(0, (cycles[g][1] > 0) - (cycles[g][1] < 0));
                                        auto rl = route_unit(g, u, fedges);
                                        if (rl.empty()) {
                                            ok = false;
                                            break;
                                        }
                                        routed.insert(routed.end(), rl.begin(), rl.end());
                                        recompute_cycles();
                                    }
                                }
                                if (!ok || face_det(f) <= det_before || fold_depth() <= depth_before) {
                                    revert(routed);
                                    revert(log);
                                    recompute_cycles();
                                    continue;
                                }
                                steps += 2 + long(routed.size());
                                if (steps > budget)
                                    throw std::runtime_error(
                                        "offset constraint repair exceeded its step budget");
                                fixed = true;
                            }
        if (fixed) progress = true;
    }
    if (!any_fold) return off;
    if (!progress)
        for (int f = 0; f < m.n_faces(); ++f)
            if (!face_consistent(m, off, f))
                throw std::runtime_error("could not remove the fold-over on triangle " +
                                         std::to_string(f));
    }
    for (int f = 0; f < m.n_faces(); ++f)
        if (!face_consistent(m, off, f))
            throw std::runtime_error("could not remove the fold-over on triangle " + std::to_string(f));
    return off;
}

int normalize_offsets(const TriMesh& m, EdgeOffsets& off, const FreezeMask& mask) {
    Csr adj = build_adjacency(m);
    const Vector2i dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    int moves = 0;
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (int v = 0; v < m.n_vertices(); ++v) {
            for (const Vector2i& delta : dirs) {
                // change of the canonical d per incident edge when v's anchor
                // steps by delta in v's own frame
                long gain = 0;
                bool allowed = true;
                for (int k = adj.off[v]; k < adj.off[v + 1] && allowed; ++k) {
                    int e = adj.edge[k];
                    Vector2i ch = m.edges[e][0] == v
                                      ? Vector2i(-delta)
                                      : Vector2i(rot2i(off.k[e].first, off.k[e].second) * delta);
                    for (int c = 0; c < 2; ++c)
                        if (ch[c] != 0 && mask[e][c]) allowed = false;
                    if (!allowed) break;
                    gain += (off.d[e] + ch).cwiseAbs().sum() - off.d[e].cwiseAbs().sum();
                }
                if (!allowed || gain >= 0) continue;
                for (int k = adj.off[v]; k < adj.off[v + 1]; ++k) {
                    int e = adj.edge[k];
                    off.d[e] += m.edges[e][0] == v
                                    ? Vector2i(-delta)
                                    : Vector2i(rot2i(off.k[e].first, off.k[e].second) * delta);
                }
                ++moves;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return moves;
}

std::vector<int> position_singularities(const TriMesh& m, const EdgeOffsets& off) {
    std::vector<int> out;
    for (int f = 0; f < m.n_faces(); ++f)
        if (face_cycle_sum(m, off, f) != Vector2i::Zero()) out.push_back(f);
    return out;
}

LatticeState recompute_positions(const TriMesh& m, const OrientationState& orient,
                                 LatticeState state, const EdgeOffsets& d_star, int iters) {
    Csr adj = build_adjacency(m);
    consensus_solve(m, orient, state, d_star, adj, iters);
    return state;
}

}  // namespace untrim
