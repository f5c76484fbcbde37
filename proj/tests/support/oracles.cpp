#include "support/oracles.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "untrim/quadmesh.hpp"

namespace oracle {

std::pair<int, int> best_rotation_pair_bruteforce(const Vector3d& oi, const Vector3d& ni,
                                                  const Vector3d& oj, const Vector3d& nj) {
    double best = 1e300;
    int bi = 0, bj = 0;
    for (int kj = 0; kj < 4; ++kj)
        for (int ki = 0; ki < 4; ++ki) {
            double a = angle_between(rotate90_about(oi, ni, ki), rotate90_about(oj, nj, kj));
            if (a < best - 1e-12) {
                best = a;
                bi = ki;
                bj = kj;
            }
        }
    return {bi, bj};
}

std::pair<Vector2i, Vector2i> best_translation_bruteforce(const Vector3d& pi, const Vector3d& ni,
                                                          const Vector3d& oi, const Vector3d& pj,
                                                          const Vector3d& nj, const Vector3d& oj,
                                                          double rho, int range) {
    double best = 1e300;
    Vector2i bi(0, 0), bj(0, 0);
    for (int a0 = -range; a0 <= range; ++a0)
        for (int a1 = -range; a1 <= range; ++a1)
            for (int b0 = -range; b0 <= range; ++b0)
                for (int b1 = -range; b1 <= range; ++b1) {
                    Vector2i ta(a0, a1), tb(b0, b1);
                    double d = (lattice_point(pi, ni, oi, ta, rho) -
                                lattice_point(pj, nj, oj, tb, rho))
                                   .squaredNorm();
                    if (d < best - 1e-15) {
                        best = d;
                        bi = ta;
                        bj = tb;
                    }
                }
    return {bi, bj};
}

int boundary_component_count(const TriMesh& m) {
    std::vector<int> parent(m.n_vertices());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
    int bedges = 0;
    for (int h = 0; h < m.n_halfedges(); ++h) {
        if (m.twin[h] >= 0) continue;
        ++bedges;
        parent[find(m.he_from(h))] = find(m.he_to(h));
    }
    if (bedges == 0) return 0;
    std::vector<char> seen(m.n_vertices(), 0);
    int comps = 0;
    for (int v = 0; v < m.n_vertices(); ++v)
        if (m.vert_boundary[v] && !seen[find(v)]) {
            seen[find(v)] = 1;
            ++comps;
        }
    return comps;
}

double expected_index_sum(const TriMesh& m) {
    double corners = 0;
    for (int v = 0; v < m.n_vertices(); ++v) {
        if (!m.vert_boundary[v]) continue;
        double turn = kPi - internal_angle(m, v);
        corners += std::round(turn / (kPi / 2)) * 0.25;
    }
    return double(euler_characteristic(m)) - corners;
}

int flood_fill_patch_count(const QuadMesh& q, const std::vector<char>& separatrix_edge) {
    std::vector<int> region(q.n_faces(), -1);
    int n = 0;
    for (int f0 = 0; f0 < q.n_faces(); ++f0) {
        if (region[f0] >= 0) continue;
        std::deque<int> queue{f0};
        region[f0] = n;
        while (!queue.empty()) {
            int f = queue.front();
            queue.pop_front();
            for (int c = 0; c < 4; ++c) {
                int h = 4 * f + c;
                if (separatrix_edge[q.he_edge[h]]) continue;
                int t = q.twin[h];
                if (t < 0) continue;
                int g = q.he_face(t);
                if (region[g] < 0) {
                    region[g] = n;
                    queue.push_back(g);
                }
            }
        }
        ++n;
    }
    return n;
}

EdgeOffsets enforce_constraints_bruteforce(const TriMesh& m, const EdgeOffsets& off,
                                           const FreezeMask& mask, int radius) {
    // enumerate candidate deltas on free components, increasing L1 cost
    std::vector<std::pair<int, int>> free_slots;  // (edge, comp)
    for (int e = 0; e < m.n_edges(); ++e)
        for (int c = 0; c < 2; ++c)
            if (!mask[e][c]) free_slots.emplace_back(e, c);
    size_t nslots = free_slots.size();
    if (nslots > 12) throw std::runtime_error("bruteforce oracle limited to tiny instances");

    auto feasible = [&](const EdgeOffsets& o) {
        for (int f = 0; f < m.n_faces(); ++f)
            if (face_cycle_sum(m, o, f) != Vector2i::Zero() || !face_consistent(m, o, f)) return false;
        return true;
    };

    EdgeOffsets best;
    long best_cost = -1;
    std::vector<int> delta(nslots, -radius);
    while (true) {
        EdgeOffsets cand = off;
        long cost = 0;
        for (size_t i = 0; i < nslots; ++i) {
            cand.d[free_slots[i].first][free_slots[i].second] += delta[i];
            cost += std::abs(delta[i]);
        }
        if ((best_cost < 0 || cost < best_cost) && feasible(cand)) {
            best = cand;
            best_cost = cost;
        }
        size_t i = 0;
        for (; i < nslots; ++i) {
            if (delta[i] < radius) {
                ++delta[i];
                break;
            }
            delta[i] = -radius;
        }
        if (i == nslots) break;
    }
    if (best_cost < 0) throw std::runtime_error("bruteforce oracle: no feasible correction in radius");
    return best;
}

}  // namespace oracle
