#include <doctest.h>

#include "support/oracles.hpp"
#include "untrim/hierarchy.hpp"
#include "untrim/position_field.hpp"
#include "untrim/synthetic.hpp"

using namespace untrim;

namespace {

struct Fields {
    TriMesh mesh;
    OrientationState orient;
    LatticeState lattice;
};

Fields solve_fields(TriMesh m, double rho, uint64_t seed = 7) {
    Fields f;
    f.mesh = std::move(m);
    auto fc = build_field_constraints(f.mesh, kPi / 4);
    FieldSolveOptions opts;
    opts.iters = 300;
    f.orient = solve_orientation(f.mesh, fc, seed, opts);
    f.lattice = solve_position(f.mesh, f.orient, rho, 1.4, seed, opts);
    return f;
}

}  // namespace

TEST_CASE("lattice_point") {
    Vector3d p(0, 0, 0), n(0, 0, 1), o(1, 0, 0);
    CHECK(lattice_point(p, n, o, Vector2i(0, 0), 0.5) == p);
    CHECK((lattice_point(p, n, o, Vector2i(2, 1), 0.5) - Vector3d(1.0, 0.5, 0)).norm() < 1e-15);
    Vector3d a = lattice_point(p, n, o, Vector2i(-1, 0), 0.5);
    Vector3d b = lattice_point(p, n, o, Vector2i(1, 0), 0.5);
    CHECK(((a + b) / 2 - p).norm() < 1e-15);
}

TEST_CASE("best_translation_pair matches the brute-force oracle") {
    Vector3d n(0, 0, 1), o(1, 0, 0);
    double rho = 0.5;
    SUBCASE("identical origins") {
        auto [ti, tj] = best_translation_pair(Vector3d(0, 0, 0), n, o, Vector3d(0, 0, 0), n, o, rho);
        CHECK(ti == Vector2i(0, 0));
        CHECK(tj == Vector2i(0, 0));
    }
    SUBCASE("one-step offset ties break lexicographically") {
        Vector3d pi(0, 0, 0), pj = pi + rho * o;
        auto [ti, tj] = best_translation_pair(pi, n, o, pj, n, o, rho);
        CHECK((lattice_point(pi, n, o, ti, rho) - lattice_point(pj, n, o, tj, rho)).norm() < 1e-14);
        CHECK(ti == Vector2i(0, 0));
        CHECK(tj == Vector2i(-1, 0));
    }
    SUBCASE("half-step offset") {
        Vector3d pi(0, 0, 0), pj = pi + 0.5 * rho * o;
        auto lib = best_translation_pair(pi, n, o, pj, n, o, rho);
        auto orc = oracle::best_translation_bruteforce(pi, n, o, pj, n, o, rho);
        double dl = (lattice_point(pi, n, o, lib.first, rho) - lattice_point(pj, n, o, lib.second, rho)).norm();
        double dor = (lattice_point(pi, n, o, orc.first, rho) - lattice_point(pj, n, o, orc.second, rho)).norm();
        CHECK(dl == doctest::Approx(dor).epsilon(1e-12));
    }
    SUBCASE("random pairs achieve the brute-force distance") {
        Rng rng(5);
        for (int t = 0; t < 100; ++t) {
            Vector3d ni = Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 1).normalized();
            Vector3d nj = Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 1).normalized();
            Vector3d oi = project_to_tangent(Vector3d(1, rng.uniform(-1, 1), rng.uniform(-1, 1)), ni).normalized();
            Vector3d oj = project_to_tangent(Vector3d(1, rng.uniform(-1, 1), rng.uniform(-1, 1)), nj).normalized();
            Vector3d pi(rng.uniform(-.4, .4), rng.uniform(-.4, .4), rng.uniform(-.1, .1));
            Vector3d pj(rng.uniform(-.4, .4), rng.uniform(-.4, .4), rng.uniform(-.1, .1));
            auto lib = best_translation_pair(pi, ni, oi, pj, nj, oj, 0.3);
            auto orc = oracle::best_translation_bruteforce(pi, ni, oi, pj, nj, oj, 0.3);
            double dl = (lattice_point(pi, ni, oi, lib.first, 0.3) - lattice_point(pj, nj, oj, lib.second, 0.3)).norm();
            double dor = (lattice_point(pi, ni, oi, orc.first, 0.3) - lattice_point(pj, nj, oj, orc.second, 0.3)).norm();
            CHECK(dl <= dor + 1e-12);
        }
    }
}

TEST_CASE("rho must be positive") {
    TriMesh m = synth::rectangle(2, 2);
    auto fc = build_field_constraints(m, kPi / 4);
    auto orient = OrientationState::init(m, fc, 1);
    CHECK_THROWS(LatticeState::init(m, orient, 0.0, 1.4, 1));
}

TEST_CASE("flat square snaps to the exact lattice") {
    Fields f = solve_fields(synth::rectangle(8, 8, 4.0, 4.0), 1.0);
    CHECK(position_energy(f.mesh, f.orient, f.lattice) < 1e-10);
    for (int v = 0; v < f.mesh.n_vertices(); ++v) {
        const Vector3d& p = f.lattice.p[v];
        CHECK((p - f.mesh.positions[v]).norm() < f.lattice.rho);
        CHECK(std::abs(p.x() - std::round(p.x())) < 1e-7);
        CHECK(std::abs(p.y() - std::round(p.y())) < 1e-7);
        CHECK(std::abs(p.z()) < 1e-9);
        if (f.orient.constraints.kind[v] == VertexConstraint::Tangent) {
            bool on_boundary = std::abs(p.x()) < 1e-7 || std::abs(p.x() - 4) < 1e-7 ||
                               std::abs(p.y()) < 1e-7 || std::abs(p.y() - 4) < 1e-7;
            CHECK(on_boundary);
        }
    }
}

TEST_CASE("corner origins coincide with their vertices exactly") {
    Fields f = solve_fields(synth::rectangle(6, 6, 3.0, 3.0), 0.75);
    for (int v = 0; v < f.mesh.n_vertices(); ++v)
        if (f.orient.constraints.kind[v] == VertexConstraint::Fixed)
            CHECK(f.lattice.p[v] == f.mesh.positions[v]);
}

TEST_CASE("shifted square keeps boundary origins on the boundary") {
    TriMesh m = synth::rectangle(8, 8, 4.0, 4.0);
    for (auto& p : m.positions) p.x() += 0.3;
    m.build();
    Fields f = solve_fields(std::move(m), 1.0);
    for (int v = 0; v < f.mesh.n_vertices(); ++v) {
        CHECK((f.lattice.p[v] - f.mesh.positions[v]).norm() < f.lattice.rho);
        if (f.orient.constraints.kind[v] != VertexConstraint::Tangent) continue;
        const Vector3d& p = f.lattice.p[v];
        bool on_boundary = std::abs(p.x() - 0.3) < 1e-7 || std::abs(p.x() - 4.3) < 1e-7 ||
                           std::abs(p.y()) < 1e-7 || std::abs(p.y() - 4) < 1e-7;
        CHECK(on_boundary);
    }
}

TEST_CASE("position energy is non-increasing across sweeps") {
    TriMesh m = synth::rectangle(8, 8, 4.0, 4.0);
    auto fc = build_field_constraints(m, kPi / 4);
    auto orient = OrientationState::init(m, fc, 3);
    orient = optimize_orientation(m, orient, 300, 3, 1e-12);
    orient = match_fields(m, orient);
    auto lat = LatticeState::init(m, orient, 1.0, 1.4, 3);
    double prev = position_energy(m, orient, lat);
    for (int s = 0; s < 40; ++s) {
        lat = optimize_position(m, orient, lat, 1, 3, 0.0);
        double e = position_energy(m, orient, lat);
        CHECK(e <= prev + 1e-9 * lat.rho * lat.rho);
        prev = e;
    }
}

TEST_CASE("uniqueness bound holds after every sweep") {
    TriMesh m = synth::sine_sheet(10);
    auto fc = build_field_constraints(m, kPi / 4);
    auto orient = OrientationState::init(m, fc, 9);
    orient = optimize_orientation(m, orient, 200, 9, 1e-10);
    orient = match_fields(m, orient);
    double rho = 1.4 * m.mean_edge_length();
    auto lat = LatticeState::init(m, orient, rho, 1.4, 9);
    for (int s = 0; s < 15; ++s) {
        lat = optimize_position(m, orient, lat, 1, 9, 0.0);
        for (int v = 0; v < m.n_vertices(); ++v)
            CHECK((lat.p[v] - m.positions[v]).norm() < rho);
    }
}

TEST_CASE("integer offset arithmetic") {
    SUBCASE("aligned frames give the plain difference") {
        CHECK(rot2i(0, 0) == Matrix2i::Identity());
        Vector2i t_ij(1, 0), t_ji(0, 0);
        Vector2i d = t_ij - rot2i(0, 0) * t_ji;
        CHECK(d == Vector2i(1, 0));
    }
    SUBCASE("quarter-turn frame difference rotates the reverse translation") {
        Vector2i t_ij(0, 0), t_ji(1, 0);
        Vector2i d = t_ij - rot2i(1, 0) * t_ji;
        CHECK(d == Vector2i(0, -1));
    }
    SUBCASE("antisymmetry of directed offsets") {
        TriMesh m = synth::rectangle(4, 4);
        Fields f = solve_fields(synth::rectangle(4, 4), 0.4);
        auto off = compute_integer_offsets(f.mesh, f.orient, f.lattice);
        for (int e = 0; e < f.mesh.n_edges(); ++e) {
            Vector2i duv = off.directed(f.mesh, e, f.mesh.edges[e][0]);
            Vector2i dvu = off.directed(f.mesh, e, f.mesh.edges[e][1]);
            auto [kuv, kvu] = off.k[e];
            CHECK(dvu == -(rot2i(kvu, kuv) * duv));
        }
    }
}

TEST_CASE("converged flat field has zero offsets everywhere") {
    Fields f = solve_fields(synth::rectangle(8, 8, 4.0, 4.0), 1.0);
    auto off = compute_integer_offsets(f.mesh, f.orient, f.lattice);
    // edge lengths are 0.5/0.7 against rho=1: neighbors share a lattice point or sit one step apart
    for (int e = 0; e < f.mesh.n_edges(); ++e) {
        CHECK(std::abs(off.d[e][0]) <= 1);
        CHECK(std::abs(off.d[e][1]) <= 1);
    }
    CHECK(position_singularities(f.mesh, off).empty());
}

TEST_CASE("freeze_boundary_offsets cases") {
    // single triangle: all three edges are boundary edges
    TriMesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    m.build();
    EdgeOffsets off;
    off.d.assign(3, Vector2i::Zero());
    off.k.assign(3, {0, 0});

    SUBCASE("(0,0) freezes both components") {
        auto mask = freeze_boundary_offsets(m, off);
        for (int e = 0; e < 3; ++e) {
            CHECK(mask[e][0] == 1);
            CHECK(mask[e][1] == 1);
        }
    }
    SUBCASE("(m,0) freezes the second component") {
        off.d[0] = Vector2i(3, 0);
        auto mask = freeze_boundary_offsets(m, off);
        CHECK(mask[0][0] == 0);
        CHECK(mask[0][1] == 1);
    }
    SUBCASE("(0,n) freezes the first component") {
        off.d[0] = Vector2i(0, -2);
        auto mask = freeze_boundary_offsets(m, off);
        CHECK(mask[0][0] == 1);
        CHECK(mask[0][1] == 0);
    }
    SUBCASE("two nonzero components on a boundary edge is an error") {
        off.d[0] = Vector2i(1, 1);
        CHECK_THROWS(freeze_boundary_offsets(m, off));
    }
}

TEST_CASE("enforce_offset_constraints") {
    TriMesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    m.build();
    FreezeMask all_free(m.n_edges(), {0, 0});

    SUBCASE("satisfying input returns unchanged") {
        EdgeOffsets off;
        off.d.assign(3, Vector2i::Zero());
        off.k.assign(3, {0, 0});
        auto fixed = enforce_offset_constraints(m, off, all_free);
        for (int e = 0; e < 3; ++e) CHECK(fixed.d[e] == off.d[e]);
    }
    SUBCASE("unit cycle violation repaired with L1 change 1") {
        EdgeOffsets off;
        off.d.assign(3, Vector2i::Zero());
        off.k.assign(3, {0, 0});
        // canonical edges: (0,1), (0,2), (1,2) in build order
        // give the face cycle sum (1,0)
        for (int e = 0; e < 3; ++e)
            if (m.edges[e][0] == 0 && m.edges[e][1] == 1) off.d[e] = Vector2i(1, 0);
        auto fixed = enforce_offset_constraints(m, off, all_free);
        CHECK(face_cycle_sum(m, fixed, 0) == Vector2i::Zero());
        CHECK(face_consistent(m, fixed, 0));
        long l1 = 0;
        for (int e = 0; e < 3; ++e) l1 += (fixed.d[e] - off.d[e]).cwiseAbs().sum();
        auto best = oracle::enforce_constraints_bruteforce(m, off, all_free);
        long l1best = 0;
        for (int e = 0; e < 3; ++e) l1best += (best.d[e] - off.d[e]).cwiseAbs().sum();
        CHECK(l1 == l1best);
        CHECK(l1 == 1);
    }
    SUBCASE("frozen components stay bit identical") {
        EdgeOffsets off;
        off.d.assign(3, Vector2i::Zero());
        off.k.assign(3, {0, 0});
        for (int e = 0; e < 3; ++e)
            if (m.edges[e][0] == 0 && m.edges[e][1] == 1) off.d[e] = Vector2i(1, 0);
        // freeze everything on the (0,1) edge, mimicking a boundary freeze
        FreezeMask mask(m.n_edges(), {0, 0});
        for (int e = 0; e < 3; ++e)
            if (m.edges[e][0] == 0 && m.edges[e][1] == 1) mask[e] = {1, 1};
        auto fixed = enforce_offset_constraints(m, off, mask);
        for (int e = 0; e < 3; ++e)
            if (m.edges[e][0] == 0 && m.edges[e][1] == 1) CHECK(fixed.d[e] == Vector2i(1, 0));
        CHECK(face_cycle_sum(m, fixed, 0) == Vector2i::Zero());
        auto best = oracle::enforce_constraints_bruteforce(m, off, mask);
        long l1 = 0, l1best = 0;
        for (int e = 0; e < 3; ++e) {
            l1 += (fixed.d[e] - off.d[e]).cwiseAbs().sum();
            l1best += (best.d[e] - off.d[e]).cwiseAbs().sum();
        }
        CHECK(l1 == l1best);
    }
    SUBCASE("fully frozen violated triangle throws") {
        EdgeOffsets off;
        off.d.assign(3, Vector2i::Zero());
        off.k.assign(3, {0, 0});
        for (int e = 0; e < 3; ++e)
            if (m.edges[e][0] == 0 && m.edges[e][1] == 1) off.d[e] = Vector2i(1, 0);
        FreezeMask mask(m.n_edges(), {1, 1});
        CHECK_THROWS(enforce_offset_constraints(m, off, mask));
    }
}

TEST_CASE("position singularities detect a perturbed edge") {
    Fields f = solve_fields(synth::rectangle(8, 8, 4.0, 4.0), 1.0);
    auto off = compute_integer_offsets(f.mesh, f.orient, f.lattice);
    REQUIRE(position_singularities(f.mesh, off).empty());
    // perturb one interior edge
    int target = -1;
    for (int e = 0; e < f.mesh.n_edges(); ++e) {
        if (f.mesh.vert_boundary[f.mesh.edges[e][0]] || f.mesh.vert_boundary[f.mesh.edges[e][1]])
            continue;
        target = e;
        break;
    }
    REQUIRE(target >= 0);
    off.d[target] += Vector2i(1, 0);
    auto sing = position_singularities(f.mesh, off);
    std::vector<int> expect;
    for (int h = 0; h < f.mesh.n_halfedges(); ++h)
        if (f.mesh.he_edge[h] == target) expect.push_back(f.mesh.he_face(h));
    std::sort(expect.begin(), expect.end());
    CHECK(sing == expect);
}

TEST_CASE("recompute_positions") {
    SUBCASE("unchanged offsets leave origins in place") {
        Fields f = solve_fields(synth::rectangle(8, 8, 4.0, 4.0), 1.0);
        auto off = compute_integer_offsets(f.mesh, f.orient, f.lattice);
        auto re = recompute_positions(f.mesh, f.orient, f.lattice, off, 50);
        for (int v = 0; v < f.mesh.n_vertices(); ++v)
            CHECK((re.p[v] - f.lattice.p[v]).norm() < 1e-9);
    }
    SUBCASE("boundary origins stay on the boundary") {
        Fields f = solve_fields(synth::rectangle(8, 8, 4.0, 4.0), 1.0);
        auto off = compute_integer_offsets(f.mesh, f.orient, f.lattice);
        auto re = recompute_positions(f.mesh, f.orient, f.lattice, off, 50);
        for (int v = 0; v < f.mesh.n_vertices(); ++v) {
            if (f.orient.constraints.kind[v] != VertexConstraint::Tangent) continue;
            const Vector3d& p = re.p[v];
            bool on_boundary = std::abs(p.x()) < 1e-7 || std::abs(p.x() - 4) < 1e-7 ||
                               std::abs(p.y()) < 1e-7 || std::abs(p.y() - 4) < 1e-7;
            CHECK(on_boundary);
        }
    }
    SUBCASE("warm start agrees with a full re-solve") {
        // the corrected-offset equilibrium is unique, so an incremental
        // recompute must land where a from-scratch solve lands
        Fields f = solve_fields(synth::rectangle(16, 16, 8.0, 8.0), 1.0);
        auto off = compute_integer_offsets(f.mesh, f.orient, f.lattice);
        int target = -1;
        Vector3d center(4, 4, 0);
        for (int e = 0; e < f.mesh.n_edges(); ++e) {
            if (f.mesh.vert_boundary[f.mesh.edges[e][0]] || f.mesh.vert_boundary[f.mesh.edges[e][1]])
                continue;
            Vector3d mid = 0.5 * (f.mesh.positions[f.mesh.edges[e][0]] + f.mesh.positions[f.mesh.edges[e][1]]);
            if ((mid - center).norm() < 0.4) {
                target = e;
                break;
            }
        }
        REQUIRE(target >= 0);
        off.d[target] += Vector2i(1, 0);
        auto warm = recompute_positions(f.mesh, f.orient, f.lattice, off, 4000);
        LatticeState cold = f.lattice;
        cold.p = f.mesh.positions;  // from scratch
        auto cold_solved = recompute_positions(f.mesh, f.orient, cold, off, 4000);
        for (int v = 0; v < f.mesh.n_vertices(); ++v)
            CHECK((warm.p[v] - cold_solved.p[v]).norm() < 1e-6 * f.lattice.rho);
    }
}

TEST_CASE("determinism of the position stage") {
    auto a = solve_fields(synth::sine_sheet(8), 0.25, 21);
    auto b = solve_fields(synth::sine_sheet(8), 0.25, 21);
    for (int v = 0; v < a.mesh.n_vertices(); ++v) CHECK(a.lattice.p[v] == b.lattice.p[v]);
}
