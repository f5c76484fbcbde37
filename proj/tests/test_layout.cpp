#include <doctest.h>

#include <set>

#include "support/oracles.hpp"
#include "support/quad_fixtures.hpp"
#include "untrim/layout.hpp"
#include "untrim/synthetic.hpp"

using namespace untrim;
using fixtures::quad_grid;

TEST_CASE("sharp edge detection") {
    SUBCASE("flat grid has none") {
        QuadMesh g = quad_grid(4, 4);
        auto sharp = detect_sharp_edges(g);
        for (char s : sharp) CHECK(!s);
    }
    SUBCASE("a 90 degree fold is flagged") {
        // two quads joined at a right angle
        QuadMesh q;
        q.positions = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {1, 0, 1}, {1, 1, 1}};
        q.faces = {{0, 1, 2, 3}, {1, 4, 5, 2}};
        q.build();
        auto sharp = detect_sharp_edges(q, kPi / 3);
        int count = 0;
        for (char s : sharp) count += s;
        CHECK(count == 1);
    }
    SUBCASE("gentle curvature stays smooth") {
        // coarse cylinder band: dihedral well under pi/3
        QuadMesh q;
        int n = 16;
        for (int i = 0; i <= n; ++i) {
            double a = kPi * i / n;
            q.positions.push_back(Vector3d(std::cos(a), std::sin(a), 0));
            q.positions.push_back(Vector3d(std::cos(a), std::sin(a), 1));
        }
        for (int i = 0; i < n; ++i) q.faces.push_back({2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1});
        q.build();
        auto sharp = detect_sharp_edges(q, kPi / 3);
        for (char s : sharp) CHECK(!s);
    }
}

TEST_CASE("separatrices on a plain grid bound a single patch") {
    QuadMesh g = quad_grid(4, 3);
    auto seps = trace_separatrices(g);
    // only boundary chains (between the four corners)
    for (auto& s : seps) CHECK(s.on_boundary);
    CHECK(seps.size() == 4);
    PatchLayout layout = extract_patches(g, seps);
    REQUIRE(layout.patches.size() == 1);
    CHECK(layout.patches[0].rows * layout.patches[0].cols == 5 * 4);
    CHECK(layout.patches[0].faces.size() == 12);
    CHECK(oracle::flood_fill_patch_count(g, layout.separatrix_edge) == 1);
}

TEST_CASE("one EP pair partitions the grid per the flood-fill oracle") {
    QuadMesh g = fixtures::grid_with_35_pair(6, 5, 2, 2);
    // fixture sanity: exactly one valence-3 and one valence-5 interior vertex
    int v3 = 0, v5 = 0;
    for (int v = 0; v < g.n_vertices(); ++v) {
        if (g.vert_boundary[v]) continue;
        if (g.valence[v] == 3) ++v3;
        if (g.valence[v] == 5) ++v5;
    }
    CHECK(v3 == 1);
    CHECK(v5 == 1);
    PatchLayout layout = extract_patches(g);
    CHECK(int(layout.patches.size()) ==
          oracle::flood_fill_patch_count(g, layout.separatrix_edge));
    CHECK(layout.patches.size() > 1);
    // partition property: faces covered exactly once
    size_t covered = 0;
    for (auto& p : layout.patches) covered += p.faces.size();
    CHECK(covered == size_t(g.n_faces()));
}

TEST_CASE("sharp polyline becomes a separatrix") {
    // fold a grid along its middle column
    QuadMesh g = quad_grid(6, 4);
    for (auto& p : g.positions)
        if (p.x() > 3.0) {
            double dx = p.x() - 3.0;
            p = Vector3d(3.0, p.y(), dx);
        }
    g.build();
    g.edge_sharp = detect_sharp_edges(g, kPi / 3);
    int sharp_count = 0;
    for (char s : g.edge_sharp) sharp_count += s;
    CHECK(sharp_count == 4);
    auto seps = trace_separatrices(g);
    bool found_sharp = false;
    for (auto& s : seps) found_sharp |= s.sharp;
    CHECK(found_sharp);
    PatchLayout layout = extract_patches(g, seps);
    CHECK(layout.patches.size() == 2);
}

TEST_CASE("interfaces match shared sides vertex by vertex") {
    QuadMesh g = quad_grid(6, 4);
    for (auto& p : g.positions)
        if (p.x() > 3.0) {
            double dx = p.x() - 3.0;
            p = Vector3d(3.0, p.y(), dx);
        }
    g.build();
    g.edge_sharp = detect_sharp_edges(g, kPi / 3);
    PatchLayout layout = extract_patches(g);
    REQUIRE(layout.patches.size() == 2);
    REQUIRE(layout.interfaces.size() == 1);
    auto& itf = layout.interfaces[0];
    auto a = layout.patches[itf.patch_a].side(itf.side_a);
    auto b = layout.patches[itf.patch_b].side(itf.side_b);
    if (itf.reversed) std::reverse(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("patch grid rows and cols describe the full rectangle") {
    QuadMesh g = quad_grid(5, 2);
    PatchLayout layout = extract_patches(g);
    REQUIRE(layout.patches.size() == 1);
    auto& p = layout.patches[0];
    CHECK(((p.rows == 3 && p.cols == 6) || (p.rows == 6 && p.cols == 3)));
    // grid entries unique
    std::set<int> uniq(p.grid.begin(), p.grid.end());
    CHECK(uniq.size() == p.grid.size());
}
