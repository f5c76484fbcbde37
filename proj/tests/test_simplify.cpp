#include <doctest.h>

#include <set>

#include "support/oracles.hpp"
#include "support/quad_fixtures.hpp"
#include "untrim/simplify.hpp"

using namespace untrim;

namespace {

int interior_ep_count(const QuadMesh& q) {
    int n = 0;
    for (int v = 0; v < q.n_vertices(); ++v)
        if (q.is_extraordinary(v)) ++n;
    return n;
}

int disk_index(const QuadMesh& q) {
    int interior, boundary;
    q.index_sums(interior, boundary);
    return interior + boundary;
}

// max distance from each point of set A to segment set B
double chain_hausdorff(const std::vector<Vector3d>& a, const std::vector<std::array<Vector3d, 2>>& b) {
    double worst = 0;
    for (auto& p : a) {
        double best = 1e300;
        for (auto& s : b) best = std::min(best, (closest_on_segment(p, s[0], s[1]) - p).norm());
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

TEST_CASE("clustered EP classification") {
    SUBCASE("3-5 pair") {
        QuadMesh g = fixtures::grid_with_35_pair(6, 5, 2, 2);
        auto clusters = find_clustered_eps(g);
        int n35 = 0;
        for (auto& c : clusters)
            if (c.pattern == EpPattern::ThreeFive) ++n35;
        CHECK(n35 == 2);  // the pair's edge is shared by two faces
    }
    SUBCASE("regular face reports nothing") {
        QuadMesh g = fixtures::quad_grid(4, 4);
        CHECK(find_clustered_eps(g).empty());
    }
    SUBCASE("3-5-5 from the domino refill") {
        QuadMesh g = fixtures::grid_with_355(7, 5, 2, 2);
        auto clusters = find_clustered_eps(g);
        int n355 = 0;
        for (auto& c : clusters)
            if (c.pattern == EpPattern::ThreeFiveFive) ++n355;
        CHECK(n355 >= 1);
    }
    SUBCASE("5-5 pair") {
        QuadMesh g = fixtures::grid_with_55_pair(8, 7);
        auto clusters = find_clustered_eps(g);
        bool found = false;
        for (auto& c : clusters) found |= c.pattern == EpPattern::FiveFive;
        CHECK(found);
    }
    SUBCASE("3-3 on the open box") {
        QuadMesh g = fixtures::open_box_33();
        auto clusters = find_clustered_eps(g);
        bool found = false;
        for (auto& c : clusters) found |= c.pattern == EpPattern::ThreeThree;
        CHECK(found);
    }
    SUBCASE("3-3-5 on the modified box") {
        QuadMesh g = fixtures::open_box_335();
        auto clusters = find_clustered_eps(g);
        bool found = false;
        for (auto& c : clusters) found |= c.pattern == EpPattern::ThreeThreeFive;
        CHECK(found);
    }
}

TEST_CASE("collapse of the 3-5 pair regularizes both") {
    QuadMesh g = fixtures::grid_with_35_pair(6, 5, 2, 2);
    int index_before = disk_index(g);
    auto clusters = find_clustered_eps(g);
    REQUIRE(!clusters.empty());
    auto& ce = clusters[0];
    REQUIRE(ce.pattern == EpPattern::ThreeFive);
    int pair_slot = (ce.slot_b - ce.slot_a + 4) % 4 == 1 ? ce.slot_a : ce.slot_b;
    auto r = collapse_adjacent(g, ce.face, pair_slot);
    REQUIRE(r.ok);
    CHECK(interior_ep_count(r.mesh) == 0);  // 3+5-4 = 4, regular again
    CHECK(disk_index(r.mesh) == index_before);
    // all-quad manifold output with the analytic patch count
    PatchLayout layout = extract_patches(r.mesh);
    CHECK(layout.patches.size() == 1);
    CHECK(int(layout.patches.size()) <
          oracle::flood_fill_patch_count(g, extract_patches(g).separatrix_edge));
}

TEST_CASE("collapse of a 5-5 pair leaves one valence-6 vertex") {
    QuadMesh g = fixtures::grid_with_55_pair(8, 7);
    auto clusters = find_clustered_eps(g);
    int face = -1, slot = -1;
    for (auto& c : clusters)
        if (c.pattern == EpPattern::FiveFive) {
            face = c.face;
            slot = (c.slot_b - c.slot_a + 4) % 4 == 1 ? c.slot_a : c.slot_b;
        }
    REQUIRE(face >= 0);
    int eps_before = interior_ep_count(g);
    auto r = collapse_adjacent(g, face, slot);
    REQUIRE(r.ok);
    bool has6 = false;
    for (int v = 0; v < r.mesh.n_vertices(); ++v)
        if (!r.mesh.vert_boundary[v] && r.mesh.valence[v] == 6) has6 = true;
    CHECK(has6);
    CHECK(interior_ep_count(r.mesh) < eps_before);  // two EPs became one
}

TEST_CASE("collapse of two regular vertices stays regular") {
    QuadMesh g = fixtures::quad_grid(5, 4);
    auto r = collapse_adjacent(g, 2 * 5 + 2, 0);  // interior horizontal edge
    REQUIRE(r.ok);
    CHECK(interior_ep_count(r.mesh) == 0);
    CHECK(r.mesh.n_faces() < g.n_faces());
}

TEST_CASE("triple collapses per the figures") {
    SUBCASE("3-5-5 leaves one valence-5 in the element") {
        QuadMesh g = fixtures::grid_with_355(7, 5, 2, 2);
        auto clusters = find_clustered_eps(g);
        const ClusteredEp* target = nullptr;
        for (auto& c : clusters)
            if (c.pattern == EpPattern::ThreeFiveFive) target = &c;
        REQUIRE(target);
        int index_before = disk_index(g);
        int eps_before = interior_ep_count(g);
        // track the element's corners through the merge by position priority:
        // after collapsing, the element's own EPs reduce to a single valence-5
        std::vector<Vector3d> corner_pos;
        for (int c = 0; c < 4; ++c) corner_pos.push_back(g.positions[g.faces[target->face][c]]);
        auto r = collapse_triple(g, *target);
        REQUIRE(r.ok);
        CHECK(interior_ep_count(r.mesh) < eps_before);
        std::multiset<int> element_vals;
        for (int v = 0; v < r.mesh.n_vertices(); ++v) {
            for (auto& cp : corner_pos)
                if ((r.mesh.positions[v] - cp).norm() < 1e-9 && r.mesh.is_extraordinary(v))
                    element_vals.insert(r.mesh.valence[v]);
        }
        CHECK(element_vals == std::multiset<int>{5});
        CHECK(disk_index(r.mesh) == index_before);
    }
    SUBCASE("3-3-5 leaves one valence-3") {
        QuadMesh g = fixtures::open_box_335();
        auto clusters = find_clustered_eps(g);
        const ClusteredEp* target = nullptr;
        for (auto& c : clusters)
            if (c.pattern == EpPattern::ThreeThreeFive) target = &c;
        REQUIRE(target);
        auto r = collapse_triple(g, *target);
        REQUIRE(r.ok);
        // the face's three EPs reduce to a single valence-3
        int eps_before = interior_ep_count(g);
        CHECK(interior_ep_count(r.mesh) < eps_before);
    }
}

TEST_CASE("3-3 collapse is refused") {
    QuadMesh g = fixtures::open_box_33();
    auto clusters = find_clustered_eps(g);
    const ClusteredEp* target = nullptr;
    for (auto& c : clusters)
        if (c.pattern == EpPattern::ThreeThree) target = &c;
    REQUIRE(target);
    int pair_slot = (target->slot_b - target->slot_a + 4) % 4 == 1 ? target->slot_a : target->slot_b;
    auto r = collapse_adjacent(g, target->face, pair_slot);
    CHECK(!r.ok);
    CHECK(r.reason.find("valence-2") != std::string::npos);
}

TEST_CASE("zip patch detection and collapse") {
    QuadMesh g = fixtures::grid_with_zip(8, 6, 3, 1);
    // fixture sanity: one valence-3 and one valence-5, not adjacent
    std::vector<int> ep;
    for (int v = 0; v < g.n_vertices(); ++v)
        if (g.is_extraordinary(v)) ep.push_back(v);
    REQUIRE(ep.size() == 2);
    bool adjacent = false;
    for (int h = 0; h < g.n_halfedges(); ++h)
        if ((g.he_from(h) == ep[0] && g.he_to(h) == ep[1])) adjacent = true;
    CHECK(!adjacent);

    PatchLayout layout = extract_patches(g);
    auto zips = find_zip_patches(g, layout);
    REQUIRE(!zips.empty());

    SUBCASE("collapse keeps both EP valences") {
        std::multiset<int> before;
        for (int v : ep) before.insert(g.valence[v]);
        auto r = collapse_zip(g, layout, zips[0]);
        REQUIRE(r.ok);
        std::multiset<int> after;
        for (int v = 0; v < r.mesh.n_vertices(); ++v)
            if (r.mesh.is_extraordinary(v)) after.insert(r.mesh.valence[v]);
        CHECK(after == before);
        PatchLayout nl = extract_patches(r.mesh);
        CHECK(nl.patches.size() < layout.patches.size());
    }
    SUBCASE("sharp long side refuses the collapse") {
        QuadMesh sharp_g = g;
        const Patch& p = layout.patches[zips[0]];
        int s = p.rows <= p.cols ? 0 : 3;
        auto side = p.side(s);
        sharp_g.edge_sharp.assign(sharp_g.n_edges(), 0);
        for (size_t i = 0; i + 1 < side.size(); ++i)
            for (int e = 0; e < sharp_g.n_edges(); ++e)
                if ((sharp_g.edges[e][0] == std::min(side[i], side[i + 1])) &&
                    (sharp_g.edges[e][1] == std::max(side[i], side[i + 1])))
                    sharp_g.edge_sharp[e] = 1;
        auto r = collapse_zip(sharp_g, layout, zips[0]);
        CHECK(!r.ok);
        CHECK(r.reason.find("sharp") != std::string::npos);
    }
    SUBCASE("clean grid has no zip patches") {
        QuadMesh plain = fixtures::quad_grid(5, 5);
        PatchLayout pl = extract_patches(plain);
        CHECK(find_zip_patches(plain, pl).empty());
    }
}

TEST_CASE("simplify drives the fixtures to clean layouts") {
    SUBCASE("injected 3-5 cluster disappears") {
        QuadMesh g = fixtures::grid_with_35_pair(6, 5, 2, 2);
        int patches_before = int(extract_patches(g).patches.size());
        SimplifyReport rep;
        auto [sq, layout] = simplify(g, SimplifyConfig{}, &rep);
        CHECK(rep.eps_after < rep.eps_before);
        CHECK(int(layout.patches.size()) < patches_before);
        CHECK(layout.patches.size() == 1);
        size_t covered = 0;
        for (auto& p : layout.patches) covered += p.faces.size();
        CHECK(covered == size_t(sq.n_faces()));
    }
    SUBCASE("zip fixture simplifies and conserves the boundary index") {
        QuadMesh g = fixtures::grid_with_zip(8, 6, 3, 1);
        int index_before = disk_index(g);
        SimplifyReport rep;
        auto [sq, layout] = simplify(g, SimplifyConfig{}, &rep);
        CHECK(rep.patches_after < rep.patches_before);
        CHECK(disk_index(sq) == index_before);
    }
    SUBCASE("3-3 is reported and left intact") {
        QuadMesh g = fixtures::open_box_33();
        SimplifyReport rep;
        auto [sq, layout] = simplify(g, SimplifyConfig{}, &rep);
        bool reported = false;
        for (auto& msg : rep.refused) reported |= msg.find("3-3") != std::string::npos;
        CHECK(reported);
        CHECK(interior_ep_count(sq) == interior_ep_count(g));
    }
    SUBCASE("nothing to simplify is the identity") {
        QuadMesh g = fixtures::quad_grid(5, 4);
        SimplifyReport rep;
        auto [sq, layout] = simplify(g, SimplifyConfig{}, &rep);
        CHECK(rep.patches_before == rep.patches_after);
        CHECK(sq.n_faces() == g.n_faces());
        CHECK(rep.cluster_collapses == 0);
        CHECK(rep.zip_collapses == 0);
    }
}

TEST_CASE("sharp polylines survive simplification in place") {
    // fold a grid and inject a 3-5 cluster away from the fold
    QuadMesh g = fixtures::grid_with_35_pair(8, 6, 2, 2);
    for (auto& p : g.positions)
        if (p.x() > 6.0) {
            double dx = p.x() - 6.0;
            p = Vector3d(6.0, p.y(), dx);
        }
    g.build();
    g.edge_sharp = detect_sharp_edges(g, kPi / 3);
    std::vector<std::array<Vector3d, 2>> sharp_before;
    for (int e = 0; e < g.n_edges(); ++e)
        if (g.edge_sharp[e])
            sharp_before.push_back({g.positions[g.edges[e][0]], g.positions[g.edges[e][1]]});
    REQUIRE(!sharp_before.empty());

    SimplifyConfig cfg;
    auto [sq, layout] = simplify(g, cfg, nullptr);
    std::vector<Vector3d> sharp_after_points;
    for (int e = 0; e < sq.n_edges(); ++e)
        if (sq.edge_sharp[e]) {
            sharp_after_points.push_back(sq.positions[sq.edges[e][0]]);
            sharp_after_points.push_back(sq.positions[sq.edges[e][1]]);
        }
    REQUIRE(!sharp_after_points.empty());
    CHECK(chain_hausdorff(sharp_after_points, sharp_before) < 1e-9);
}
