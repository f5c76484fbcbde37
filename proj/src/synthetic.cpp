#include "untrim/synthetic.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace untrim {
namespace synth {

namespace {

TriMesh grid_mesh(int nx, int ny, const std::function<Vector3d(int, int)>& at,
                  const std::function<bool(int, int)>& keep_cell) {
    TriMesh m;
    std::vector<int> id((nx + 1) * (ny + 1), -1);
    auto vid = [&](int i, int j) -> int& { return id[j * (nx + 1) + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!keep_cell(i, j)) continue;
            for (auto [a, b] : {std::pair{i, j}, {i + 1, j}, {i, j + 1}, {i + 1, j + 1}}) {
                if (vid(a, b) < 0) {
                    vid(a, b) = int(m.positions.size());
                    m.positions.push_back(at(a, b));
                }
            }
            int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            // alternate the diagonal so the triangulation has no global bias
            if ((i + j) % 2 == 0) {
                m.faces.push_back({v00, v10, v11});
                m.faces.push_back({v00, v11, v01});
            } else {
                m.faces.push_back({v00, v10, v01});
                m.faces.push_back({v10, v11, v01});
            }
        }
    m.build();
    return m;
}

}  // namespace

TriMesh rectangle(int nx, int ny, double w, double h) {
    return grid_mesh(
        nx, ny, [&](int i, int j) { return Vector3d(w * i / nx, h * j / ny, 0); },
        [](int, int) { return true; });
}

TriMesh plate_with_hole(int nx, int ny, int hx0, int hx1, int hy0, int hy1, double w, double h) {
    return grid_mesh(
        nx, ny, [&](int i, int j) { return Vector3d(w * i / nx, h * j / ny, 0); },
        [&](int i, int j) { return !(i >= hx0 && i < hx1 && j >= hy0 && j < hy1); });
}

TriMesh annulus(int n, int hole, double w) {
    int lo = (n - hole) / 2, hi = lo + hole;
    return grid_mesh(
        n, n, [&](int i, int j) { return Vector3d(w * i / n, w * j / n, 0); },
        [&](int i, int j) { return !(i >= lo && i < hi && j >= lo && j < hi); });
}

TriMesh cylinder(int nu, int nv, double r, double h) {
    TriMesh m;
    for (int j = 0; j <= nv; ++j)
        for (int i = 0; i < nu; ++i) {
            double a = 2 * kPi * i / nu;
            m.positions.push_back(Vector3d(r * std::cos(a), r * std::sin(a), h * j / nv));
        }
    auto vid = [&](int i, int j) { return j * nu + (i % nu); };
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                m.faces.push_back({v00, v10, v11});
                m.faces.push_back({v00, v11, v01});
            } else {
                m.faces.push_back({v00, v10, v01});
                m.faces.push_back({v10, v11, v01});
            }
        }
    m.build();
    return m;
}

TriMesh sphere(int subdiv, double r) {
    // icosahedron
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vector3d> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                               {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                               {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    TriMesh m;
    m.positions = v;
    m.faces = f;
    m.build();
    m = subdivide_midpoint(m, subdiv);
    for (auto& p : m.positions) p = r * p.normalized();
    return m;
}

TriMesh l_bracket(int nx, int ny, double w, double h) {
    // plate in z=0 for x in [0,w], folded up at x=w: second plate rises in z
    TriMesh m = grid_mesh(
        2 * nx, ny,
        [&](int i, int j) {
            double y = h * j / ny;
            if (i <= nx) return Vector3d(w * i / nx, y, 0);
            return Vector3d(w, y, w * (i - nx) / nx);
        },
        [](int, int) { return true; });
    return m;
}

TriMesh sine_sheet(int n, double amplitude) {
    return grid_mesh(
        n, n,
        [&](int i, int j) {
            double x = double(i) / n, y = double(j) / n;
            return Vector3d(x, y, amplitude * std::sin(kPi * x) * std::sin(kPi * y));
        },
        [](int, int) { return true; });
}

TriMesh shell(int nu, int nv, double r, double len) {
    return grid_mesh(
        nu, nv,
        [&](int i, int j) {
            double a = 0.5 * kPi * i / nu;
            return Vector3d(r * std::cos(a), len * j / nv, r * std::sin(a));
        },
        [](int, int) { return true; });
}

}  // namespace synth
}  // namespace untrim
