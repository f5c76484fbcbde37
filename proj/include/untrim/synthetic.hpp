#pragma once

#include "untrim/trimesh.hpp"

namespace untrim {
namespace synth {

/// Right-triangulated rectangle grid on [0,w]x[0,h], nx*ny cells, z = 0.
TriMesh rectangle(int nx, int ny, double w = 1.0, double h = 1.0);

/// Rectangle with a rectangular hole ([hx0,hx1]x[hy0,hy1] in cell indices).
TriMesh plate_with_hole(int nx, int ny, int hx0, int hx1, int hy0, int hy1, double w = 1.0,
                        double h = 1.0);

/// Square ring: outer nx*nx cells with the centered hole of inner cells removed.
TriMesh annulus(int n, int hole, double w = 1.0);

/// Open tube of radius r and height h (boundary = two circles).
TriMesh cylinder(int nu, int nv, double r = 1.0, double h = 2.0);

/// Unit icosphere, `subdiv` midpoint subdivisions, projected to the sphere.
TriMesh sphere(int subdiv, double r = 1.0);

/// Two rectangular plates joined at a 90-degree fold along y axis (sharp crease).
TriMesh l_bracket(int nx, int ny, double w = 1.0, double h = 1.0);

/// Graph sheet z = a sin(pi x) sin(pi y) over [0,1]^2.
TriMesh sine_sheet(int n, double amplitude = 0.2);

/// Quarter-cylinder shell, open, curvature in one direction; used for the
/// scaling benchmarks.
TriMesh shell(int nu, int nv, double r = 1.0, double len = 2.0);

}  // namespace synth
}  // namespace untrim
