#pragma once

#include "rdc/mesh.hpp"

namespace rdc {

// Half-disc of radius 8 resting on a rigid circular arc of the same radius,
// plane strain.  The contact band (+-0.075 rad around the lowest point) is
// resolved by exactly n facets; angular and radial element sizes grow
// geometrically away from it.  order 1 builds quad4/line2, order 2
// quad8/line3 with midside nodes on the exact circles.  n must be one of
// 4, 8, 16, 32, 64, 128, 256.  Node set "axis" holds the x = 0 column.
Mesh gen_hertz(int n, int order);

// Unit-height hex8 block over a rigid quad4 surface z = -0.02 - amplitude *
// (1 - cos(pi x) cos(pi y)) / 2.  amplitude = 0 gives a flat plane.  Node
// set "top" holds the z = 1 face.
Mesh gen_block3d(int nx, double amplitude);

// hex20 cuboid base under a rigid circular pin (flat quad8 disc with a
// filleted rim) hovering 0.02 above the top face.  Node set "clamp" holds
// the bottom and lateral faces.
Mesh gen_punch3d(int nb);

}  // namespace rdc
