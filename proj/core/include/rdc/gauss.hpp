#pragma once

#include "rdc/types.hpp"

#include <vector>

namespace rdc {

// Quadrature point on a 1d or 2d reference domain.
struct QPoint {
  Vec2 xi;
  double w;
};

// Quadrature point on a 3d reference domain.
struct QPoint3 {
  Vec3 xi;
  double w;
};

// Gauss-Legendre on [-1,1], n in 1..5.
const std::vector<QPoint>& gauss_1d(int n);

// Symmetric rules on the unit triangle {xi >= 0, eta >= 0, xi + eta <= 1};
// weights sum to 1/2.  degree <= 2 gives 3 points, <= 5 gives 7 points,
// anything higher the 12 point degree 6 rule.
const std::vector<QPoint>& gauss_tri(int degree);

// n x n tensor Gauss on [-1,1]^2.
const std::vector<QPoint>& gauss_quad(int n);

// n^3 tensor Gauss on [-1,1]^3.
const std::vector<QPoint3>& gauss_hex(int n);

}  // namespace rdc
