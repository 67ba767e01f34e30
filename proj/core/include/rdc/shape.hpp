#pragma once

#include "rdc/gauss.hpp"
#include "rdc/types.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace rdc {

// Element kinds.  Interface kinds have parametric dimension one below the
// space they live in; the *_bulk2d kinds are plane-strain volume elements.
//
// Node ordering (0-based):
//   line2  ends at xi=-1,+1
//   line3  ends at xi=-1,+1, then mid at xi=0
//   tri3   (0,0) (1,0) (0,1)
//   tri6   corners, then edge mids 3:(0-1) 4:(1-2) 5:(2-0)
//   quad4  (-1,-1) (1,-1) (1,1) (-1,1)
//   quad8  corners, then edge mids 4:(0,-1) 5:(1,0) 6:(0,1) 7:(-1,0)
//   quad9  quad8 plus center node 8:(0,0)
//   hex8   bottom face counter-clockwise, then top face
//   hex20  corners, bottom edge mids 8-11, top edge mids 12-15,
//          vertical edge mids 16-19
enum class ElementKind : std::uint8_t {
  line2,
  line3,
  tri3,
  tri6,
  quad4,
  quad8,
  quad9,
  quad4_bulk2d,
  quad8_bulk2d,
  hex8,
  hex20,
};

inline constexpr int kMaxInterfaceNodes = 9;
inline constexpr int kMaxBulkNodes = 20;

int node_count(ElementKind k);
int param_dim(ElementKind k);
bool is_bulk(ElementKind k);
bool is_interface(ElementKind k);
bool is_quadratic(ElementKind k);
const char* kind_name(ElementKind k);
ElementKind kind_from_name(std::string_view name);

// Reference coordinates of node i.
Vec3 node_xi(ElementKind k, int i);

// Membership test for the reference domain, inflated by tol.
bool inside_reference(ElementKind k, const Vec2& xi, double tol);

// Standard shape function values/gradients for bulk kinds (plain doubles).
void bulk_values(ElementKind k, const Vec3& xi, double* N);
void bulk_grads(ElementKind k, const Vec3& xi, double (*dN)[3]);

// Second parametric derivatives for interface kinds; columns are
// d2/dxi1^2, d2/dxi1dxi2, d2/dxi2^2.
void shape_hess(ElementKind k, const double* xi, double (*d2N)[3]);

// Mixing fraction of the modified basis transformation: corner functions
// absorb this fraction of each adjacent mid-edge function.
inline constexpr double kBasisMix = 0.2;

// Local (corner, mid) index pairs coupled by the transformation; empty for
// first-order kinds.  Every mid node appears in exactly two pairs.
const std::vector<std::pair<int, int>>& corner_mid_pairs(ElementKind k);

// Fixed per-kind basis transformation used by the modified dual scheme:
// row j gives Ntilde_j as a combination of the standard functions.
// Identity for first-order kinds.
const MatX& modified_basis(ElementKind k);

// Coefficients of the dual basis on one element in its current
// configuration: Phi_j = sum_k A(j,k) B_k where B is the standard basis
// (modified = false) or the transformed basis (modified = true).
// Bi-orthogonality holds against B elementwise.
struct DualCoeffs {
  MatX A;
  bool modified = false;
};
DualCoeffs dual_coeffs(ElementKind k, const Eigen::Matrix<double, Eigen::Dynamic, 3>& x,
                       bool modified);

// Exact integral of standard function `node` over the axis-aligned rectangle
// [lo, hi] (1d kinds use only the first component).  The rectangle must lie
// inside the reference domain.
double integral_of_standard(ElementKind k, int node, const Vec2& lo, const Vec2& hi);

// Affine decomposition of a quadratic interface element into first-order
// sub-elements: xi_sub = Xi * xi + b, xi = XiInv * xi_sub + bInv.
// First-order kinds decompose into themselves (identity map).
struct SubElementMap {
  ElementKind sub;
  int nnodes = 0;
  std::array<int, 4> nodes{};  // parent-local node ids
  Mat2 Xi, XiInv;
  Vec2 b, bInv;
};
const std::vector<SubElementMap>& sub_elements(ElementKind k);

// Sub-element containing xi (first hit wins on shared edges), or -1.
int find_sub_element(ElementKind k, const Vec2& xi, double tol);

// Piecewise-linear interpolation basis induced by the decomposition:
// on each sub-element the first-order functions of its nodes, zero for all
// other parent nodes.  Equals the standard basis for first-order kinds.
double eval_piecewise(ElementKind k, int node, const Vec2& xi);

// Full-element quadrature rule used for mass matrices and dual coefficients
// (one order higher for quadratic kinds).
const std::vector<QPoint>& interface_rule(ElementKind k);

namespace shapefn {

// Standard interface shape functions, generic over the scalar type so the
// mortar kernel can differentiate through them.
template <class T>
inline void values(ElementKind k, const T* xi, T* N) {
  const T x = xi[0];
  const T y = xi[1];
  switch (k) {
    case ElementKind::line2:
      N[0] = (1.0 - x) * 0.5;
      N[1] = (1.0 + x) * 0.5;
      break;
    case ElementKind::line3:
      N[0] = x * (x - 1.0) * 0.5;
      N[1] = x * (x + 1.0) * 0.5;
      N[2] = 1.0 - x * x;
      break;
    case ElementKind::tri3:
      N[0] = 1.0 - x - y;
      N[1] = x;
      N[2] = y;
      break;
    case ElementKind::tri6: {
      const T l = 1.0 - x - y;
      N[0] = l * (2.0 * l - 1.0);
      N[1] = x * (2.0 * x - 1.0);
      N[2] = y * (2.0 * y - 1.0);
      N[3] = 4.0 * x * l;
      N[4] = 4.0 * x * y;
      N[5] = 4.0 * y * l;
      break;
    }
    case ElementKind::quad4:
    case ElementKind::quad4_bulk2d:
      N[0] = (1.0 - x) * (1.0 - y) * 0.25;
      N[1] = (1.0 + x) * (1.0 - y) * 0.25;
      N[2] = (1.0 + x) * (1.0 + y) * 0.25;
      N[3] = (1.0 - x) * (1.0 + y) * 0.25;
      break;
    case ElementKind::quad8:
    case ElementKind::quad8_bulk2d:
      N[0] = (1.0 - x) * (1.0 - y) * (-x - y - 1.0) * 0.25;
      N[1] = (1.0 + x) * (1.0 - y) * (x - y - 1.0) * 0.25;
      N[2] = (1.0 + x) * (1.0 + y) * (x + y - 1.0) * 0.25;
      N[3] = (1.0 - x) * (1.0 + y) * (-x + y - 1.0) * 0.25;
      N[4] = (1.0 - x * x) * (1.0 - y) * 0.5;
      N[5] = (1.0 + x) * (1.0 - y * y) * 0.5;
      N[6] = (1.0 - x * x) * (1.0 + y) * 0.5;
      N[7] = (1.0 - x) * (1.0 - y * y) * 0.5;
      break;
    case ElementKind::quad9: {
      const T lx[3] = {x * (x - 1.0) * 0.5, x * (x + 1.0) * 0.5, 1.0 - x * x};
      const T ly[3] = {y * (y - 1.0) * 0.5, y * (y + 1.0) * 0.5, 1.0 - y * y};
      N[0] = lx[0] * ly[0];
      N[1] = lx[1] * ly[0];
      N[2] = lx[1] * ly[1];
      N[3] = lx[0] * ly[1];
      N[4] = lx[2] * ly[0];
      N[5] = lx[1] * ly[2];
      N[6] = lx[2] * ly[1];
      N[7] = lx[0] * ly[2];
      N[8] = lx[2] * ly[2];
      break;
    }
    default:
      throw Error("shapefn::values: not an interface kind");
  }
}

template <class T>
inline void grads(ElementKind k, const T* xi, T (*dN)[2]) {
  const T x = xi[0];
  const T y = xi[1];
  auto set = [&](int i, T gx, T gy) {
    dN[i][0] = gx;
    dN[i][1] = gy;
  };
  switch (k) {
    case ElementKind::line2:
      set(0, T(-0.5), T(0.0));
      set(1, T(0.5), T(0.0));
      break;
    case ElementKind::line3:
      set(0, x - 0.5, T(0.0));
      set(1, x + 0.5, T(0.0));
      set(2, -2.0 * x, T(0.0));
      break;
    case ElementKind::tri3:
      set(0, T(-1.0), T(-1.0));
      set(1, T(1.0), T(0.0));
      set(2, T(0.0), T(1.0));
      break;
    case ElementKind::tri6: {
      const T l = 1.0 - x - y;
      set(0, 1.0 - 4.0 * l, 1.0 - 4.0 * l);
      set(1, 4.0 * x - 1.0, T(0.0));
      set(2, T(0.0), 4.0 * y - 1.0);
      set(3, 4.0 * (l - x), -4.0 * x);
      set(4, 4.0 * y, 4.0 * x);
      set(5, -4.0 * y, 4.0 * (l - y));
      break;
    }
    case ElementKind::quad4:
    case ElementKind::quad4_bulk2d:
      set(0, -(1.0 - y) * 0.25, -(1.0 - x) * 0.25);
      set(1, (1.0 - y) * 0.25, -(1.0 + x) * 0.25);
      set(2, (1.0 + y) * 0.25, (1.0 + x) * 0.25);
      set(3, -(1.0 + y) * 0.25, (1.0 - x) * 0.25);
      break;
    case ElementKind::quad8:
    case ElementKind::quad8_bulk2d:
      set(0, (1.0 - y) * (2.0 * x + y) * 0.25, (1.0 - x) * (x + 2.0 * y) * 0.25);
      set(1, (1.0 - y) * (2.0 * x - y) * 0.25, (1.0 + x) * (-x + 2.0 * y) * 0.25);
      set(2, (1.0 + y) * (2.0 * x + y) * 0.25, (1.0 + x) * (x + 2.0 * y) * 0.25);
      set(3, (1.0 + y) * (2.0 * x - y) * 0.25, (1.0 - x) * (-x + 2.0 * y) * 0.25);
      set(4, -x * (1.0 - y), -(1.0 - x * x) * 0.5);
      set(5, (1.0 - y * y) * 0.5, -(1.0 + x) * y);
      set(6, -x * (1.0 + y), (1.0 - x * x) * 0.5);
      set(7, -(1.0 - y * y) * 0.5, -(1.0 - x) * y);
      break;
    case ElementKind::quad9: {
      const T lx[3] = {x * (x - 1.0) * 0.5, x * (x + 1.0) * 0.5, 1.0 - x * x};
      const T ly[3] = {y * (y - 1.0) * 0.5, y * (y + 1.0) * 0.5, 1.0 - y * y};
      const T dx[3] = {x - 0.5, x + 0.5, -2.0 * x};
      const T dy[3] = {y - 0.5, y + 0.5, -2.0 * y};
      set(0, dx[0] * ly[0], lx[0] * dy[0]);
      set(1, dx[1] * ly[0], lx[1] * dy[0]);
      set(2, dx[1] * ly[1], lx[1] * dy[1]);
      set(3, dx[0] * ly[1], lx[0] * dy[1]);
      set(4, dx[2] * ly[0], lx[2] * dy[0]);
      set(5, dx[1] * ly[2], lx[1] * dy[2]);
      set(6, dx[2] * ly[1], lx[2] * dy[1]);
      set(7, dx[0] * ly[2], lx[0] * dy[2]);
      set(8, dx[2] * ly[2], lx[2] * dy[2]);
      break;
    }
    default:
      throw Error("shapefn::grads: not an interface kind");
  }
}

// Apply the affine sub-element map and its inverse.
template <class T>
inline void sub_forward(const SubElementMap& m, const T* xi, T* out) {
  out[0] = m.Xi(0, 0) * xi[0] + m.Xi(0, 1) * xi[1] + m.b[0];
  out[1] = m.Xi(1, 0) * xi[0] + m.Xi(1, 1) * xi[1] + m.b[1];
}

template <class T>
inline void sub_inverse(const SubElementMap& m, const T* xis, T* out) {
  out[0] = m.XiInv(0, 0) * xis[0] + m.XiInv(0, 1) * xis[1] + m.bInv[0];
  out[1] = m.XiInv(1, 0) * xis[0] + m.XiInv(1, 1) * xis[1] + m.bInv[1];
}

}  // namespace shapefn

}  // namespace rdc
