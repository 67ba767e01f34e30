#include "rdc/shape.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace rdc {

int node_count(ElementKind k) {
  switch (k) {
    case ElementKind::line2:
      return 2;
    case ElementKind::line3:
    case ElementKind::tri3:
      return 3;
    case ElementKind::tri6:
      return 6;
    case ElementKind::quad4:
    case ElementKind::quad4_bulk2d:
      return 4;
    case ElementKind::quad8:
    case ElementKind::quad8_bulk2d:
      return 8;
    case ElementKind::quad9:
      return 9;
    case ElementKind::hex8:
      return 8;
    case ElementKind::hex20:
      return 20;
  }
  throw Error("node_count: unknown kind");
}

int param_dim(ElementKind k) {
  switch (k) {
    case ElementKind::line2:
    case ElementKind::line3:
      return 1;
    case ElementKind::tri3:
    case ElementKind::tri6:
    case ElementKind::quad4:
    case ElementKind::quad8:
    case ElementKind::quad9:
    case ElementKind::quad4_bulk2d:
    case ElementKind::quad8_bulk2d:
      return 2;
    case ElementKind::hex8:
    case ElementKind::hex20:
      return 3;
  }
  throw Error("param_dim: unknown kind");
}

bool is_bulk(ElementKind k) {
  return k == ElementKind::quad4_bulk2d || k == ElementKind::quad8_bulk2d ||
         k == ElementKind::hex8 || k == ElementKind::hex20;
}

bool is_interface(ElementKind k) { return !is_bulk(k); }

bool is_quadratic(ElementKind k) {
  switch (k) {
    case ElementKind::line3:
    case ElementKind::tri6:
    case ElementKind::quad8:
    case ElementKind::quad9:
    case ElementKind::quad8_bulk2d:
    case ElementKind::hex20:
      return true;
    default:
      return false;
  }
}

const char* kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::line2:
      return "line2";
    case ElementKind::line3:
      return "line3";
    case ElementKind::tri3:
      return "tri3";
    case ElementKind::tri6:
      return "tri6";
    case ElementKind::quad4:
      return "quad4";
    case ElementKind::quad8:
      return "quad8";
    case ElementKind::quad9:
      return "quad9";
    case ElementKind::quad4_bulk2d:
      return "quad4_bulk2d";
    case ElementKind::quad8_bulk2d:
      return "quad8_bulk2d";
    case ElementKind::hex8:
      return "hex8";
    case ElementKind::hex20:
      return "hex20";
  }
  throw Error("kind_name: unknown kind");
}

ElementKind kind_from_name(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ElementKind::hex20); ++i) {
    const auto k = static_cast<ElementKind>(i);
    if (name == kind_name(k)) return k;
  }
  throw Error("unknown element kind: " + std::string(name));
}

Vec3 node_xi(ElementKind k, int i) {
  static const double line3[3][1] = {{-1}, {1}, {0}};
  static const double tri6[6][2] = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
  static const double quad9[9][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {0, -1},
                                     {1, 0},   {0, 1},  {-1, 0}, {0, 0}};
  static const double hex20[20][3] = {
      {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1}, {-1, -1, 1}, {1, -1, 1}, {1, 1, 1},
      {-1, 1, 1},   {0, -1, -1}, {1, 0, -1}, {0, 1, -1},  {-1, 0, -1}, {0, -1, 1}, {1, 0, 1},
      {0, 1, 1},    {-1, 0, 1},  {-1, -1, 0}, {1, -1, 0}, {1, 1, 0},   {-1, 1, 0}};
  if (i < 0 || i >= node_count(k)) throw Error("node_xi: node index out of range");
  switch (k) {
    case ElementKind::line2:
      return Vec3(i == 0 ? -1.0 : 1.0, 0, 0);
    case ElementKind::line3:
      return Vec3(line3[i][0], 0, 0);
    case ElementKind::tri3:
    case ElementKind::tri6:
      return Vec3(tri6[i][0], tri6[i][1], 0);
    case ElementKind::quad4:
    case ElementKind::quad4_bulk2d:
    case ElementKind::quad8:
    case ElementKind::quad8_bulk2d:
    case ElementKind::quad9:
      return Vec3(quad9[i][0], quad9[i][1], 0);
    case ElementKind::hex8:
    case ElementKind::hex20:
      return Vec3(hex20[i][0], hex20[i][1], hex20[i][2]);
  }
  throw Error("node_xi: unknown kind");
}

bool inside_reference(ElementKind k, const Vec2& xi, double tol) {
  switch (param_dim(k)) {
    case 1:
      return std::abs(xi[0]) <= 1.0 + tol;
    case 2:
      if (k == ElementKind::tri3 || k == ElementKind::tri6)
        return xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol;
      return std::abs(xi[0]) <= 1.0 + tol && std::abs(xi[1]) <= 1.0 + tol;
    default:
      throw Error("inside_reference: interface kinds only");
  }
}

void bulk_values(ElementKind k, const Vec3& xi, double* N) {
  switch (k) {
    case ElementKind::quad4_bulk2d:
    case ElementKind::quad8_bulk2d: {
      const double p[2] = {xi[0], xi[1]};
      shapefn::values(k, p, N);
      return;
    }
    case ElementKind::hex8:
      for (int a = 0; a < 8; ++a) {
        const Vec3 c = node_xi(k, a);
        N[a] = 0.125 * (1 + c[0] * xi[0]) * (1 + c[1] * xi[1]) * (1 + c[2] * xi[2]);
      }
      return;
    case ElementKind::hex20:
      for (int a = 0; a < 20; ++a) {
        const Vec3 c = node_xi(k, a);
        const double X = c[0] * xi[0], Y = c[1] * xi[1], Z = c[2] * xi[2];
        if (a < 8) {
          N[a] = 0.125 * (1 + X) * (1 + Y) * (1 + Z) * (X + Y + Z - 2.0);
        } else if (c[0] == 0.0) {
          N[a] = 0.25 * (1 - xi[0] * xi[0]) * (1 + Y) * (1 + Z);
        } else if (c[1] == 0.0) {
          N[a] = 0.25 * (1 + X) * (1 - xi[1] * xi[1]) * (1 + Z);
        } else {
          N[a] = 0.25 * (1 + X) * (1 + Y) * (1 - xi[2] * xi[2]);
        }
      }
      return;
    default:
      throw Error("bulk_values: not a bulk kind");
  }
}

void bulk_grads(ElementKind k, const Vec3& xi, double (*dN)[3]) {
  switch (k) {
    case ElementKind::quad4_bulk2d:
    case ElementKind::quad8_bulk2d: {
      const double p[2] = {xi[0], xi[1]};
      double g[kMaxInterfaceNodes][2];
      shapefn::grads(k, p, g);
      for (int a = 0; a < node_count(k); ++a) {
        dN[a][0] = g[a][0];
        dN[a][1] = g[a][1];
        dN[a][2] = 0.0;
      }
      return;
    }
    case ElementKind::hex8:
      for (int a = 0; a < 8; ++a) {
        const Vec3 c = node_xi(k, a);
        dN[a][0] = 0.125 * c[0] * (1 + c[1] * xi[1]) * (1 + c[2] * xi[2]);
        dN[a][1] = 0.125 * (1 + c[0] * xi[0]) * c[1] * (1 + c[2] * xi[2]);
        dN[a][2] = 0.125 * (1 + c[0] * xi[0]) * (1 + c[1] * xi[1]) * c[2];
      }
      return;
    case ElementKind::hex20:
      for (int a = 0; a < 20; ++a) {
        const Vec3 c = node_xi(k, a);
        const double X = c[0] * xi[0], Y = c[1] * xi[1], Z = c[2] * xi[2];
        if (a < 8) {
          dN[a][0] = 0.125 * c[0] * (1 + Y) * (1 + Z) * (2.0 * X + Y + Z - 1.0);
          dN[a][1] = 0.125 * c[1] * (1 + X) * (1 + Z) * (X + 2.0 * Y + Z - 1.0);
          dN[a][2] = 0.125 * c[2] * (1 + X) * (1 + Y) * (X + Y + 2.0 * Z - 1.0);
        } else if (c[0] == 0.0) {
          dN[a][0] = -0.5 * xi[0] * (1 + Y) * (1 + Z);
          dN[a][1] = 0.25 * (1 - xi[0] * xi[0]) * c[1] * (1 + Z);
          dN[a][2] = 0.25 * (1 - xi[0] * xi[0]) * (1 + Y) * c[2];
        } else if (c[1] == 0.0) {
          dN[a][0] = 0.25 * c[0] * (1 - xi[1] * xi[1]) * (1 + Z);
          dN[a][1] = -0.5 * xi[1] * (1 + X) * (1 + Z);
          dN[a][2] = 0.25 * (1 + X) * (1 - xi[1] * xi[1]) * c[2];
        } else {
          dN[a][0] = 0.25 * c[0] * (1 + Y) * (1 - xi[2] * xi[2]);
          dN[a][1] = 0.25 * (1 + X) * c[1] * (1 - xi[2] * xi[2]);
          dN[a][2] = -0.5 * xi[2] * (1 + X) * (1 + Y);
        }
      }
      return;
    default:
      throw Error("bulk_grads: not a bulk kind");
  }
}

void shape_hess(ElementKind k, const double* xi, double (*d2N)[3]) {
  const double x = xi[0], y = xi[1];
  const int n = node_count(k);
  for (int a = 0; a < n; ++a) d2N[a][0] = d2N[a][1] = d2N[a][2] = 0.0;
  switch (k) {
    case ElementKind::line2:
    case ElementKind::tri3:
      return;
    case ElementKind::line3:
      d2N[0][0] = 1.0;
      d2N[1][0] = 1.0;
      d2N[2][0] = -2.0;
      return;
    case ElementKind::tri6:
      d2N[0][0] = 4.0;
      d2N[0][1] = 4.0;
      d2N[0][2] = 4.0;
      d2N[1][0] = 4.0;
      d2N[2][2] = 4.0;
      d2N[3][0] = -8.0;
      d2N[3][1] = -4.0;
      d2N[4][1] = 4.0;
      d2N[5][1] = -4.0;
      d2N[5][2] = -8.0;
      return;
    case ElementKind::quad4:
    case ElementKind::quad4_bulk2d:
      d2N[0][1] = 0.25;
      d2N[1][1] = -0.25;
      d2N[2][1] = 0.25;
      d2N[3][1] = -0.25;
      return;
    case ElementKind::quad8:
    case ElementKind::quad8_bulk2d:
      d2N[0][0] = 0.5 * (1 - y);
      d2N[0][1] = 0.25 * (1 - 2 * x - 2 * y);
      d2N[0][2] = 0.5 * (1 - x);
      d2N[1][0] = 0.5 * (1 - y);
      d2N[1][1] = 0.25 * (-1 - 2 * x + 2 * y);
      d2N[1][2] = 0.5 * (1 + x);
      d2N[2][0] = 0.5 * (1 + y);
      d2N[2][1] = 0.25 * (1 + 2 * x + 2 * y);
      d2N[2][2] = 0.5 * (1 + x);
      d2N[3][0] = 0.5 * (1 + y);
      d2N[3][1] = 0.25 * (-1 + 2 * x - 2 * y);
      d2N[3][2] = 0.5 * (1 - x);
      d2N[4][0] = -(1 - y);
      d2N[4][1] = x;
      d2N[5][1] = -y;
      d2N[5][2] = -(1 + x);
      d2N[6][0] = -(1 + y);
      d2N[6][1] = -x;
      d2N[7][1] = y;
      d2N[7][2] = -(1 - x);
      return;
    case ElementKind::quad9: {
      const double lx[3] = {x * (x - 1) * 0.5, x * (x + 1) * 0.5, 1 - x * x};
      const double ly[3] = {y * (y - 1) * 0.5, y * (y + 1) * 0.5, 1 - y * y};
      const double dx[3] = {x - 0.5, x + 0.5, -2 * x};
      const double dy[3] = {y - 0.5, y + 0.5, -2 * y};
      const double hx[3] = {1, 1, -2};
      const double hy[3] = {1, 1, -2};
      const int ix[9] = {0, 1, 1, 0, 2, 1, 2, 0, 2};
      const int iy[9] = {0, 0, 1, 1, 0, 2, 1, 2, 2};
      for (int a = 0; a < 9; ++a) {
        d2N[a][0] = hx[ix[a]] * ly[iy[a]];
        d2N[a][1] = dx[ix[a]] * dy[iy[a]];
        d2N[a][2] = lx[ix[a]] * hy[iy[a]];
      }
      return;
    }
    default:
      throw Error("shape_hess: interface kinds only");
  }
}

const std::vector<std::pair<int, int>>& corner_mid_pairs(ElementKind k) {
  static const std::vector<std::pair<int, int>> none;
  static const std::vector<std::pair<int, int>> line3{{0, 2}, {1, 2}};
  static const std::vector<std::pair<int, int>> tri6{{0, 3}, {1, 3}, {1, 4},
                                                     {2, 4}, {2, 5}, {0, 5}};
  static const std::vector<std::pair<int, int>> quad{{0, 4}, {1, 4}, {1, 5}, {2, 5},
                                                     {2, 6}, {3, 6}, {3, 7}, {0, 7}};
  switch (k) {
    case ElementKind::line3:
      return line3;
    case ElementKind::tri6:
      return tri6;
    case ElementKind::quad8:
    case ElementKind::quad9:
      return quad;
    default:
      return none;
  }
}

namespace {

// Corner nodes absorb a fixed fraction of their adjacent mid-edge functions;
// mid functions shrink so column sums stay one (partition of unity).
MatX build_trafo(ElementKind k) {
  const int n = node_count(k);
  MatX T = MatX::Identity(n, n);
  for (const auto& [corner, mid] : corner_mid_pairs(k)) {
    T(corner, mid) = kBasisMix;
    T(mid, mid) = 1.0 - 2.0 * kBasisMix;
  }
  return T;
}

}  // namespace

const MatX& modified_basis(ElementKind k) {
  static const MatX tables[] = {
      build_trafo(ElementKind::line2),       build_trafo(ElementKind::line3),
      build_trafo(ElementKind::tri3),        build_trafo(ElementKind::tri6),
      build_trafo(ElementKind::quad4),       build_trafo(ElementKind::quad8),
      build_trafo(ElementKind::quad9),       build_trafo(ElementKind::quad4_bulk2d),
      build_trafo(ElementKind::quad8_bulk2d), build_trafo(ElementKind::hex8),
      build_trafo(ElementKind::hex20)};
  return tables[static_cast<int>(k)];
}

const std::vector<QPoint>& interface_rule(ElementKind k) {
  switch (k) {
    case ElementKind::line2:
      return gauss_1d(3);
    case ElementKind::line3:
      return gauss_1d(4);
    case ElementKind::tri3:
      return gauss_tri(5);
    case ElementKind::tri6:
      return gauss_tri(6);
    case ElementKind::quad4:
      return gauss_quad(3);
    case ElementKind::quad8:
    case ElementKind::quad9:
      return gauss_quad(4);
    default:
      throw Error("interface_rule: interface kinds only");
  }
}

DualCoeffs dual_coeffs(ElementKind k, const Eigen::Matrix<double, Eigen::Dynamic, 3>& x,
                       bool modified) {
  const int n = node_count(k);
  if (x.rows() != n) throw Error("dual_coeffs: node count mismatch");
  const int pd = param_dim(k);
  const MatX& T = modified_basis(k);

  MatX M = MatX::Zero(n, n);
  VecX D = VecX::Zero(n);
  double Nv[kMaxInterfaceNodes];
  double dN[kMaxInterfaceNodes][2];
  for (const QPoint& q : interface_rule(k)) {
    const double p[2] = {q.xi[0], q.xi[1]};
    shapefn::values(k, p, Nv);
    shapefn::grads(k, p, dN);
    Vec3 t1 = Vec3::Zero(), t2 = Vec3::Zero();
    for (int a = 0; a < n; ++a) {
      t1 += dN[a][0] * x.row(a).transpose();
      t2 += dN[a][1] * x.row(a).transpose();
    }
    const double J = (pd == 1) ? t1.norm() : t1.cross(t2).norm();
    VecX B(n);
    for (int a = 0; a < n; ++a) B[a] = Nv[a];
    if (modified) B = T * B;
    M.noalias() += (q.w * J) * B * B.transpose();
    D += (q.w * J) * B;
  }

  Eigen::FullPivLU<MatX> lu(M);
  if (!lu.isInvertible()) throw Error("dual_coeffs: singular local mass matrix");
  DualCoeffs out;
  out.modified = modified;
  out.A = D.asDiagonal() * lu.inverse();
  return out;
}

double integral_of_standard(ElementKind k, int node, const Vec2& lo, const Vec2& hi) {
  if (!is_interface(k)) throw Error("integral_of_standard: interface kinds only");
  if (node < 0 || node >= node_count(k)) throw Error("integral_of_standard: bad node");
  const auto& g = gauss_1d(4);
  double Nv[kMaxInterfaceNodes];
  double sum = 0.0;
  if (param_dim(k) == 1) {
    const double h = 0.5 * (hi[0] - lo[0]);
    const double m = 0.5 * (hi[0] + lo[0]);
    for (const auto& q : g) {
      const double p[2] = {m + h * q.xi[0], 0.0};
      shapefn::values(k, p, Nv);
      sum += q.w * h * Nv[node];
    }
    return sum;
  }
  const double hx = 0.5 * (hi[0] - lo[0]), mx = 0.5 * (hi[0] + lo[0]);
  const double hy = 0.5 * (hi[1] - lo[1]), my = 0.5 * (hi[1] + lo[1]);
  for (const auto& qy : g)
    for (const auto& qx : g) {
      const double p[2] = {mx + hx * qx.xi[0], my + hy * qy.xi[0]};
      shapefn::values(k, p, Nv);
      sum += qx.w * qy.w * hx * hy * Nv[node];
    }
  return sum;
}

namespace {

SubElementMap make_sub(ElementKind sub, std::initializer_list<int> nodes, const Mat2& Xi,
                       const Vec2& b) {
  SubElementMap m;
  m.sub = sub;
  m.nnodes = static_cast<int>(nodes.size());
  int i = 0;
  for (int nd : nodes) m.nodes[i++] = nd;
  m.Xi = Xi;
  m.b = b;
  m.XiInv = Xi.inverse();
  m.bInv = -m.XiInv * b;
  return m;
}

std::vector<SubElementMap> build_subs(ElementKind k) {
  Mat2 I2 = Mat2::Identity();
  std::vector<SubElementMap> v;
  auto rot = [](double a, double b, double c, double d) {
    Mat2 m;
    m << a, b, c, d;
    return m;
  };
  switch (k) {
    case ElementKind::line3:
      // halves [-1,0] and [0,1], each scaled onto [-1,1]
      v.push_back(make_sub(ElementKind::line2, {0, 2}, rot(2, 0, 0, 1), Vec2(1, 0)));
      v.push_back(make_sub(ElementKind::line2, {2, 1}, rot(2, 0, 0, 1), Vec2(-1, 0)));
      break;
    case ElementKind::tri6:
      v.push_back(make_sub(ElementKind::tri3, {0, 3, 5}, 2 * I2, Vec2(0, 0)));
      v.push_back(make_sub(ElementKind::tri3, {3, 1, 4}, 2 * I2, Vec2(-1, 0)));
      v.push_back(make_sub(ElementKind::tri3, {5, 4, 2}, 2 * I2, Vec2(0, -1)));
      v.push_back(make_sub(ElementKind::tri3, {4, 5, 3}, -2 * I2, Vec2(1, 1)));
      break;
    case ElementKind::quad8:
      v.push_back(make_sub(ElementKind::tri3, {0, 4, 7}, I2, Vec2(1, 1)));
      v.push_back(make_sub(ElementKind::tri3, {1, 5, 4}, rot(0, 1, -1, 0), Vec2(1, 1)));
      v.push_back(make_sub(ElementKind::tri3, {2, 6, 5}, -I2, Vec2(1, 1)));
      v.push_back(make_sub(ElementKind::tri3, {3, 7, 6}, rot(0, -1, 1, 0), Vec2(1, 1)));
      v.push_back(make_sub(ElementKind::quad4, {4, 5, 6, 7}, rot(1, 1, -1, 1), Vec2(0, 0)));
      break;
    case ElementKind::quad9:
      v.push_back(make_sub(ElementKind::quad4, {0, 4, 8, 7}, 2 * I2, Vec2(1, 1)));
      v.push_back(make_sub(ElementKind::quad4, {4, 1, 5, 8}, 2 * I2, Vec2(-1, 1)));
      v.push_back(make_sub(ElementKind::quad4, {8, 5, 2, 6}, 2 * I2, Vec2(-1, -1)));
      v.push_back(make_sub(ElementKind::quad4, {7, 8, 6, 3}, 2 * I2, Vec2(1, -1)));
      break;
    case ElementKind::line2:
    case ElementKind::tri3:
    case ElementKind::quad4: {
      SubElementMap m = make_sub(k, {}, I2, Vec2(0, 0));
      m.nnodes = node_count(k);
      for (int i = 0; i < m.nnodes; ++i) m.nodes[i] = i;
      v.push_back(m);
      break;
    }
    default:
      throw Error("sub_elements: interface kinds only");
  }
  return v;
}

}  // namespace

const std::vector<SubElementMap>& sub_elements(ElementKind k) {
  static const std::vector<SubElementMap> line2 = build_subs(ElementKind::line2);
  static const std::vector<SubElementMap> line3 = build_subs(ElementKind::line3);
  static const std::vector<SubElementMap> tri3 = build_subs(ElementKind::tri3);
  static const std::vector<SubElementMap> tri6 = build_subs(ElementKind::tri6);
  static const std::vector<SubElementMap> quad4 = build_subs(ElementKind::quad4);
  static const std::vector<SubElementMap> quad8 = build_subs(ElementKind::quad8);
  static const std::vector<SubElementMap> quad9 = build_subs(ElementKind::quad9);
  switch (k) {
    case ElementKind::line2:
      return line2;
    case ElementKind::line3:
      return line3;
    case ElementKind::tri3:
      return tri3;
    case ElementKind::tri6:
      return tri6;
    case ElementKind::quad4:
      return quad4;
    case ElementKind::quad8:
      return quad8;
    case ElementKind::quad9:
      return quad9;
    default:
      throw Error("sub_elements: interface kinds only");
  }
}

int find_sub_element(ElementKind k, const Vec2& xi, double tol) {
  const auto& subs = sub_elements(k);
  for (size_t s = 0; s < subs.size(); ++s) {
    const double p[2] = {xi[0], xi[1]};
    double q[2];
    shapefn::sub_forward(subs[s], p, q);
    if (inside_reference(subs[s].sub, Vec2(q[0], q[1]), tol)) return static_cast<int>(s);
  }
  return -1;
}

double eval_piecewise(ElementKind k, int node, const Vec2& xi) {
  if (node < 0 || node >= node_count(k)) throw Error("eval_piecewise: bad node");
  const int s = find_sub_element(k, xi, 1e-10);
  if (s < 0) throw Error("eval_piecewise: point outside reference domain");
  const SubElementMap& m = sub_elements(k)[s];
  int local = -1;
  for (int i = 0; i < m.nnodes; ++i)
    if (m.nodes[i] == node) local = i;
  if (local < 0) return 0.0;
  const double p[2] = {xi[0], xi[1]};
  double q[2];
  shapefn::sub_forward(m, p, q);
  double Nv[kMaxInterfaceNodes];
  shapefn::values(m.sub, q, Nv);
  return Nv[local];
}

}  // namespace rdc
