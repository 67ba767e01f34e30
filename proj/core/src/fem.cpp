#include "rdc/fem.hpp"

#include <Eigen/SparseLU>
#ifdef RDC_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <cmath>

namespace rdc {

std::vector<QPoint3> bulk_rule(ElementKind k) {
  switch (k) {
    case ElementKind::quad4_bulk2d:
    case ElementKind::quad8_bulk2d: {
      const auto& q2 = gauss_quad(k == ElementKind::quad4_bulk2d ? 2 : 3);
      std::vector<QPoint3> r(q2.size());
      for (size_t i = 0; i < q2.size(); ++i) r[i] = {Vec3(q2[i].xi[0], q2[i].xi[1], 0.0), q2[i].w};
      return r;
    }
    case ElementKind::hex8:
      return gauss_hex(2);
    case ElementKind::hex20:
      return gauss_hex(3);
    default:
      throw Error("bulk_rule: not a bulk kind");
  }
}

namespace {

// Deformation gradient and material gradients of the shape functions at one
// quadrature point; returns det of the reference Jacobian.
double kinematics(const Mesh& m, const BulkElement& e, const VecX& d, const Vec3& xi, int dim,
                  Mat3& F, double (*gradN)[3]) {
  double dN[kMaxBulkNodes][3];
  bulk_grads(e.kind, xi, dN);
  Mat3 Jref = Mat3::Identity();
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      double s = 0.0;
      for (int a = 0; a < e.nn; ++a) s += m.X[e.nodes[a]][r] * dN[a][c];
      Jref(r, c) = s;
    }
  const double detJ = dim == 2 ? Jref.block<2, 2>(0, 0).determinant() : Jref.determinant();
  const Mat3 Jinv = Jref.inverse();
  F = Mat3::Identity();
  for (int a = 0; a < e.nn; ++a) {
    for (int r = 0; r < dim; ++r) {
      double s = 0.0;
      for (int c = 0; c < dim; ++c) s += Jinv(c, r) * dN[a][c];
      gradN[a][r] = s;
    }
    for (int c = dim; c < 3; ++c) gradN[a][c] = 0.0;
    const Dof d0 = m.node_dof[e.nodes[a]];
    for (int i = 0; i < dim; ++i)
      for (int Jc = 0; Jc < dim; ++Jc) F(i, Jc) += d[d0 + i] * gradN[a][Jc];
  }
  return detJ;
}

}  // namespace

void internal_forces(const Mesh& m, const Material& mat, const VecX& d, VecX& f,
                     std::vector<Triplet>* K) {
  const int dim = m.dim;
  Mat3 F, P;
  double A[3][3][3][3];
  double gradN[kMaxBulkNodes][3];

  for (size_t ei = 0; ei < m.bulk.size(); ++ei) {
    const BulkElement& e = m.bulk[ei];
    for (const QPoint3& q : bulk_rule(e.kind)) {
      const double detJ = kinematics(m, e, d, q.xi, dim, F, gradN);
      if (detJ <= 0.0)
        throw Error("element " + std::to_string(ei) + ": non-positive reference Jacobian");
      if (F.determinant() <= 0.0)
        throw Error("element " + std::to_string(ei) +
                    ": non-positive deformation gradient determinant");
      stress_and_tangent(mat, F, P, A);
      const double wj = q.w * detJ;
      for (int a = 0; a < e.nn; ++a) {
        const Dof da = m.node_dof[e.nodes[a]];
        for (int i = 0; i < dim; ++i) {
          double s = 0.0;
          for (int J = 0; J < dim; ++J) s += P(i, J) * gradN[a][J];
          f[da + i] += wj * s;
        }
      }
      if (K) {
        for (int a = 0; a < e.nn; ++a) {
          const Dof da = m.node_dof[e.nodes[a]];
          for (int b = 0; b < e.nn; ++b) {
            const Dof db = m.node_dof[e.nodes[b]];
            for (int i = 0; i < dim; ++i)
              for (int k = 0; k < dim; ++k) {
                double s = 0.0;
                for (int J = 0; J < dim; ++J)
                  for (int L = 0; L < dim; ++L) s += gradN[a][J] * A[i][J][k][L] * gradN[b][L];
                K->emplace_back(da + i, db + k, wj * s);
              }
          }
        }
      }
    }
  }
}

double total_strain_energy(const Mesh& m, const Material& mat, const VecX& d) {
  const int dim = m.dim;
  Mat3 F;
  double gradN[kMaxBulkNodes][3];
  double W = 0.0;
  for (size_t ei = 0; ei < m.bulk.size(); ++ei) {
    const BulkElement& e = m.bulk[ei];
    for (const QPoint3& q : bulk_rule(e.kind)) {
      const double detJ = kinematics(m, e, d, q.xi, dim, F, gradN);
      W += q.w * detJ * strain_energy(mat, F);
    }
  }
  return W;
}

void pressure_forces(const Mesh& m, double p, const VecX& d, bool follower, VecX& f,
                     std::vector<Triplet>* K) {
  const int dim = m.dim;
  for (const Facet& fa : m.neumann) {
    for (const QPoint& q : interface_rule(fa.kind)) {
      double N[kMaxInterfaceNodes], dN[kMaxInterfaceNodes][2];
      const double xi[2] = {q.xi[0], q.xi[1]};
      shapefn::values(fa.kind, xi, N);
      shapefn::grads(fa.kind, xi, dN);
      Vec3 t1 = Vec3::Zero(), t2 = Vec3::Zero();
      for (int a = 0; a < fa.nn; ++a) {
        const Vec3 x = follower ? m.xcur(fa.nodes[a], d) : m.X[fa.nodes[a]];
        t1 += dN[a][0] * x;
        if (param_dim(fa.kind) == 2) t2 += dN[a][1] * x;
      }
      // Unnormalized outward normal carries the area element.
      const Vec3 nw = dim == 2 ? Vec3(t1[1], -t1[0], 0.0) : Vec3(t1.cross(t2));
      for (int a = 0; a < fa.nn; ++a) {
        const Dof da = m.node_dof[fa.nodes[a]];
        for (int i = 0; i < dim; ++i) f[da + i] += q.w * p * N[a] * nw[i];
      }
      if (K && follower) {
        for (int a = 0; a < fa.nn; ++a) {
          const Dof da = m.node_dof[fa.nodes[a]];
          for (int b = 0; b < fa.nn; ++b) {
            const Dof db = m.node_dof[fa.nodes[b]];
            if (dim == 2) {
              // d(nw)/d(x_b) for nw = (t1y, -t1x).
              K->emplace_back(da + 0, db + 1, q.w * p * N[a] * dN[b][0]);
              K->emplace_back(da + 1, db + 0, -q.w * p * N[a] * dN[b][0]);
            } else {
              for (int j = 0; j < 3; ++j) {
                const Vec3 ej = Vec3::Unit(j);
                const Vec3 dn = dN[b][0] * ej.cross(t2) + dN[b][1] * t1.cross(ej);
                for (int i = 0; i < 3; ++i)
                  K->emplace_back(da + i, db + j, q.w * p * N[a] * dn[i]);
              }
            }
          }
        }
      }
    }
  }
}

void apply_dirichlet(std::vector<Triplet>& K, VecX& rhs, const std::vector<Dof>& fixed, int ndof) {
  std::vector<char> is_fixed(ndof, 0);
  for (Dof dof : fixed) is_fixed[dof] = 1;
  size_t w = 0;
  for (size_t r = 0; r < K.size(); ++r) {
    if (is_fixed[K[r].row()] || is_fixed[K[r].col()]) continue;
    K[w++] = K[r];
  }
  K.resize(w);
  for (Dof dof : fixed) {
    K.emplace_back(dof, dof, 1.0);
    rhs[dof] = 0.0;
  }
}

VecX solve_sparse(int n, const std::vector<Triplet>& K, const VecX& rhs, long long* nnz) {
  SpMat A(n, n);
  A.setFromTriplets(K.begin(), K.end());
  if (nnz) *nnz = A.nonZeros();
#ifdef RDC_HAVE_UMFPACK
  Eigen::UmfPackLU<SpMat> lu;
  lu.compute(A);
#else
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
#endif
  if (lu.info() != Eigen::Success) throw Error("sparse factorization failed");
  return lu.solve(rhs);
}

}  // namespace rdc
