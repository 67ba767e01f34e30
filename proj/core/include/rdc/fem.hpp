#pragma once

#include "rdc/material.hpp"
#include "rdc/mesh.hpp"

#include <vector>

namespace rdc {

// Bulk quadrature rule: 2x2(x2) for first-order kinds, 3x3(x3) for
// serendipity kinds.
std::vector<QPoint3> bulk_rule(ElementKind k);

// Internal nodal forces under displacement d, added into f.  When K is
// non-null the exact tangent d(f)/d(d) is appended as triplets.
// Throws when det F <= 0 at a quadrature point, naming the element.
void internal_forces(const Mesh& m, const Material& mat, const VecX& d, VecX& f,
                     std::vector<Triplet>* K);

double total_strain_energy(const Mesh& m, const Material& mat, const VecX& d);

// Pressure load on the Neumann facets: traction p times the outward unit
// normal, integrated over the reference surface (follower = false) or the
// displaced surface (follower = true).  Forces are added into f; when K is
// non-null the load stiffness d(f)/d(d) is appended (zero for dead load).
void pressure_forces(const Mesh& m, double p, const VecX& d, bool follower, VecX& f,
                     std::vector<Triplet>* K);

// Constrains the listed DOFs to zero increment: their rows and columns are
// dropped, the diagonal set to one and the rhs entry cleared.
void apply_dirichlet(std::vector<Triplet>& K, VecX& rhs, const std::vector<Dof>& fixed,
                     int ndof);

// Direct sparse solve of K x = rhs; throws on singular factorization.
// nnz, when given, receives the matrix nonzero count after duplicate
// triplets collapse.
VecX solve_sparse(int n, const std::vector<Triplet>& K, const VecX& rhs,
                  long long* nnz = nullptr);

}  // namespace rdc
