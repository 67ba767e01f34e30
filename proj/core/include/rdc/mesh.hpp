#pragma once

#include "rdc/shape.hpp"
#include "rdc/types.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rdc {

struct BulkElement {
  ElementKind kind;
  std::array<NodeId, kMaxBulkNodes> nodes{};
  int nn = 0;
};

struct Facet {
  ElementKind kind;
  std::array<NodeId, kMaxInterfaceNodes> nodes{};
  int nn = 0;
  int bulk_elem = -1;  // owning bulk element for non-mortar facets
};

// Mesh of one deformable body plus a fixed rigid obstacle surface.
// Rigid facet nodes share the node table but never appear in bulk
// connectivity and carry no DOFs.
struct Mesh {
  int dim = 2;
  std::vector<Vec3> X;  // reference coordinates, z = 0 in 2d

  std::vector<BulkElement> bulk;
  std::vector<Facet> nonmortar;  // deformable contact boundary
  std::vector<Facet> rigid;      // obstacle surface
  std::vector<Facet> neumann;    // pressure boundary

  std::map<std::string, std::vector<NodeId>> sets;

  bool has_rigid_interior = false;
  Vec3 rigid_interior = Vec3::Zero();

  // Derived by finalize().
  std::vector<Dof> node_dof;       // first DOF per node, -1 for rigid-only nodes
  int ndof = 0;
  std::vector<NodeId> slave_nodes;  // sorted nodes of the non-mortar boundary
  std::vector<int> slave_index;     // node -> position in slave_nodes, else -1
  std::vector<char> is_rigid_node;

  int nnodes() const { return static_cast<int>(X.size()); }
  Dof dof(NodeId n, int c) const { return node_dof[n] + c; }

  // Current coordinate of a node under displacement field d.
  Vec3 xcur(NodeId n, const VecX& d) const {
    Vec3 p = X[n];
    const Dof d0 = node_dof[n];
    if (d0 >= 0)
      for (int c = 0; c < dim; ++c) p[c] += d[d0 + c];
    return p;
  }

  // Builds DOF numbering and derived tables, validates invariants:
  // node references in range, rigid nodes disjoint from bulk connectivity,
  // every non-mortar facet matched to exactly one bulk element face.
  void finalize();

  // Reference diameter (largest node distance) of a facet.
  double facet_diameter(const Facet& f) const;
};

struct MisorientedFacet {
  bool rigid = false;
  int index = -1;
};

// Facets whose outward normal check fails: non-mortar facets must point away
// from their bulk element centroid, rigid facets away from rigid_interior
// (skipped when the mesh declares none).
std::vector<MisorientedFacet> boundary_orientation_check(const Mesh& m);

// Normal of a facet at a parametric point, not normalized, from reference or
// displaced coordinates.  2d facets give the in-plane outward rotation of the
// tangent, 3d facets the tangent cross product.
Vec3 facet_normal(const Mesh& m, const Facet& f, const Vec2& xi, const VecX* d);

Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& m, std::ostream& out);
std::string write_mesh_string(const Mesh& m);

}  // namespace rdc
