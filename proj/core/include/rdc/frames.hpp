#pragma once

#include "rdc/mesh.hpp"

#include <vector>

namespace rdc {

// Orthonormal frame at a non-mortar node.  The normal points outward from
// the deformable body, toward the obstacle.  Every dependency entry gives
// the exact derivative of the frame vectors with respect to the current
// position of one node; projected frames depend only on the node itself.
struct NodeFrame {
  Vec3 n = Vec3::Zero();
  Vec3 t1 = Vec3::Zero();
  Vec3 t2 = Vec3::Zero();  // zero in 2d
  bool projected = false;
  double alpha = 0.0;  // signed offset along the obstacle normal field

  struct Dep {
    NodeId node;
    Mat3 dn = Mat3::Zero();
    Mat3 dt1 = Mat3::Zero();
    Mat3 dt2 = Mat3::Zero();
  };
  std::vector<Dep> deps;
};

struct FrameSet {
  std::vector<NodeFrame> frames;      // indexed like Mesh::slave_nodes
  std::vector<Vec3> rigid_normal;     // per mesh node; unit, zero off the obstacle
};

// Unit outward normals of the obstacle surface at its nodes, averaged over
// adjacent facets.  Fixed data: the obstacle does not move.
std::vector<Vec3> build_rigid_normals(const Mesh& m);

// Result of projecting a point onto the obstacle surface along its
// interpolated nodal normal field: sum_k N_k(xi)(x_k + alpha * nr_k) = p.
struct FrameProjection {
  bool ok = false;
  int facet = -1;
  Vec2 xi = Vec2::Zero();
  double alpha = 0.0;
};

FrameProjection project_to_rigid(const Mesh& m, const std::vector<Vec3>& rigid_normal,
                                 const Vec3& p, Counters* cnt);

// Frame construction: projected frames take the obstacle's normal field at
// the node's projection point (falling back per node when the projection
// fails); averaged frames always use the adjacent-facet average.
enum class FrameMode { projected, averaged };

FrameMode frame_mode_from_name(const std::string& s);
const char* frame_mode_name(FrameMode f);

// Frames for all non-mortar nodes at displacement d.  In projected mode,
// nodes whose projection onto the obstacle fails fall back to the averaged
// normal of their adjacent non-mortar facets (dependencies spread over those
// facets' nodes).
FrameSet build_frames(const Mesh& m, const VecX& d, FrameMode mode, Counters* cnt);

}  // namespace rdc
