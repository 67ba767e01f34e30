#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdc {

using NodeId = int;
using Dof = int;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Thrown for malformed input files, invalid meshes and contract violations.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operation counters accumulated during contact assembly.  dual_evals counts
// evaluations of dual shape function values; it stays zero unless the gap is
// weighted with the dual basis.
struct Counters {
  long long dual_evals = 0;
  long long cells = 0;
  long long gauss_points = 0;
  long long clips = 0;
  long long projections = 0;

  Counters& operator+=(const Counters& o) {
    dual_evals += o.dual_evals;
    cells += o.cells;
    gauss_points += o.gauss_points;
    clips += o.clips;
    projections += o.projections;
    return *this;
  }
};

}  // namespace rdc
