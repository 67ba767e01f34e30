#pragma once

#include "rdc/frames.hpp"
#include "rdc/mesh.hpp"

namespace rdc {

// Basis weighting the gap integrand: the dual basis, the standard basis, or
// the piecewise-linear basis induced by the sub-element decomposition.
enum class GapWeighting { dual, standard, piecewise };

// How integration cells are built: clipped against the obstacle facets,
// directly on the slave sub-elements with per-point projection, or the
// element scheme with a clipping fallback where a sub-element straddles
// obstacle facets.
enum class IntegrationMode { segment, element, boundary_segment };

GapWeighting weighting_from_name(const std::string& s);
IntegrationMode integration_from_name(const std::string& s);
const char* weighting_name(GapWeighting w);
const char* integration_name(IntegrationMode i);

struct MortarOptions {
  GapWeighting weighting = GapWeighting::piecewise;
  IntegrationMode integration = IntegrationMode::segment;
  double search_margin = -1.0;  // bounding box inflation; < 0 searches every pair
};

// Output of one interface assembly pass.  With ns non-mortar nodes:
//   Dtilde  cell integrals of the transformed standard functions; the first
//           mortar matrix factors as D = diag(Dtilde) * U, both ns x ns.
//   U       constant sparse factor, identity for first-order interfaces.
//   Tglob   inverse transpose of U, so inv(D)^T = inv(diag(Dtilde)) * Tglob.
//   gap     weighted gaps.
//   dDtilde, dgap   exact derivatives with respect to the displacement DOFs.
struct MortarData {
  VecX Dtilde;
  VecX gap;
  std::vector<char> supported;
  SpMat U;
  SpMat Tglob;
  SpMat dDtilde;
  SpMat dgap;
  Counters counters;
};

MortarData assemble_mortar(const Mesh& m, const VecX& d, const FrameSet& fr,
                           const MortarOptions& opt);

}  // namespace rdc
