#pragma once

#include "rdc/types.hpp"

namespace rdc {

enum class MaterialModel {
  stvenant,    // St. Venant-Kirchhoff
  neohookean,  // compressible neo-Hooke with logarithmic volumetric term
};

struct Material {
  MaterialModel model = MaterialModel::stvenant;
  double E = 1.0;
  double nu = 0.3;

  double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double mu() const { return E / (2.0 * (1.0 + nu)); }
};

MaterialModel material_from_name(const std::string& name);
const char* material_name(MaterialModel m);

// Strain energy density at deformation gradient F (plane strain passes
// F33 = 1).  Requires det F > 0 for the neo-Hookean model.
double strain_energy(const Material& mat, const Mat3& F);

// First Piola-Kirchhoff stress P and material tangent A[i][J][k][L] =
// dP_iJ / dF_kL.
void stress_and_tangent(const Material& mat, const Mat3& F, Mat3& P, double A[3][3][3][3]);

}  // namespace rdc
