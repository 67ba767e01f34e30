#include "rdc/material.hpp"

#include <cmath>
#include <string>

namespace rdc {

MaterialModel material_from_name(const std::string& name) {
  if (name == "stvenant") return MaterialModel::stvenant;
  if (name == "neohookean") return MaterialModel::neohookean;
  throw Error("unknown material model '" + name + "'");
}

const char* material_name(MaterialModel m) {
  return m == MaterialModel::stvenant ? "stvenant" : "neohookean";
}

double strain_energy(const Material& mat, const Mat3& F) {
  const double la = mat.lambda(), mu = mat.mu();
  if (mat.model == MaterialModel::stvenant) {
    const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
    const double tr = E.trace();
    return 0.5 * la * tr * tr + mu * (E.array() * E.array()).sum();
  }
  const double J = F.determinant();
  if (J <= 0.0) throw Error("non-positive deformation gradient determinant");
  const double lnJ = std::log(J);
  return 0.5 * mu * ((F.transpose() * F).trace() - 3.0) - mu * lnJ + 0.5 * la * lnJ * lnJ;
}

void stress_and_tangent(const Material& mat, const Mat3& F, Mat3& P, double A[3][3][3][3]) {
  const double la = mat.lambda(), mu = mat.mu();
  if (mat.model == MaterialModel::stvenant) {
    const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
    const Mat3 S = la * E.trace() * Mat3::Identity() + 2.0 * mu * E;
    P = F * S;
    const Mat3 B = F * F.transpose();
    for (int i = 0; i < 3; ++i)
      for (int J = 0; J < 3; ++J)
        for (int k = 0; k < 3; ++k)
          for (int L = 0; L < 3; ++L)
            A[i][J][k][L] = (i == k ? S(J, L) : 0.0) + la * F(i, J) * F(k, L) +
                            mu * F(i, L) * F(k, J) + (J == L ? mu * B(i, k) : 0.0);
    return;
  }

  const double J = F.determinant();
  if (J <= 0.0) throw Error("non-positive deformation gradient determinant");
  const double lnJ = std::log(J);
  const Mat3 G = F.inverse().transpose();  // G_iJ = Finv_Ji
  P = mu * (F - G) + la * lnJ * G;
  const double a = mu - la * lnJ;
  for (int i = 0; i < 3; ++i)
    for (int Jj = 0; Jj < 3; ++Jj)
      for (int k = 0; k < 3; ++k)
        for (int L = 0; L < 3; ++L)
          A[i][Jj][k][L] = (i == k && Jj == L ? mu : 0.0) + a * G(i, L) * G(k, Jj) +
                          la * G(i, Jj) * G(k, L);
}

}  // namespace rdc
