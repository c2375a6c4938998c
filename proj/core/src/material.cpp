#include "sfem/material.hpp"

#include <cmath>
#include <string>

#include "sfem/errors.hpp"

namespace sfem {

void validate(const IsotropicElasticity& mat) {
  if (!(mat.youngs_modulus > 0.0) || !std::isfinite(mat.youngs_modulus)) {
    throw MaterialError("Young's modulus must be positive and finite, got " +
                        std::to_string(mat.youngs_modulus));
  }
  if (!(mat.poisson_ratio > -1.0 && mat.poisson_ratio < 0.5)) {
    throw MaterialError("Poisson's ratio must lie strictly inside (-1, 0.5), got " +
                        std::to_string(mat.poisson_ratio));
  }
}

double lame_lambda(const IsotropicElasticity& mat) {
  const double nu = mat.poisson_ratio;
  return mat.youngs_modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
}

double lame_mu(const IsotropicElasticity& mat) {
  return mat.youngs_modulus / (2.0 * (1.0 + mat.poisson_ratio));
}

ElasticityMatrix elasticity_matrix(const IsotropicElasticity& mat) {
  validate(mat);
  const double lambda = lame_lambda(mat);
  const double mu = lame_mu(mat);
  ElasticityMatrix c = ElasticityMatrix::Zero();
  c.topLeftCorner<3, 3>().setConstant(lambda);
  for (int i = 0; i < 3; ++i) {
    c(i, i) = lambda + 2.0 * mu;
    c(i + 3, i + 3) = mu;
  }
  return c;
}

StrainDisplacement strain_displacement_matrix(
    const Eigen::Ref<const Eigen::Matrix<double, 3, Eigen::Dynamic>>& gradients) {
  const Eigen::Index n = gradients.cols();
  StrainDisplacement b = StrainDisplacement::Zero(6, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double bx = gradients(0, i);
    const double by = gradients(1, i);
    const double bz = gradients(2, i);
    const Eigen::Index c = 3 * i;
    b(0, c) = bx;
    b(1, c + 1) = by;
    b(2, c + 2) = bz;
    b(3, c + 1) = bz;
    b(3, c + 2) = by;
    b(4, c) = bz;
    b(4, c + 2) = bx;
    b(5, c) = by;
    b(5, c + 1) = bx;
  }
  return b;
}

double von_mises(const Voigt& s) {
  const double dxy = s(0) - s(1);
  const double dyz = s(1) - s(2);
  const double dzx = s(2) - s(0);
  const double shear = s(3) * s(3) + s(4) * s(4) + s(5) * s(5);
  return std::sqrt(0.5 * (dxy * dxy + dyz * dyz + dzx * dzx) + 3.0 * shear);
}

}  // namespace sfem
