#pragma once

#include <Eigen/Core>

namespace sfem {

/// Voigt 6-vector in the order (xx, yy, zz, yz, xz, xy); shear strains are
/// engineering strains (gamma = 2 epsilon).
using Voigt = Eigen::Matrix<double, 6, 1>;
using ElasticityMatrix = Eigen::Matrix<double, 6, 6>;

struct IsotropicElasticity {
  double youngs_modulus = 0.0;  ///< E, N/m^2
  double poisson_ratio = 0.0;   ///< nu, strictly inside (-1, 0.5)
};

/// Throws MaterialError unless E > 0 and -1 < nu < 0.5.
void validate(const IsotropicElasticity& mat);

/// Isotropic constitutive matrix: normal block lambda + 2 mu on the diagonal
/// and lambda off it, shear diagonal mu.
ElasticityMatrix elasticity_matrix(const IsotropicElasticity& mat);

double lame_lambda(const IsotropicElasticity& mat);
double lame_mu(const IsotropicElasticity& mat);

/// Strain-displacement operator for nodal gradient columns (b_x, b_y, b_z),
/// one column per node, laid out 6 x 3n with rows (xx, yy, zz, yz, xz, xy).
using StrainDisplacement = Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, 15>;
StrainDisplacement strain_displacement_matrix(
    const Eigen::Ref<const Eigen::Matrix<double, 3, Eigen::Dynamic>>& gradients);

double von_mises(const Voigt& stress);

}  // namespace sfem
