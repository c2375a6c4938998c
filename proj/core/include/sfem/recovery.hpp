#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sfem/material.hpp"
#include "sfem/mesh_io.hpp"
#include "sfem/smoothing.hpp"

namespace sfem {

/// Strain and stress of one integration cell (a smoothing domain, or a
/// tetrahedron for the FEM reference).
struct DomainState {
  std::size_t ordinal = 0;
  Voigt strain = Voigt::Zero();
  Voigt stress = Voigt::Zero();
  double volume = 0.0;
  int node_count = 0;
  std::array<NodeIndex, kMaxFieldNodes> nodes{};
};

DomainState domain_strain_stress(const SmoothingDomain& domain, const SmoothedB& b,
                                 const Eigen::VectorXd& displacements, const ElasticityMatrix& c);

std::vector<DomainState> recover_domains(const MeshTopology& mesh, const Eigen::VectorXd& displacements,
                                         const ElasticityMatrix& c, unsigned threads = 1);

struct NodalField {
  std::vector<Voigt> stress;
  std::vector<double> von_mises;
  /// Total volume of the cells touching each node.
  std::vector<double> weight;
};

/// Volume-weighted mean of the cell stresses touching each node.
NodalField nodal_average(std::span<const DomainState> states, const MeshTopology& mesh);

}  // namespace sfem
