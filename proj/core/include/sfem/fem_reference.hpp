#pragma once

// Conventional constant-strain tetrahedron (FEM-T4), sharing the triplet,
// CSC and solver path with the smoothed method. Element t owns triplet slots
// [144 t, 144 (t + 1)).

#include <array>
#include <vector>

#include <Eigen/Core>

#include "sfem/assembly.hpp"
#include "sfem/recovery.hpp"

namespace sfem {

using ElementStiffness = Eigen::Matrix<double, 12, 12>;

/// Gradients of the four linear shape functions (columns) and |volume|.
/// Throws GeometryError for a degenerate tetrahedron.
Eigen::Matrix<double, 3, 4> tet_shape_gradients(const std::array<Point3, 4>& x, double* volume = nullptr);

/// B^T c B V with the constant-strain B.
ElementStiffness fem_t4_stiffness(const std::array<Point3, 4>& x, const ElasticityMatrix& c);

TripletBuffer fem_assemble(const MeshTopology& mesh, const ElasticityMatrix& c, unsigned threads = 1);

std::vector<DomainState> fem_recover_elements(const MeshTopology& mesh, const Eigen::VectorXd& displacements,
                                              const ElasticityMatrix& c, unsigned threads = 1);

}  // namespace sfem
