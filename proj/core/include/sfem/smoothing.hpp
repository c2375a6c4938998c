#pragma once

// Face-based smoothing domains and their smoothed strain-displacement
// operators.
//
// Interior face ABC shared by tets ABCD and ABCE (centroids F and G): the
// domain is the bipyramid ABCF + ABCG bounded by the six triangles ABF, BCF,
// CAF, ABG, BCG, CAG, with field nodes (A, B, C, D, E).
// Exterior face ABC of tet ABCD (centroid F): the domain is the tet ABCF with
// field nodes (A, B, C, D).
//
// Smoothed gradients use one point per boundary triangle, at its centroid:
//   b_Ih = (1 / V) * sum_i n_ih * N_I(x_i) * A_i
// which is exact because N_I is linear on every boundary triangle.

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "sfem/material.hpp"
#include "sfem/mesh_io.hpp"

namespace sfem {

enum class DomainKind { Interior, Exterior };

inline constexpr int kMaxFieldNodes = 5;
inline constexpr int kMaxBoundaryTriangles = 6;

/// Shape-function values over the field nodes of one domain; entries past
/// the domain's node count are zero.
using ShapeValues = Eigen::Matrix<double, kMaxFieldNodes, 1>;

struct BoundaryTriangle {
  std::array<Point3, 3> vertices;
  double area = 0.0;
  Vec3 normal = Vec3::Zero();
  /// N_I at the triangle centroid.
  ShapeValues shape_values = ShapeValues::Zero();
};

struct SmoothingDomain {
  DomainKind kind = DomainKind::Exterior;
  /// Domain ordinal: exterior faces take 0..N_e-1, interior faces follow.
  std::size_t ordinal = 0;
  int node_count = 0;
  std::array<NodeIndex, kMaxFieldNodes> field_nodes{};
  int triangle_count = 0;
  std::array<BoundaryTriangle, kMaxBoundaryTriangles> triangles;
  double volume = 0.0;
  /// Volume-weighted centroid of the constituent sub-tets.
  Point3 centroid = Point3::Zero();

  std::span<const NodeIndex> nodes() const { return {field_nodes.data(), static_cast<std::size_t>(node_count)}; }
  std::span<const BoundaryTriangle> boundary() const {
    return {triangles.data(), static_cast<std::size_t>(triangle_count)};
  }
};

/// Smoothed gradient columns (b_Ix, b_Iy, b_Iz) per field node.
struct SmoothedB {
  int node_count = 0;
  Eigen::Matrix<double, 3, kMaxFieldNodes> gradients = Eigen::Matrix<double, 3, kMaxFieldNodes>::Zero();

  auto active() const { return gradients.leftCols(node_count); }
  /// 6 x 3n operator in the (xx, yy, zz, yz, xz, xy) row layout.
  StrainDisplacement matrix() const { return strain_displacement_matrix(active()); }
};

SmoothingDomain build_interior_domain(const MeshTopology& mesh, std::size_t interior_index);
SmoothingDomain build_exterior_domain(const MeshTopology& mesh, std::size_t exterior_index);
/// Dispatches on the domain ordinal.
SmoothingDomain build_domain(const MeshTopology& mesh, std::size_t ordinal);

/// One-point rule site on a boundary triangle: mean of the vertex values.
ShapeValues shape_values_at_face_centroid(const std::array<ShapeValues, 3>& vertex_values);

SmoothedB smoothed_b_matrix(const SmoothingDomain& domain);

}  // namespace sfem
