#include "sfem/fem_reference.hpp"

#include <cmath>

#include <Eigen/LU>

#include "sfem/errors.hpp"
#include "sfem/parallel.hpp"

namespace sfem {

namespace {

std::array<Point3, 4> tet_points(const MeshTopology& mesh, std::size_t t) {
  const auto& e = mesh.elements.tets[t];
  const auto& x = mesh.nodes.coords;
  return {x[e[0]], x[e[1]], x[e[2]], x[e[3]]};
}

}  // namespace

Eigen::Matrix<double, 3, 4> tet_shape_gradients(const std::array<Point3, 4>& x, double* volume) {
  // Rows of [1 x y z] per vertex; the inverse maps coordinates to barycentrics.
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) m.row(i) << 1.0, x[i].x(), x[i].y(), x[i].z();
  const double v = std::abs(tet_volume(x[0], x[1], x[2], x[3]));
  if (!(v > 0.0)) throw GeometryError("degenerate tetrahedron");
  if (volume) *volume = v;
  const Eigen::Matrix4d inv = m.inverse();
  return inv.bottomRows<3>();
}

ElementStiffness fem_t4_stiffness(const std::array<Point3, 4>& x, const ElasticityMatrix& c) {
  double v = 0.0;
  const Eigen::Matrix<double, 3, 4> g = tet_shape_gradients(x, &v);
  const Eigen::Matrix<double, 6, 12> b = strain_displacement_matrix(g);
  ElementStiffness k = b.transpose() * (c * b) * v;
  k.triangularView<Eigen::StrictlyLower>() = k.transpose();
  return k;
}

TripletBuffer fem_assemble(const MeshTopology& mesh, const ElasticityMatrix& c, unsigned threads) {
  TripletBuffer buf = TripletBuffer::for_elements(mesh.element_count());
  parallel_for(mesh.element_count(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      DomainStiffness block;
      block.node_count = 4;
      const auto& e = mesh.elements.tets[t];
      block.nodes = {e[0], e[1], e[2], e[3], 0};
      block.block = fem_t4_stiffness(tet_points(mesh, t), c);
      scatter_block(t * kExteriorSlots, block, buf);
    }
  });
  return buf;
}

std::vector<DomainState> fem_recover_elements(const MeshTopology& mesh, const Eigen::VectorXd& d,
                                              const ElasticityMatrix& c, unsigned threads) {
  std::vector<DomainState> states(mesh.element_count());
  parallel_for(states.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      DomainState& s = states[t];
      const auto& e = mesh.elements.tets[t];
      s.ordinal = t;
      s.node_count = 4;
      s.nodes = {e[0], e[1], e[2], e[3], 0};
      const Eigen::Matrix<double, 3, 4> g = tet_shape_gradients(tet_points(mesh, t), &s.volume);
      Eigen::Matrix<double, 12, 1> local;
      for (int i = 0; i < 4; ++i) local.segment<3>(3 * i) = d.segment<3>(3 * e[i]);
      s.strain = strain_displacement_matrix(g) * local;
      s.stress = c * s.strain;
    }
  });
  return states;
}

}  // namespace sfem
