#include "sfem/smoothing.hpp"

#include <cmath>

#include "sfem/errors.hpp"
#include "sfem/geometry.hpp"

namespace sfem {

namespace {

ShapeValues unit_shape(int i) {
  ShapeValues s = ShapeValues::Zero();
  s(i) = 1.0;
  return s;
}

/// Shape values at the centroid of the tet formed by the three face nodes and
/// the local node `fourth`.
ShapeValues centroid_shape(int fourth) {
  ShapeValues s = ShapeValues::Zero();
  s.head<3>().setConstant(0.25);
  s(fourth) = 0.25;
  return s;
}

struct Vertex {
  Point3 x;
  ShapeValues n;
};

class DomainBuilder {
 public:
  DomainBuilder(SmoothingDomain& d) : d_(d) {}

  // Adds the three flank triangles of the sub-tet (face, apex); with
  // `include_base` the face itself is added as well.
  void add_subtet(const std::array<Vertex, 3>& face, const Vertex& apex, bool include_base) {
    const double v = std::abs(tet_volume(face[0].x, face[1].x, face[2].x, apex.x));
    if (!(v > 0.0)) throw DegenerateDomain(d_.ordinal, "sub-tetrahedron has zero volume");
    const Point3 inside = (face[0].x + face[1].x + face[2].x + apex.x) / 4.0;
    d_.volume += v;
    weighted_centroid_ += v * inside;
    for (int e = 0; e < 3; ++e) add_triangle({face[e], face[(e + 1) % 3], apex}, inside);
    if (include_base) add_triangle(face, inside);
  }

  void finish() { d_.centroid = weighted_centroid_ / d_.volume; }

 private:
  void add_triangle(const std::array<Vertex, 3>& v, const Point3& inside) {
    BoundaryTriangle& t = d_.triangles[d_.triangle_count++];
    t.vertices = {v[0].x, v[1].x, v[2].x};
    t.area = tri_area(v[0].x, v[1].x, v[2].x);
    try {
      t.normal = outward_unit_normal(v[0].x, v[1].x, v[2].x, inside);
    } catch (const GeometryError& e) {
      throw DegenerateDomain(d_.ordinal, e.what());
    }
    t.shape_values = shape_values_at_face_centroid({v[0].n, v[1].n, v[2].n});
  }

  SmoothingDomain& d_;
  Point3 weighted_centroid_ = Point3::Zero();
};

}  // namespace

ShapeValues shape_values_at_face_centroid(const std::array<ShapeValues, 3>& vertex_values) {
  return (vertex_values[0] + vertex_values[1] + vertex_values[2]) / 3.0;
}

SmoothingDomain build_interior_domain(const MeshTopology& mesh, std::size_t interior_index) {
  const InteriorFace& f = mesh.faces.interior.at(interior_index);
  const auto& x = mesh.nodes.coords;
  SmoothingDomain d;
  d.kind = DomainKind::Interior;
  d.ordinal = mesh.exterior_face_count() + interior_index;
  d.node_count = 5;
  d.field_nodes = {f.nodes[0], f.nodes[1], f.nodes[2], f.remaining[0], f.remaining[1]};

  const std::array<Vertex, 3> face{{{x[f.nodes[0]], unit_shape(0)},
                                    {x[f.nodes[1]], unit_shape(1)},
                                    {x[f.nodes[2]], unit_shape(2)}}};
  DomainBuilder builder(d);
  builder.add_subtet(face, {mesh.centroids.centroids[f.owners[0]], centroid_shape(3)}, false);
  builder.add_subtet(face, {mesh.centroids.centroids[f.owners[1]], centroid_shape(4)}, false);
  builder.finish();
  return d;
}

SmoothingDomain build_exterior_domain(const MeshTopology& mesh, std::size_t exterior_index) {
  const ExteriorFace& f = mesh.faces.exterior.at(exterior_index);
  const auto& x = mesh.nodes.coords;
  SmoothingDomain d;
  d.kind = DomainKind::Exterior;
  d.ordinal = exterior_index;
  d.node_count = 4;
  d.field_nodes = {f.nodes[0], f.nodes[1], f.nodes[2], f.remaining, 0};

  const std::array<Vertex, 3> face{{{x[f.nodes[0]], unit_shape(0)},
                                    {x[f.nodes[1]], unit_shape(1)},
                                    {x[f.nodes[2]], unit_shape(2)}}};
  DomainBuilder builder(d);
  builder.add_subtet(face, {mesh.centroids.centroids[f.owner], centroid_shape(3)}, true);
  builder.finish();
  return d;
}

SmoothingDomain build_domain(const MeshTopology& mesh, std::size_t ordinal) {
  const std::size_t ne = mesh.exterior_face_count();
  return ordinal < ne ? build_exterior_domain(mesh, ordinal) : build_interior_domain(mesh, ordinal - ne);
}

SmoothedB smoothed_b_matrix(const SmoothingDomain& domain) {
  SmoothedB b;
  b.node_count = domain.node_count;
  for (const BoundaryTriangle& t : domain.boundary()) {
    b.gradients.noalias() += (t.area * t.normal) * t.shape_values.transpose();
  }
  b.gradients /= domain.volume;
  return b;
}

}  // namespace sfem
