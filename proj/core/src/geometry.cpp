#include "sfem/geometry.hpp"

#include "sfem/errors.hpp"

namespace sfem {

double tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

double tri_area(const Point3& a, const Point3& b, const Point3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

Point3 tri_centroid(const Point3& a, const Point3& b, const Point3& c) {
  return (a + b + c) / 3.0;
}

Vec3 outward_unit_normal(const Point3& a, const Point3& b, const Point3& c,
                         const Point3& interior_point) {
  Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (!(len > 0.0)) throw GeometryError("outward_unit_normal: degenerate triangle");
  n /= len;
  const double side = n.dot(tri_centroid(a, b, c) - interior_point);
  if (side == 0.0) {
    throw GeometryError("outward_unit_normal: reference point lies in the triangle plane");
  }
  return side > 0.0 ? n : Vec3(-n);
}

}  // namespace sfem
