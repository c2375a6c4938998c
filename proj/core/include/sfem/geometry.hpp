#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sfem {

using Vec3 = Eigen::Vector3d;
/// Node coordinates in meters.
using Point3 = Eigen::Vector3d;

/// Signed volume of tetrahedron (a, b, c, d): det[b-a, c-a, d-a] / 6.
/// Positive when (b-a, c-a, d-a) is right-handed; zero for coplanar input.
double tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

double tri_area(const Point3& a, const Point3& b, const Point3& c);

Point3 tri_centroid(const Point3& a, const Point3& b, const Point3& c);

/// Unit normal of triangle (a, b, c) pointing away from `interior_point`.
/// Throws GeometryError for a degenerate triangle or when the reference point
/// lies in the triangle's plane.
Vec3 outward_unit_normal(const Point3& a, const Point3& b, const Point3& c,
                         const Point3& interior_point);

}  // namespace sfem
