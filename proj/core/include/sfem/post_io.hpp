#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "sfem/mesh_io.hpp"
#include "sfem/recovery.hpp"

namespace sfem {

/// ASCII VTK XML unstructured grid with point data "displacement" (3),
/// "stress" (6, order xx yy zz yz xz xy) and "von_mises" (1). Cells are tets
/// (VTK type 10). Values are printed with 17 significant digits.
void write_vtu(const MeshTopology& mesh, const Eigen::VectorXd& displacements, const NodalField& field,
               const std::filesystem::path& path);

/// Deflection probe: samples lie on the line parallel to `axis` through
/// `line_point`; the deflection is displacement component `component` of the
/// node nearest each sample.
struct DeflectionProbe {
  int axis = 0;
  int component = 2;
  Point3 line_point = Point3::Zero();
};

/// Axis x, component z, line through the centre of the bounding box.
DeflectionProbe default_probe(const MeshTopology& mesh);

struct DeflectionSample {
  double station = 0.0;
  NodeIndex node = 0;
  double deflection = 0.0;
  /// Distance from the sample point to the chosen node.
  double distance = 0.0;
  /// Station lies beyond the mesh extent along the probe axis.
  bool outside = false;
};

std::vector<DeflectionSample> sample_deflections(const MeshTopology& mesh, const Eigen::VectorXd& displacements,
                                                 const std::vector<double>& stations, const DeflectionProbe& probe);

/// CSV with header "station,deflection,node,note"; the note column flags
/// stations outside the mesh.
void write_deflection_csv(const MeshTopology& mesh, const Eigen::VectorXd& displacements,
                          const std::vector<double>& stations, const DeflectionProbe& probe,
                          const std::filesystem::path& path);

}  // namespace sfem
