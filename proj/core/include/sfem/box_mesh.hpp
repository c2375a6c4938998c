#pragma once

// Structured tetrahedral meshes of an axis-aligned box. Used to produce the
// cantilever and patch-test meshes locally in TetGen format.

#include <array>
#include <filesystem>

#include "sfem/mesh_io.hpp"

namespace sfem {

enum class HexSplit {
  /// Five tets per cell, alternating cell parity so faces stay conforming.
  Five,
  /// Six tets per cell around the main diagonal (Kuhn split).
  Six,
};

struct BoxMeshSpec {
  Point3 origin = Point3::Zero();
  Vec3 extent = Vec3(1.0, 1.0, 1.0);
  std::array<int, 3> cells{1, 1, 1};
  HexSplit split = HexSplit::Five;
  /// Relative random displacement of interior nodes (fraction of the cell
  /// size); 0 keeps the grid regular.
  double jitter = 0.0;
  unsigned seed = 1;
};

struct BoxMesh {
  NodeTable nodes;
  ElementTable elements;
};

BoxMesh generate_box_mesh(const BoxMeshSpec& spec);

struct TetGenWriteOptions {
  int index_base = 0;
  /// Marker convention used in the .face file (Auto writes TetGen markers).
  FaceMarkerConvention face_markers = FaceMarkerConvention::TetGen;
  bool write_faces = true;
};

/// Writes `<prefix>.node`, `<prefix>.ele` and (optionally) `<prefix>.face`
/// listing every face with its marker.
void write_tetgen_mesh(const std::filesystem::path& prefix, const NodeTable& nodes,
                       const ElementTable& elements, const TetGenWriteOptions& options = {});

}  // namespace sfem
