#pragma once

// TetGen mesh input and the face-based topology the smoothing domains are
// built on: node, element and centroid tables plus the interior/exterior face
// lists with their owning tetrahedra.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sfem/errors.hpp"
#include "sfem/geometry.hpp"

namespace sfem {

using NodeIndex = std::int32_t;
using TetIndex = std::int32_t;

struct NodeTable {
  std::vector<Point3> coords;
  /// Index base found in the source file (0 or 1); informational only, the
  /// table itself is always 0-based.
  int source_index_base = 0;

  std::size_t size() const noexcept { return coords.size(); }
};

struct ElementTable {
  /// Node tuples ordered so that tet_volume() is positive.
  std::vector<std::array<NodeIndex, 4>> tets;
  /// Number of tuples whose orientation was flipped while canonicalizing.
  std::size_t reoriented = 0;

  std::size_t size() const noexcept { return tets.size(); }
};

struct CentroidTable {
  std::vector<Point3> centroids;

  std::size_t size() const noexcept { return centroids.size(); }
};

/// How the boundary-marker column of a .face file is read.
///  - Paper:  1 = interior, 0 = exterior.
///  - TetGen: 0 = interior, 1 or -1 = hull face.
///  - Auto:   accepts {-1, 0, 1}; the reading is resolved against the element
///            table when the adjacency is built.
enum class FaceMarkerConvention { Auto, Paper, TetGen };

FaceMarkerConvention parse_face_marker_convention(const std::string& name);
std::string to_string(FaceMarkerConvention convention);

struct RawFace {
  std::array<NodeIndex, 3> nodes{};
  int marker = 0;
  std::size_t line = 0;
};

struct RawFaceList {
  std::vector<RawFace> faces;
  FaceMarkerConvention convention = FaceMarkerConvention::Auto;

  /// Marker-based classification. Auto is read with the TetGen convention
  /// until it has been resolved.
  bool flagged_interior(const RawFace& face) const noexcept;
  std::vector<std::size_t> interior_candidates() const;
  std::vector<std::size_t> exterior_candidates() const;
};

struct InteriorFace {
  std::array<NodeIndex, 3> nodes{};
  /// Owning tetrahedra, lower index first.
  std::array<TetIndex, 2> owners{};
  /// Fourth node of owners[0] and owners[1] respectively.
  std::array<NodeIndex, 2> remaining{};
};

struct ExteriorFace {
  std::array<NodeIndex, 3> nodes{};
  TetIndex owner = 0;
  NodeIndex remaining = 0;
};

struct FaceAdjacency {
  std::vector<InteriorFace> interior;
  std::vector<ExteriorFace> exterior;
};

struct MeshTopology {
  NodeTable nodes;
  ElementTable elements;
  CentroidTable centroids;
  FaceAdjacency faces;

  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t element_count() const noexcept { return elements.size(); }
  std::size_t interior_face_count() const noexcept { return faces.interior.size(); }
  std::size_t exterior_face_count() const noexcept { return faces.exterior.size(); }
  std::size_t face_count() const noexcept { return interior_face_count() + exterior_face_count(); }
  std::size_t dof_count() const noexcept { return 3 * node_count(); }

  /// 4 N_t == 2 N_i + N_e.
  bool euler_consistent() const noexcept;
  double bounding_box_diagonal() const;
};

/// Axis-aligned bounding box of a node table.
struct BoundingBox {
  Point3 lo;
  Point3 hi;

  double diagonal() const { return (hi - lo).norm(); }
};
BoundingBox bounding_box(const NodeTable& nodes);

NodeTable parse_node_file(const std::filesystem::path& path);
ElementTable parse_ele_file(const std::filesystem::path& path, const NodeTable& nodes);
RawFaceList parse_face_file(const std::filesystem::path& path, const NodeTable& nodes,
                            FaceMarkerConvention convention = FaceMarkerConvention::Auto);

/// Resolves every face-file row to its owning tetrahedra through a hash of
/// sorted node triples. Faces keep their file order inside each list.
/// Disagreements between the marker column and the element-derived
/// multiplicity are reported in `diag` and resolved in favour of the
/// elements; mesh faces absent from the file are appended.
FaceAdjacency build_face_adjacency(const RawFaceList& faces, const ElementTable& elements,
                                   Diagnostics* diag = nullptr);

/// Face adjacency from the element table alone, in (tet, local face) order.
FaceAdjacency derive_face_adjacency(const ElementTable& elements);

CentroidTable compute_centroids(const NodeTable& nodes, const ElementTable& elements);

/// Checks node/element invariants (finite, distinct nodes, in-range indices,
/// non-degenerate tets), canonicalizes orientation and derives the faces.
MeshTopology build_topology(NodeTable nodes, ElementTable elements);

/// Assembles a topology from already parsed parts and checks the Euler count.
MeshTopology make_topology(NodeTable nodes, ElementTable elements, FaceAdjacency faces);

/// Reads `<prefix>.node`, `<prefix>.ele` and `<prefix>.face`. Without a face
/// file the adjacency is derived from the elements and a warning recorded.
MeshTopology load_tetgen_mesh(const std::filesystem::path& prefix,
                              FaceMarkerConvention convention = FaceMarkerConvention::Auto,
                              Diagnostics* diag = nullptr);

/// Plain-text dump of the five normalized tables for debugging.
void write_topology_dump(const MeshTopology& mesh, const std::filesystem::path& path);

/// Relative tolerances used by the node/element checks.
inline constexpr double kCoincidentNodeTolerance = 1e-12;
inline constexpr double kDegenerateTetTolerance = 1e-14;

}  // namespace sfem
