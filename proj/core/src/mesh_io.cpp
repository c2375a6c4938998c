#include "sfem/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string_view>
#include <unordered_map>

namespace sfem {

namespace {

namespace fs = std::filesystem;

struct Row {
  std::size_t line = 0;
  std::vector<std::string_view> tokens;
};

/// Whitespace-tokenized, comment-stripped, non-empty rows of a file.
class RowReader {
 public:
  explicit RowReader(const fs::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path_, "cannot open file");
    text_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  const std::string& path() const { return path_; }

  std::optional<Row> next() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      std::string_view line(text_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      Row row;
      row.line = line_;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_space(line[j])) ++j;
        if (j > i) row.tokens.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!row.tokens.empty()) return row;
    }
    return std::nullopt;
  }

  ParseError error(std::size_t line, const std::string& what) const {
    return ParseError(path_, line, what);
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

  std::string path_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

template <class T>
T to_number(const RowReader& reader, const Row& row, std::size_t col, const char* what) {
  if (col >= row.tokens.size()) {
    throw reader.error(row.line, std::string("missing ") + what + " (column " +
                                     std::to_string(col + 1) + ")");
  }
  std::string_view tok = row.tokens[col];
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw reader.error(row.line, std::string("invalid ") + what + " '" +
                                     std::string(row.tokens[col]) + "'");
  }
  return value;
}

Row read_header(RowReader& reader, const char* kind) {
  auto header = reader.next();
  if (!header) throw reader.error(0, std::string("empty ") + kind + " file");
  return *header;
}

struct FaceKey {
  std::array<NodeIndex, 3> n;
  bool operator==(const FaceKey&) const = default;
};

FaceKey make_key(NodeIndex a, NodeIndex b, NodeIndex c) {
  std::array<NodeIndex, 3> n{a, b, c};
  std::sort(n.begin(), n.end());
  return {n};
}

struct FaceKeyHash {
  std::size_t operator()(const FaceKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (NodeIndex v : k.n) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

struct Owners {
  std::array<TetIndex, 2> tets{-1, -1};
  std::array<NodeIndex, 2> remaining{-1, -1};
  int count = 0;
  bool seen_in_file = false;
};

// Local faces of a tet (i0, i1, i2) and the opposite local vertex.
constexpr std::array<std::array<int, 4>, 4> kTetFaces{{
    {1, 2, 3, 0},
    {0, 3, 2, 1},
    {0, 1, 3, 2},
    {0, 2, 1, 3},
}};

using FaceMap = std::unordered_map<FaceKey, Owners, FaceKeyHash>;

FaceMap hash_tet_faces(const ElementTable& elements) {
  FaceMap map;
  map.reserve(elements.size() * 3);
  for (std::size_t t = 0; t < elements.size(); ++t) {
    const auto& tet = elements.tets[t];
    for (const auto& f : kTetFaces) {
      Owners& o = map[make_key(tet[f[0]], tet[f[1]], tet[f[2]])];
      if (o.count < 2) {
        o.tets[o.count] = static_cast<TetIndex>(t);
        o.remaining[o.count] = tet[f[3]];
      }
      ++o.count;
    }
  }
  return map;
}

void throw_if_nonmanifold(const FaceKey& key, const Owners& o) {
  if (o.count > 2) {
    throw TopologyError("face (" + std::to_string(key.n[0]) + ", " + std::to_string(key.n[1]) +
                        ", " + std::to_string(key.n[2]) + ") is shared by " +
                        std::to_string(o.count) + " tetrahedra");
  }
}

void push_record(FaceAdjacency& adj, const std::array<NodeIndex, 3>& nodes, const Owners& o) {
  if (o.count == 1) {
    adj.exterior.push_back({nodes, o.tets[0], o.remaining[0]});
  } else {
    // owners are inserted in increasing tet order by hash_tet_faces
    adj.interior.push_back({nodes, o.tets, o.remaining});
  }
}

std::optional<std::string> check_nodes(const NodeTable& nodes) {
  if (nodes.size() < 4) return "mesh needs at least 4 nodes, got " + std::to_string(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes.coords[i].allFinite()) return "node " + std::to_string(i) + " is not finite";
  }
  const double tol = kCoincidentNodeTolerance * bounding_box(nodes).diagonal();
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return nodes.coords[a].x() < nodes.coords[b].x();
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Point3& p = nodes.coords[order[i]];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Point3& q = nodes.coords[order[j]];
      if (q.x() - p.x() > tol) break;
      if ((q - p).norm() <= tol) {
        return "nodes " + std::to_string(order[i]) + " and " + std::to_string(order[j]) +
               " coincide";
      }
    }
  }
  return std::nullopt;
}

/// Range check, degenerate check and orientation fix for one tet. Returns an
/// error message or nullopt.
std::optional<std::string> canonicalize_tet(std::array<NodeIndex, 4>& tet, const NodeTable& nodes,
                                            double min_volume, bool& flipped) {
  for (NodeIndex n : tet) {
    if (n < 0 || static_cast<std::size_t>(n) >= nodes.size()) {
      return "node index " + std::to_string(n) + " out of range";
    }
  }
  const auto& x = nodes.coords;
  double v = tet_volume(x[tet[0]], x[tet[1]], x[tet[2]], x[tet[3]]);
  if (std::abs(v) < min_volume) return "degenerate tetrahedron (volume " + std::to_string(v) + ")";
  flipped = v < 0.0;
  if (flipped) std::swap(tet[0], tet[1]);
  return std::nullopt;
}

double min_tet_volume(const NodeTable& nodes) {
  const double d = bounding_box(nodes).diagonal();
  return kDegenerateTetTolerance * d * d * d;
}

}  // namespace

FaceMarkerConvention parse_face_marker_convention(const std::string& name) {
  if (name == "auto") return FaceMarkerConvention::Auto;
  if (name == "paper") return FaceMarkerConvention::Paper;
  if (name == "tetgen") return FaceMarkerConvention::TetGen;
  throw ConfigError("unknown face marker convention '" + name + "' (auto|paper|tetgen)");
}

std::string to_string(FaceMarkerConvention convention) {
  switch (convention) {
    case FaceMarkerConvention::Auto: return "auto";
    case FaceMarkerConvention::Paper: return "paper";
    case FaceMarkerConvention::TetGen: return "tetgen";
  }
  return "auto";
}

bool RawFaceList::flagged_interior(const RawFace& face) const noexcept {
  if (convention == FaceMarkerConvention::Paper) return face.marker == 1;
  return face.marker == 0;
}

std::vector<std::size_t> RawFaceList::interior_candidates() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (flagged_interior(faces[i])) out.push_back(i);
  return out;
}

std::vector<std::size_t> RawFaceList::exterior_candidates() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (!flagged_interior(faces[i])) out.push_back(i);
  return out;
}

bool MeshTopology::euler_consistent() const noexcept {
  return 4 * element_count() == 2 * interior_face_count() + exterior_face_count();
}

double MeshTopology::bounding_box_diagonal() const { return bounding_box(nodes).diagonal(); }

BoundingBox bounding_box(const NodeTable& nodes) {
  BoundingBox box{Point3::Zero(), Point3::Zero()};
  if (nodes.coords.empty()) return box;
  box.lo = box.hi = nodes.coords.front();
  for (const Point3& p : nodes.coords) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  return box;
}

NodeTable parse_node_file(const fs::path& path) {
  RowReader reader(path);
  const Row header = read_header(reader, "node");
  const auto count = to_number<long long>(reader, header, 0, "node count");
  const auto dim = to_number<int>(reader, header, 1, "dimension");
  const auto attrs = header.tokens.size() > 2 ? to_number<int>(reader, header, 2, "attribute count") : 0;
  if (count < 0 || attrs < 0) throw reader.error(header.line, "negative count in header");
  if (dim != 3) {
    throw UnsupportedMesh(reader.path() + ": only 3D meshes are supported (dimension " +
                          std::to_string(dim) + ")");
  }

  std::vector<long long> ids;
  std::vector<Point3> pts;
  std::vector<std::size_t> lines;
  ids.reserve(count);
  pts.reserve(count);
  while (auto row = reader.next()) {
    if (static_cast<long long>(ids.size()) == count) {
      throw reader.error(row->line, "more node rows than the header count " + std::to_string(count));
    }
    ids.push_back(to_number<long long>(reader, *row, 0, "node index"));
    Point3 p(to_number<double>(reader, *row, 1, "x coordinate"),
             to_number<double>(reader, *row, 2, "y coordinate"),
             to_number<double>(reader, *row, 3, "z coordinate"));
    if (!p.allFinite()) throw reader.error(row->line, "non-finite coordinate");
    pts.push_back(p);
    lines.push_back(row->line);
  }
  if (static_cast<long long>(ids.size()) != count) {
    throw reader.error(0, "header announces " + std::to_string(count) + " nodes but file has " +
                              std::to_string(ids.size()));
  }

  NodeTable table;
  const long long base = ids.empty() ? 0 : *std::min_element(ids.begin(), ids.end());
  if (base != 0 && base != 1) {
    throw reader.error(0, "node indices must start at 0 or 1 (minimum is " + std::to_string(base) + ")");
  }
  table.source_index_base = static_cast<int>(base);
  table.coords.assign(ids.size(), Point3::Zero());
  std::vector<bool> filled(ids.size(), false);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const long long k = ids[i] - base;
    if (k < 0 || k >= count) throw reader.error(lines[i], "node index " + std::to_string(ids[i]) + " out of range");
    if (filled[k]) throw reader.error(lines[i], "duplicate node index " + std::to_string(ids[i]));
    filled[k] = true;
    table.coords[k] = pts[i];
  }
  if (auto problem = check_nodes(table)) throw reader.error(0, *problem);
  return table;
}

ElementTable parse_ele_file(const fs::path& path, const NodeTable& nodes) {
  RowReader reader(path);
  const Row header = read_header(reader, "ele");
  const auto count = to_number<long long>(reader, header, 0, "element count");
  const auto per_tet = to_number<int>(reader, header, 1, "nodes per tetrahedron");
  if (count < 0) throw reader.error(header.line, "negative element count");
  if (per_tet != 4) {
    throw UnsupportedMesh(reader.path() + ": only 4-node tetrahedra are supported (got " +
                          std::to_string(per_tet) + " nodes per element)");
  }

  const long long base = nodes.source_index_base;
  const double min_volume = min_tet_volume(nodes);
  ElementTable table;
  table.tets.reserve(count);
  while (auto row = reader.next()) {
    if (static_cast<long long>(table.size()) == count) {
      throw reader.error(row->line, "more element rows than the header count " + std::to_string(count));
    }
    std::array<NodeIndex, 4> tet{};
    for (int k = 0; k < 4; ++k) {
      const auto raw = to_number<long long>(reader, *row, 1 + k, "node index");
      const long long n = raw - base;
      if (n < 0 || n >= static_cast<long long>(nodes.size())) {
        throw reader.error(row->line, "node index " + std::to_string(raw) + " out of range");
      }
      tet[k] = static_cast<NodeIndex>(n);
    }
    bool flipped = false;
    if (auto problem = canonicalize_tet(tet, nodes, min_volume, flipped)) {
      throw reader.error(row->line, "element " + std::to_string(table.size()) + ": " + *problem);
    }
    table.reoriented += flipped ? 1 : 0;
    table.tets.push_back(tet);
  }
  if (static_cast<long long>(table.size()) != count) {
    throw reader.error(0, "header announces " + std::to_string(count) + " elements but file has " +
                              std::to_string(table.size()));
  }
  return table;
}

RawFaceList parse_face_file(const fs::path& path, const NodeTable& nodes,
                            FaceMarkerConvention convention) {
  RowReader reader(path);
  const Row header = read_header(reader, "face");
  const auto count = to_number<long long>(reader, header, 0, "face count");
  if (count < 0) throw reader.error(header.line, "negative face count");
  const int has_markers = header.tokens.size() > 1 ? to_number<int>(reader, header, 1, "marker flag") : 0;
  if (has_markers != 1) {
    throw reader.error(header.line,
                       "face file carries no boundary markers; regenerate it with markers enabled "
                       "(TetGen: -f without -B)");
  }

  const long long base = nodes.source_index_base;
  RawFaceList list;
  list.convention = convention;
  list.faces.reserve(count);
  bool any_negative = false;
  while (auto row = reader.next()) {
    if (static_cast<long long>(list.faces.size()) == count) {
      throw reader.error(row->line, "more face rows than the header count " + std::to_string(count));
    }
    if (row->tokens.size() < 5) {
      throw reader.error(row->line,
                         "missing boundary marker column; regenerate the face file with markers enabled");
    }
    RawFace face;
    face.line = row->line;
    for (int k = 0; k < 3; ++k) {
      const auto raw = to_number<long long>(reader, *row, 1 + k, "node index");
      const long long n = raw - base;
      if (n < 0 || n >= static_cast<long long>(nodes.size())) {
        throw reader.error(row->line, "node index " + std::to_string(raw) + " out of range");
      }
      face.nodes[k] = static_cast<NodeIndex>(n);
    }
    face.marker = to_number<int>(reader, *row, 4, "boundary marker");
    const bool accepted = convention == FaceMarkerConvention::Paper
                              ? (face.marker == 0 || face.marker == 1)
                              : (face.marker >= -1 && face.marker <= 1);
    if (!accepted) {
      throw reader.error(row->line, "boundary marker " + std::to_string(face.marker) +
                                        " is not valid under the '" + to_string(convention) +
                                        "' convention");
    }
    any_negative = any_negative || face.marker < 0;
    list.faces.push_back(face);
  }
  if (static_cast<long long>(list.faces.size()) != count) {
    throw reader.error(0, "header announces " + std::to_string(count) + " faces but file has " +
                              std::to_string(list.faces.size()));
  }
  if (convention == FaceMarkerConvention::Auto && any_negative) {
    list.convention = FaceMarkerConvention::TetGen;
  }
  return list;
}

FaceAdjacency build_face_adjacency(const RawFaceList& faces, const ElementTable& elements,
                                   Diagnostics* diag) {
  FaceMap map = hash_tet_faces(elements);

  // Resolve the marker reading before classifying.
  RawFaceList resolved{{}, faces.convention};
  std::vector<const Owners*> owners(faces.faces.size(), nullptr);
  std::size_t paper_hits = 0;
  std::size_t tetgen_hits = 0;
  for (std::size_t i = 0; i < faces.faces.size(); ++i) {
    const RawFace& f = faces.faces[i];
    const FaceKey key = make_key(f.nodes[0], f.nodes[1], f.nodes[2]);
    auto it = map.find(key);
    if (it == map.end()) {
      throw TopologyError("face on line " + std::to_string(f.line) + " (" +
                          std::to_string(f.nodes[0]) + ", " + std::to_string(f.nodes[1]) + ", " +
                          std::to_string(f.nodes[2]) + ") belongs to no tetrahedron");
    }
    throw_if_nonmanifold(key, it->second);
    if (it->second.seen_in_file) {
      throw TopologyError("face on line " + std::to_string(f.line) + " is listed twice");
    }
    it->second.seen_in_file = true;
    owners[i] = &it->second;
    const bool interior = it->second.count == 2;
    paper_hits += (interior == (f.marker == 1)) ? 1 : 0;
    tetgen_hits += (interior == (f.marker == 0)) ? 1 : 0;
  }
  if (resolved.convention == FaceMarkerConvention::Auto) {
    resolved.convention = paper_hits > tetgen_hits ? FaceMarkerConvention::Paper
                                                   : FaceMarkerConvention::TetGen;
  }

  FaceAdjacency adj;
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < faces.faces.size(); ++i) {
    const RawFace& f = faces.faces[i];
    const bool interior = owners[i]->count == 2;
    if (interior != resolved.flagged_interior(f)) ++mismatched;
    push_record(adj, f.nodes, *owners[i]);
  }
  if (mismatched > 0 && diag) {
    diag->warn(std::to_string(mismatched) + " face marker(s) disagree with the element adjacency under the '" +
               to_string(resolved.convention) + "' convention; using the element-derived classification");
  }

  // Faces the file did not list, in (tet, local face) order.
  std::size_t missing = 0;
  for (std::size_t t = 0; t < elements.size(); ++t) {
    const auto& tet = elements.tets[t];
    for (const auto& lf : kTetFaces) {
      auto it = map.find(make_key(tet[lf[0]], tet[lf[1]], tet[lf[2]]));
      Owners& o = it->second;
      if (o.seen_in_file) continue;
      throw_if_nonmanifold(it->first, o);
      o.seen_in_file = true;
      ++missing;
      push_record(adj, {tet[lf[0]], tet[lf[1]], tet[lf[2]]}, o);
    }
  }
  if (missing > 0 && diag) {
    diag->warn(std::to_string(missing) + " mesh face(s) missing from the face file were derived from the elements");
  }
  return adj;
}

FaceAdjacency derive_face_adjacency(const ElementTable& elements) {
  return build_face_adjacency(RawFaceList{}, elements, nullptr);
}

CentroidTable compute_centroids(const NodeTable& nodes, const ElementTable& elements) {
  CentroidTable table;
  table.centroids.reserve(elements.size());
  for (const auto& tet : elements.tets) {
    const auto& x = nodes.coords;
    table.centroids.push_back((x[tet[0]] + x[tet[1]] + x[tet[2]] + x[tet[3]]) / 4.0);
  }
  return table;
}

MeshTopology make_topology(NodeTable nodes, ElementTable elements, FaceAdjacency faces) {
  MeshTopology mesh;
  mesh.centroids = compute_centroids(nodes, elements);
  mesh.nodes = std::move(nodes);
  mesh.elements = std::move(elements);
  mesh.faces = std::move(faces);
  if (!mesh.euler_consistent()) {
    throw TopologyError("face count check failed: 4*" + std::to_string(mesh.element_count()) +
                        " != 2*" + std::to_string(mesh.interior_face_count()) + " + " +
                        std::to_string(mesh.exterior_face_count()));
  }
  return mesh;
}

MeshTopology build_topology(NodeTable nodes, ElementTable elements) {
  if (auto problem = check_nodes(nodes)) throw GeometryError(*problem);
  const double min_volume = min_tet_volume(nodes);
  elements.reoriented = 0;
  for (std::size_t t = 0; t < elements.size(); ++t) {
    bool flipped = false;
    if (auto problem = canonicalize_tet(elements.tets[t], nodes, min_volume, flipped)) {
      throw GeometryError("element " + std::to_string(t) + ": " + *problem);
    }
    elements.reoriented += flipped ? 1 : 0;
  }
  FaceAdjacency faces = derive_face_adjacency(elements);
  return make_topology(std::move(nodes), std::move(elements), std::move(faces));
}

MeshTopology load_tetgen_mesh(const fs::path& prefix, FaceMarkerConvention convention,
                              Diagnostics* diag) {
  const fs::path base = prefix.string();
  auto with_ext = [&](const char* ext) { return fs::path(base.string() + ext); };
  const fs::path node_path = with_ext(".node");
  const fs::path ele_path = with_ext(".ele");
  const fs::path face_path = with_ext(".face");
  if (!fs::exists(node_path)) throw IoError(node_path.string(), "mesh file not found");
  if (!fs::exists(ele_path)) throw IoError(ele_path.string(), "mesh file not found");

  NodeTable nodes = parse_node_file(node_path);
  ElementTable elements = parse_ele_file(ele_path, nodes);
  FaceAdjacency faces;
  if (fs::exists(face_path)) {
    faces = build_face_adjacency(parse_face_file(face_path, nodes, convention), elements, diag);
  } else {
    if (diag) diag->warn(face_path.string() + " not found; faces derived from the element table");
    faces = derive_face_adjacency(elements);
  }
  return make_topology(std::move(nodes), std::move(elements), std::move(faces));
}

void write_topology_dump(const MeshTopology& mesh, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.precision(17);
  out << "# sfem normalized mesh dump\n"
      << "# all indices are 0-based; sections follow in this order:\n"
      << "#   Node <N_n>      : x y z\n"
      << "#   Element <N_t>   : n0 n1 n2 n3 (positive orientation)\n"
      << "#   Centroid <N_t>  : x y z\n"
      << "#   Face_in <N_i>   : a b c tet0 tet1 rem0 rem1\n"
      << "#   Face_out <N_e>  : a b c tet rem\n";
  out << "Node " << mesh.node_count() << '\n';
  for (const Point3& p : mesh.nodes.coords) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "Element " << mesh.element_count() << '\n';
  for (const auto& t : mesh.elements.tets) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "Centroid " << mesh.centroids.size() << '\n';
  for (const Point3& p : mesh.centroids.centroids) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "Face_in " << mesh.interior_face_count() << '\n';
  for (const auto& f : mesh.faces.interior) {
    out << f.nodes[0] << ' ' << f.nodes[1] << ' ' << f.nodes[2] << ' ' << f.owners[0] << ' '
        << f.owners[1] << ' ' << f.remaining[0] << ' ' << f.remaining[1] << '\n';
  }
  out << "Face_out " << mesh.exterior_face_count() << '\n';
  for (const auto& f : mesh.faces.exterior) {
    out << f.nodes[0] << ' ' << f.nodes[1] << ' ' << f.nodes[2] << ' ' << f.owner << ' '
        << f.remaining << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace sfem
