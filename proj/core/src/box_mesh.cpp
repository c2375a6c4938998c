#include "sfem/box_mesh.hpp"

#include <fstream>
#include <random>

namespace sfem {

namespace {

namespace fs = std::filesystem;

// Cell corner c[a + 2b + 4d] sits at offset (a, b, d).
constexpr std::array<std::array<int, 4>, 5> kFiveEven{{
    {1, 2, 4, 7}, {0, 1, 2, 4}, {3, 1, 2, 7}, {5, 1, 4, 7}, {6, 2, 4, 7}}};
constexpr std::array<std::array<int, 4>, 5> kFiveOdd{{
    {0, 3, 5, 6}, {1, 0, 3, 5}, {2, 0, 3, 6}, {4, 0, 5, 6}, {7, 3, 5, 6}}};
// Monotone paths from corner 0 to corner 7, one per axis permutation.
constexpr std::array<std::array<int, 4>, 6> kSix{{
    {0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}}};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.precision(17);
  return out;
}

}  // namespace

BoxMesh generate_box_mesh(const BoxMeshSpec& spec) {
  const auto [nx, ny, nz] = spec.cells;
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("box mesh needs at least one cell per axis");
  if (!(spec.extent.minCoeff() > 0.0)) throw ConfigError("box extent must be positive");
  if (spec.jitter < 0.0 || spec.jitter >= 0.25) throw ConfigError("box jitter must lie in [0, 0.25)");

  const Vec3 h(spec.extent.x() / nx, spec.extent.y() / ny, spec.extent.z() / nz);
  auto id = [&](int i, int j, int k) {
    return static_cast<NodeIndex>(i + (nx + 1) * (j + (ny + 1) * k));
  };

  BoxMesh mesh;
  mesh.nodes.coords.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        Point3 p = spec.origin + Vec3(i * h.x(), j * h.y(), k * h.z());
        // pin the far faces exactly to the extent
        if (i == nx) p.x() = spec.origin.x() + spec.extent.x();
        if (j == ny) p.y() = spec.origin.y() + spec.extent.y();
        if (k == nz) p.z() = spec.origin.z() + spec.extent.z();
        if (spec.jitter > 0.0) {
          const Vec3 shake(unit(rng), unit(rng), unit(rng));
          const bool interior = i > 0 && i < nx && j > 0 && j < ny && k > 0 && k < nz;
          if (interior) p += spec.jitter * shake.cwiseProduct(h);
        }
        mesh.nodes.coords.push_back(p);
      }
    }
  }

  const std::size_t per_cell = spec.split == HexSplit::Five ? 5 : 6;
  mesh.elements.tets.reserve(static_cast<std::size_t>(nx) * ny * nz * per_cell);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        std::array<NodeIndex, 8> c{};
        for (int corner = 0; corner < 8; ++corner) {
          c[corner] = id(i + (corner & 1), j + ((corner >> 1) & 1), k + ((corner >> 2) & 1));
        }
        auto emit = [&](const std::array<int, 4>& local) {
          mesh.elements.tets.push_back({c[local[0]], c[local[1]], c[local[2]], c[local[3]]});
        };
        if (spec.split == HexSplit::Six) {
          for (const auto& t : kSix) emit(t);
        } else if ((i + j + k) % 2 == 0) {
          for (const auto& t : kFiveEven) emit(t);
        } else {
          for (const auto& t : kFiveOdd) emit(t);
        }
      }
    }
  }

  // Orientation is canonicalized here so the in-memory tables satisfy the
  // same invariant as parsed ones.
  const auto& x = mesh.nodes.coords;
  for (auto& t : mesh.elements.tets) {
    if (tet_volume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]) < 0.0) std::swap(t[0], t[1]);
  }
  return mesh;
}

void write_tetgen_mesh(const fs::path& prefix, const NodeTable& nodes,
                       const ElementTable& elements, const TetGenWriteOptions& options) {
  if (options.index_base != 0 && options.index_base != 1) {
    throw ConfigError("index base must be 0 or 1");
  }
  const int base = options.index_base;
  const std::string stem = prefix.string();
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());

  {
    auto out = open_out(stem + ".node");
    out << nodes.size() << " 3 0 0\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Point3& p = nodes.coords[i];
      out << i + base << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    if (!out) throw IoError(stem + ".node", "write failed");
  }
  {
    auto out = open_out(stem + ".ele");
    out << elements.size() << " 4 0\n";
    for (std::size_t t = 0; t < elements.size(); ++t) {
      const auto& e = elements.tets[t];
      out << t + base << ' ' << e[0] + base << ' ' << e[1] + base << ' ' << e[2] + base << ' '
          << e[3] + base << '\n';
    }
    if (!out) throw IoError(stem + ".ele", "write failed");
  }
  if (!options.write_faces) return;

  const FaceAdjacency faces = derive_face_adjacency(elements);
  const bool paper = options.face_markers == FaceMarkerConvention::Paper;
  const int interior_marker = paper ? 1 : 0;
  const int exterior_marker = paper ? 0 : 1;
  auto out = open_out(stem + ".face");
  out << faces.interior.size() + faces.exterior.size() << " 1\n";
  std::size_t row = 0;
  for (const auto& f : faces.exterior) {
    out << row++ + base << ' ' << f.nodes[0] + base << ' ' << f.nodes[1] + base << ' '
        << f.nodes[2] + base << ' ' << exterior_marker << '\n';
  }
  for (const auto& f : faces.interior) {
    out << row++ + base << ' ' << f.nodes[0] + base << ' ' << f.nodes[1] + base << ' '
        << f.nodes[2] + base << ' ' << interior_marker << '\n';
  }
  if (!out) throw IoError(stem + ".face", "write failed");
}

}  // namespace sfem
