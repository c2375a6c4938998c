#pragma once

// Reference computations used by the tests. None of these call the smoothing,
// assembly or material code under test.

#include <array>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfem/assembly.hpp"
#include "sfem/box_mesh.hpp"
#include "sfem/mesh_io.hpp"

namespace sfem::oracle {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(SFEM_TEST_DATA_DIR) / name;
}

inline MeshTopology box_topology(std::array<int, 3> cells, Vec3 extent = Vec3(1, 1, 1),
                                 HexSplit split = HexSplit::Five, double jitter = 0.0, unsigned seed = 1) {
  BoxMeshSpec spec;
  spec.cells = cells;
  spec.extent = extent;
  spec.split = split;
  spec.jitter = jitter;
  spec.seed = seed;
  BoxMesh m = generate_box_mesh(spec);
  return build_topology(std::move(m.nodes), std::move(m.elements));
}

/// Cantilever mesh used across tests: 1 x 0.2 x 0.2 m, 20 x 4 x 4 cells.
inline MeshTopology beam_topology() { return box_topology({20, 4, 4}, Vec3(1.0, 0.2, 0.2)); }

inline MeshTopology two_tet_topology() { return load_tetgen_mesh(data_path("two_tet")); }
inline MeshTopology one_tet_topology() { return load_tetgen_mesh(data_path("one_tet")); }

/// Four points with |volume| >= min_volume, uniformly drawn in [-1, 1]^3.
inline std::array<Point3, 4> random_tet(std::mt19937& rng, double min_volume = 0.02) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    std::array<Point3, 4> x;
    for (auto& p : x) p = Point3(u(rng), u(rng), u(rng));
    Eigen::Matrix3d m;
    m << x[1] - x[0], x[2] - x[0], x[3] - x[0];
    if (std::abs(m.determinant()) / 6.0 >= min_volume) return x;
  }
}

inline double abs_tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  Eigen::Matrix3d m;
  m << b - a, c - a, d - a;
  return std::abs(m.determinant()) / 6.0;
}

/// Barycentric coordinates of x with respect to tet t.
inline Eigen::Vector4d barycentric(const std::array<Point3, 4>& t, const Point3& x) {
  Eigen::Matrix4d a;
  for (int i = 0; i < 4; ++i) a.col(i) << 1.0, t[i];
  Eigen::Vector4d rhs;
  rhs << 1.0, x;
  return a.fullPivLu().solve(rhs);
}

inline std::array<Point3, 4> tet_points(const MeshTopology& mesh, TetIndex t) {
  std::array<Point3, 4> x;
  for (int i = 0; i < 4; ++i) x[i] = mesh.nodes.coords[mesh.elements.tets[t][i]];
  return x;
}

struct OracleDomain {
  std::vector<NodeIndex> nodes;
  /// 3 x n smoothed gradients.
  Eigen::MatrixXd gradients;
  double volume = 0.0;
};

/// Smoothed gradients of domain `ordinal` by a 3-point rule on every boundary
/// triangle, with N_I taken from the barycentric coordinates of the tet that
/// contains the triangle.
inline OracleDomain quadrature_domain(const MeshTopology& mesh, std::size_t ordinal) {
  struct SubTet {
    TetIndex owner;
    bool include_face;
  };
  const std::size_t ne = mesh.exterior_face_count();
  std::array<NodeIndex, 3> face{};
  std::vector<SubTet> subs;
  OracleDomain out;
  if (ordinal < ne) {
    const ExteriorFace& f = mesh.faces.exterior[ordinal];
    face = f.nodes;
    subs.push_back({f.owner, true});
    out.nodes = {f.nodes[0], f.nodes[1], f.nodes[2], f.remaining};
  } else {
    const InteriorFace& f = mesh.faces.interior[ordinal - ne];
    face = f.nodes;
    subs.push_back({f.owners[0], false});
    subs.push_back({f.owners[1], false});
    out.nodes = {f.nodes[0], f.nodes[1], f.nodes[2], f.remaining[0], f.remaining[1]};
  }
  const int n = static_cast<int>(out.nodes.size());
  out.gradients = Eigen::MatrixXd::Zero(3, n);

  const Point3 a = mesh.nodes.coords[face[0]];
  const Point3 b = mesh.nodes.coords[face[1]];
  const Point3 c = mesh.nodes.coords[face[2]];
  for (const SubTet& s : subs) {
    const auto t = tet_points(mesh, s.owner);
    const Point3 apex = (t[0] + t[1] + t[2] + t[3]) / 4.0;
    out.volume += abs_tet_volume(a, b, c, apex);
    // Triangle and the sub-tet vertex opposite to it.
    std::vector<std::array<Point3, 4>> tris = {{a, b, apex, c}, {b, c, apex, a}, {c, a, apex, b}};
    if (s.include_face) tris.push_back({a, b, c, apex});
    for (const auto& tri : tris) {
      Vec3 normal = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
      const double area = 0.5 * normal.norm();
      normal.normalize();
      if (normal.dot(tri[0] - tri[3]) < 0) normal = -normal;
      const std::array<Eigen::Vector3d, 3> rule = {Eigen::Vector3d(2.0 / 3, 1.0 / 6, 1.0 / 6),
                                                   Eigen::Vector3d(1.0 / 6, 2.0 / 3, 1.0 / 6),
                                                   Eigen::Vector3d(1.0 / 6, 1.0 / 6, 2.0 / 3)};
      for (const auto& w : rule) {
        const Point3 x = w[0] * tri[0] + w[1] * tri[1] + w[2] * tri[2];
        const Eigen::Vector4d lam = barycentric(t, x);
        for (int v = 0; v < 4; ++v) {
          const NodeIndex node = mesh.elements.tets[s.owner][v];
          for (int i = 0; i < n; ++i)
            if (out.nodes[i] == node) out.gradients.col(i) += lam[v] * normal * area / 3.0;
        }
      }
    }
  }
  out.gradients /= out.volume;
  return out;
}

/// 6 x 3n strain-displacement matrix, rows (xx, yy, zz, yz, xz, xy).
inline Eigen::MatrixXd b_matrix(const Eigen::MatrixXd& g) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6, 3 * g.cols());
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    const double x = g(0, i), y = g(1, i), z = g(2, i);
    b(0, 3 * i) = x;
    b(1, 3 * i + 1) = y;
    b(2, 3 * i + 2) = z;
    b(3, 3 * i + 1) = z;
    b(3, 3 * i + 2) = y;
    b(4, 3 * i) = z;
    b(4, 3 * i + 2) = x;
    b(5, 3 * i) = y;
    b(5, 3 * i + 1) = x;
  }
  return b;
}

/// Isotropic constitutive matrix from the Lame formulas.
inline Eigen::Matrix<double, 6, 6> lame_matrix(double e, double nu) {
  const double lambda = e * nu / ((1 + nu) * (1 - 2 * nu));
  const double mu = e / (2 * (1 + nu));
  Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::Zero();
  c.topLeftCorner<3, 3>().setConstant(lambda);
  for (int i = 0; i < 3; ++i) c(i, i) += 2 * mu;
  for (int i = 3; i < 6; ++i) c(i, i) = mu;
  return c;
}

/// Dense global stiffness summed over all smoothing domains of the oracle.
inline Eigen::MatrixXd quadrature_global_stiffness(const MeshTopology& mesh, const Eigen::Matrix<double, 6, 6>& c) {
  const Eigen::Index dim = static_cast<Eigen::Index>(mesh.dof_count());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t d = 0; d < mesh.face_count(); ++d) {
    const OracleDomain dom = quadrature_domain(mesh, d);
    const Eigen::MatrixXd b = b_matrix(dom.gradients);
    const Eigen::MatrixXd kd = b.transpose() * c * b * dom.volume;
    const int n = static_cast<int>(dom.nodes.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k.block<3, 3>(3 * dom.nodes[i], 3 * dom.nodes[j]) += kd.block<3, 3>(3 * i, 3 * j);
  }
  return k;
}

/// Dense matrix from triplets by direct accumulation.
inline Eigen::MatrixXd dense_from_triplets(const TripletBuffer& buf, Eigen::Index dim) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t s = 0; s < buf.size(); ++s) k(buf.rows[s], buf.cols[s]) += buf.values[s];
  return k;
}

/// The six rigid-body modes (three translations, three rotations) as columns.
inline Eigen::MatrixXd rigid_modes(const MeshTopology& mesh) {
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.node_count());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3 * n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point3& x = mesh.nodes.coords[i];
    for (int a = 0; a < 3; ++a) r(3 * i + a, a) = 1.0;
    for (int a = 0; a < 3; ++a) {
      Vec3 w = Vec3::Zero();
      w[a] = 1.0;
      r.block<3, 1>(3 * i, 3 + a) = w.cross(x);
    }
  }
  return r;
}

/// Nodal values of u(x) = M x + t.
inline Eigen::VectorXd linear_field(const MeshTopology& mesh, const Eigen::Matrix3d& m, const Vec3& t) {
  Eigen::VectorXd d(3 * mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) d.segment<3>(3 * i) = m * mesh.nodes.coords[i] + t;
  return d;
}

/// Engineering-shear Voigt vector of sym(M).
inline Eigen::Matrix<double, 6, 1> sym_voigt(const Eigen::Matrix3d& m) {
  Eigen::Matrix<double, 6, 1> e;
  e << m(0, 0), m(1, 1), m(2, 2), m(1, 2) + m(2, 1), m(0, 2) + m(2, 0), m(0, 1) + m(1, 0);
  return e;
}

/// Solves K d = f with d_i = g_i fixed on `fixed`, by partitioning the dense
/// system into free and fixed blocks.
inline Eigen::VectorXd dense_constrained_solve(const Eigen::MatrixXd& k, const Eigen::VectorXd& f,
                                               const std::vector<std::pair<Eigen::Index, double>>& fixed) {
  const Eigen::Index n = k.rows();
  std::vector<char> is_fixed(n, 0);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (const auto& [i, g] : fixed) {
    is_fixed[i] = 1;
    d[i] = g;
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!is_fixed[i]) free.push_back(i);
  const Eigen::Index m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd kff(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    rhs[a] = f[free[a]];
    for (Eigen::Index j = 0; j < n; ++j)
      if (is_fixed[j]) rhs[a] -= k(free[a], j) * d[j];
    for (Eigen::Index b = 0; b < m; ++b) kff(a, b) = k(free[a], free[b]);
  }
  const Eigen::VectorXd x = kff.ldlt().solve(rhs);
  for (Eigen::Index a = 0; a < m; ++a) d[free[a]] = x[a];
  return d;
}

inline double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace sfem::oracle
