#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sfem/smoothing.hpp"

using namespace sfem;

namespace {

ShapeValues sv(double a, double b, double c, double d, double e) {
  ShapeValues s;
  s << a, b, c, d, e;
  return s;
}

ShapeValues unit(int i) { return ShapeValues::Unit(i); }

MeshTopology single_tet(const std::array<Point3, 4>& x) {
  NodeTable n;
  n.coords.assign(x.begin(), x.end());
  ElementTable e;
  e.tets.push_back({0, 1, 2, 3});
  return build_topology(std::move(n), std::move(e));
}

std::vector<MeshTopology> sample_meshes() {
  std::vector<MeshTopology> out;
  out.push_back(oracle::two_tet_topology());
  out.push_back(oracle::one_tet_topology());
  out.push_back(oracle::box_topology({2, 2, 2}, Vec3(1, 1, 1), HexSplit::Five, 0.2, 3));
  out.push_back(oracle::box_topology({2, 1, 2}, Vec3(2, 0.5, 1), HexSplit::Six, 0.15, 8));
  return out;
}

}  // namespace

TEST(ShapeValuesTable, CentroidRowFIsQuarters) {
  const ShapeValues f = shape_values_at_face_centroid({unit(0), unit(1), unit(2)});
  EXPECT_EQ(f, sv(1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0));
}

TEST(ShapeValuesTable, ReproducesAllSixGaussRows) {
  const ShapeValues a = unit(0), b = unit(1), c = unit(2);
  const ShapeValues f = sv(0.25, 0.25, 0.25, 0.25, 0);
  const ShapeValues g = sv(0.25, 0.25, 0.25, 0, 0.25);
  const struct {
    std::array<ShapeValues, 3> v;
    ShapeValues row;
  } rows[] = {
      {{a, c, f}, sv(5, 1, 5, 1, 0) / 12},  // g1
      {{a, c, g}, sv(5, 1, 5, 0, 1) / 12},  // g2
      {{b, c, g}, sv(1, 5, 5, 0, 1) / 12},  // g3
      {{b, c, f}, sv(1, 5, 5, 1, 0) / 12},  // g4
      {{a, b, f}, sv(5, 5, 1, 1, 0) / 12},  // g5
      {{a, b, g}, sv(5, 5, 1, 0, 1) / 12},  // g6
  };
  for (const auto& r : rows) {
    const ShapeValues got = shape_values_at_face_centroid(r.v);
    EXPECT_LE((got - r.row).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ShapeValuesTable, PartitionOfUnity) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<ShapeValues, 3> v;
    for (auto& s : v) {
      for (int i = 0; i < 5; ++i) s[i] = u(rng);
      s /= s.sum();
    }
    EXPECT_NEAR(shape_values_at_face_centroid(v).sum(), 1.0, 1e-15);
  }
}

TEST(InteriorDomain, TwoTetHasSixTrianglesAndFiveNodes) {
  const MeshTopology m = oracle::two_tet_topology();
  const SmoothingDomain d = build_interior_domain(m, 0);
  EXPECT_EQ(d.kind, DomainKind::Interior);
  EXPECT_EQ(d.node_count, 5);
  EXPECT_EQ(d.triangle_count, 6);
  const auto& f = m.faces.interior[0];
  EXPECT_EQ(d.field_nodes, (std::array<NodeIndex, 5>{f.nodes[0], f.nodes[1], f.nodes[2], f.remaining[0], f.remaining[1]}));
  EXPECT_EQ(d.ordinal, m.exterior_face_count());
}

TEST(InteriorDomain, TriangleShapeValuesAreTableRows) {
  const MeshTopology m = oracle::two_tet_topology();
  const SmoothingDomain d = build_interior_domain(m, 0);
  std::vector<ShapeValues> expected = {sv(5, 1, 5, 1, 0) / 12, sv(5, 1, 5, 0, 1) / 12, sv(1, 5, 5, 0, 1) / 12,
                                       sv(1, 5, 5, 1, 0) / 12, sv(5, 5, 1, 1, 0) / 12, sv(5, 5, 1, 0, 1) / 12};
  for (const BoundaryTriangle& t : d.boundary()) {
    auto it = std::find_if(expected.begin(), expected.end(),
                           [&](const ShapeValues& e) { return (e - t.shape_values).cwiseAbs().maxCoeff() <= 1e-15; });
    ASSERT_NE(it, expected.end());
    expected.erase(it);
  }
  EXPECT_TRUE(expected.empty());
}

TEST(InteriorDomain, VolumeIsQuarterOfEachOwner) {
  const MeshTopology m = oracle::two_tet_topology();
  const SmoothingDomain d = build_interior_domain(m, 0);
  const auto t0 = oracle::tet_points(m, 0), t1 = oracle::tet_points(m, 1);
  const double expected = (oracle::abs_tet_volume(t0[0], t0[1], t0[2], t0[3]) +
                           oracle::abs_tet_volume(t1[0], t1[1], t1[2], t1[3])) / 4.0;
  EXPECT_NEAR(d.volume, expected, 1e-15);
}

TEST(ExteriorDomain, RandomTetsHaveQuarterVolumeAndFourTriangles) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = oracle::random_tet(rng);
    const MeshTopology m = single_tet(x);
    const double quarter = oracle::abs_tet_volume(x[0], x[1], x[2], x[3]) / 4.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const SmoothingDomain d = build_exterior_domain(m, k);
      EXPECT_EQ(d.node_count, 4);
      EXPECT_EQ(d.triangle_count, 4);
      EXPECT_NEAR(d.volume, quarter, 1e-14 * quarter);
    }
  }
}

TEST(ExteriorDomain, FaceCentroidShapeValues) {
  const MeshTopology m = oracle::one_tet_topology();
  const SmoothingDomain d = build_exterior_domain(m, 0);
  const double third = 1.0 / 3.0;
  bool found = false;
  for (const BoundaryTriangle& t : d.boundary())
    found = found || (t.shape_values - sv(third, third, third, 0, 0)).cwiseAbs().maxCoeff() <= 1e-15;
  EXPECT_TRUE(found);
}

TEST(SmoothedB, GradientsSumToZeroAndSurfaceCloses) {
  for (const MeshTopology& m : sample_meshes()) {
    for (std::size_t k = 0; k < m.face_count(); ++k) {
      const SmoothingDomain d = build_domain(m, k);
      const SmoothedB b = smoothed_b_matrix(d);
      Vec3 net = Vec3::Zero();
      double area = 0.0;
      for (const auto& t : d.boundary()) {
        net += t.area * t.normal;
        area += t.area;
        EXPECT_NEAR(t.shape_values.sum(), 1.0, 1e-15);
      }
      EXPECT_LE(net.norm(), 1e-12 * area);
      EXPECT_LE(b.active().rowwise().sum().norm(), 1e-12 * b.active().norm());
    }
  }
}

TEST(SmoothedB, MatchesThreePointQuadratureOracle) {
  for (const MeshTopology& m : sample_meshes()) {
    for (std::size_t k = 0; k < m.face_count(); ++k) {
      const SmoothingDomain d = build_domain(m, k);
      const SmoothedB b = smoothed_b_matrix(d);
      const oracle::OracleDomain o = oracle::quadrature_domain(m, k);
      ASSERT_EQ(static_cast<int>(o.nodes.size()), d.node_count);
      for (int i = 0; i < d.node_count; ++i) ASSERT_EQ(o.nodes[i], d.field_nodes[i]);
      EXPECT_NEAR(d.volume, o.volume, 1e-14 * o.volume);
      EXPECT_LE((Eigen::MatrixXd(b.active()) - o.gradients).norm(), 1e-12 * o.gradients.norm());
    }
  }
}

TEST(SmoothedB, RigidTranslationGivesZeroStrain) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  const MeshTopology m = oracle::box_topology({2, 2, 2}, Vec3(1, 1, 1), HexSplit::Five, 0.2, 5);
  for (std::size_t k = 0; k < m.face_count(); ++k) {
    const SmoothingDomain d = build_domain(m, k);
    const SmoothedB b = smoothed_b_matrix(d);
    const Vec3 t(u(rng), u(rng), u(rng));
    Eigen::VectorXd disp(3 * d.node_count);
    for (int i = 0; i < d.node_count; ++i) disp.segment<3>(3 * i) = t;
    EXPECT_LE((b.matrix() * disp).norm(), 1e-10 * disp.norm());
  }
}

TEST(SmoothedB, LinearFieldGivesConstantStrain) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  const MeshTopology m = oracle::box_topology({2, 3, 2}, Vec3(1, 1, 1), HexSplit::Six, 0.2, 6);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Matrix3d mm;
    for (int i = 0; i < 9; ++i) mm(i) = u(rng);
    const Vec3 t(u(rng), u(rng), u(rng));
    const Eigen::VectorXd full = oracle::linear_field(m, mm, t);
    const auto expected = oracle::sym_voigt(mm);
    for (std::size_t k = 0; k < m.face_count(); ++k) {
      const SmoothingDomain d = build_domain(m, k);
      Eigen::VectorXd disp(3 * d.node_count);
      for (int i = 0; i < d.node_count; ++i) disp.segment<3>(3 * i) = full.segment<3>(3 * d.field_nodes[i]);
      EXPECT_LE((smoothed_b_matrix(d).matrix() * disp - expected).norm(), 1e-9 * expected.norm());
    }
  }
}
