#pragma once

// Nodal loads from surface pressure and point forces, and Dirichlet
// constraints imposed either by penalty (default) or by exact elimination.

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sfem/assembly.hpp"
#include "sfem/errors.hpp"
#include "sfem/mesh_io.hpp"

namespace sfem {

/// Points with coordinate[axis] == value (within the selector tolerance).
struct PlaneSelector {
  int axis = 0;
  double value = 0.0;
};

/// Points inside the closed box [lo, hi] (within the selector tolerance).
struct BoxSelector {
  Point3 lo = Point3::Zero();
  Point3 hi = Point3::Zero();
};

using Selector = std::variant<PlaneSelector, BoxSelector>;

/// Absolute tolerance used by selectors: 1e-9 times the bounding-box diagonal.
double selector_tolerance(const MeshTopology& mesh);
bool selects(const Selector& selector, const Point3& p, double tolerance);
std::vector<NodeIndex> select_nodes(const MeshTopology& mesh, const Selector& selector);
/// Exterior faces whose three nodes are all selected.
std::vector<std::size_t> select_exterior_faces(const MeshTopology& mesh, const Selector& selector);

struct DirichletDof {
  DofIndex dof = 0;
  double value = 0.0;  ///< prescribed displacement, m
};

struct DirichletSet {
  /// Sorted by dof, no duplicates.
  std::vector<DirichletDof> dofs;

  bool empty() const noexcept { return dofs.empty(); }
  std::size_t size() const noexcept { return dofs.size(); }
};

/// Constrains the listed components of every node picked by the selector.
struct DirichletSpec {
  Selector selector;
  std::array<bool, 3> components{true, true, true};
  Vec3 value = Vec3::Zero();
};

/// Merges constraints; the same dof prescribed twice with different values is
/// a ConfigError, as is a selector that matches no node.
DirichletSet build_dirichlet(const MeshTopology& mesh, const std::vector<DirichletSpec>& specs);

/// Merges explicit (dof, value) pairs under the same rules.
DirichletSet make_dirichlet(std::vector<DirichletDof> dofs, std::size_t dof_count);

struct SurfacePressure {
  Selector selector;
  double pressure = 0.0;                 ///< N/m^2
  Vec3 direction = Vec3(0.0, 0.0, -1.0); ///< unit direction of the traction
};

struct PointLoad {
  NodeIndex node = 0;
  Vec3 force = Vec3::Zero();  ///< N
};

struct LoadCase {
  std::vector<SurfacePressure> pressures;
  std::vector<PointLoad> point_loads;
};

/// Each loaded face adds pressure * area / 3 along the direction to each of
/// its nodes; point loads are added as given.
Eigen::VectorXd pressure_to_nodal_forces(const LoadCase& loads, const MeshTopology& mesh);

/// Sum of p * area over every selected face (for conservation checks).
double loaded_area(const MeshTopology& mesh, const Selector& selector);

inline constexpr double kDefaultPenaltyFactor = 1e8;

/// K_ii += alpha, f_i += alpha g_i with alpha = factor * max |diag K|.
/// Returns alpha. An empty set records a warning: the system stays singular
/// for a free-floating body.
double apply_penalty_bc(CscMatrix& k, Eigen::VectorXd& f, const DirichletSet& bc,
                        double penalty_factor = kDefaultPenaltyFactor, Diagnostics* diag = nullptr);

/// Exact elimination: constrained rows and columns are zeroed, the diagonal
/// set to 1 and the right-hand side moved across, so K stays symmetric.
void apply_elimination_bc(CscMatrix& k, Eigen::VectorXd& f, const DirichletSet& bc);

}  // namespace sfem
